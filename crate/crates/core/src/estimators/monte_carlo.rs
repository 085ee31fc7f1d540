use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice_walk::distribution::ProductSampler;
use crate::lattice_walk::LatticeDistribution;
use crate::rng::{replica_key, StreamKey};
use crate::schedules::DEFAULT_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub replicas: u64,
    pub exact: bool,
}

impl HittingEstimate {
    pub fn exact(p: f64) -> Self {
        Self {
            p_hat: p,
            stderr: 0.0,
            replicas: 0,
            exact: true,
        }
    }

    pub fn from_hits(hits: u64, replicas: u64) -> Self {
        let p = if replicas == 0 {
            0.0
        } else {
            hits as f64 / replicas as f64
        };
        Self {
            p_hat: p,
            stderr: (p * (1.0 - p) / replicas.max(1) as f64).sqrt(),
            replicas,
            exact: false,
        }
    }
}

/// Return times `k < until` of one homogeneous walk; stops at the first
/// return at or after `stop_after` when given.
fn return_times(sampler: &ProductSampler, key: StreamKey, until: u64, stop_after: Option<u64>) -> Vec<u64> {
    let dim = sampler.coords.len();
    let mut pos = vec![0i64; dim];
    let mut nonzero = 0usize;
    let mut out = Vec::new();
    if stop_after == Some(0) {
        out.push(0);
        return out;
    }
    for k in 1..until {
        let base = (k - 1) * dim as u64;
        for (j, c) in sampler.coords.iter().enumerate() {
            let s = c.sample(key.draw(base + j as u64));
            if s != 0 {
                let old = pos[j];
                pos[j] = old + s;
                if old == 0 {
                    nonzero += 1;
                }
                if pos[j] == 0 {
                    nonzero -= 1;
                }
            }
        }
        if nonzero == 0 {
            out.push(k);
            if stop_after.is_some_and(|a| k >= a) {
                break;
            }
        }
    }
    out
}

fn prepare(dist: &LatticeDistribution<f64>, b: u64) -> Result<ProductSampler> {
    dist.validate()?;
    if b > DEFAULT_CAP {
        return Err(Error::NotMaterializable {
            index: 0,
            cap: DEFAULT_CAP,
        });
    }
    Ok(ProductSampler::new(dist))
}

/// Fraction of replicas visiting the origin at some `k` in `[a, b)`.
///
/// Replica `r` drives coordinate `j` at step `k` with counter
/// `(k − 1) · D + j` of `replica_key(seed, r)`, the layout of the
/// simulator.
pub fn mc_hitting(dist: &LatticeDistribution<f64>, a: u64, b: u64, replicas: u64, seed: u64) -> Result<HittingEstimate> {
    let sampler = prepare(dist, b)?;
    if b <= a {
        return Ok(HittingEstimate::from_hits(0, replicas));
    }
    let hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let t = return_times(&sampler, replica_key(seed, r), b, Some(a));
            u64::from(t.last().is_some_and(|&k| k >= a))
        })
        .sum();
    Ok(HittingEstimate::from_hits(hits, replicas))
}

/// [`mc_hitting`] for many cells from one path per replica; cell `i` of the
/// result equals `mc_hitting(dist, a_i, b_i, replicas, seed)`.
pub fn mc_hitting_grid(
    dist: &LatticeDistribution<f64>,
    cells: &[(u64, u64)],
    replicas: u64,
    seed: u64,
) -> Result<Vec<HittingEstimate>> {
    let until = cells.iter().map(|c| c.1).max().unwrap_or(0);
    let sampler = prepare(dist, until)?;
    let n = cells.len();
    let counts = (0..replicas)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, r| {
                let mut t = return_times(&sampler, replica_key(seed, r), until, None);
                t.insert(0, 0);
                for (c, &(a, b)) in acc.iter_mut().zip(cells) {
                    let i = t.partition_point(|&k| k < a);
                    if i < t.len() && t[i] < b {
                        *c += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut x, y| {
                for (p, q) in x.iter_mut().zip(y) {
                    *p += q;
                }
                x
            },
        );
    Ok(counts
        .into_iter()
        .map(|h| HittingEstimate::from_hits(h, replicas))
        .collect())
}
