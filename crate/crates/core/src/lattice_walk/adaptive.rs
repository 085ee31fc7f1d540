//! Inductive construction of a schedule whose intervals each carry a
//! planar return with probability at least a target.

use rayon::prelude::*;
use serde::Serialize;

use super::distribution::{LatticeDistribution, MarginalSampler, ProductSampler};
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::schedules::{AdaptiveSchedule, ExplicitSchedule, ScheduleFamily, DEFAULT_CAP};

/// `a_1`.
pub const FIRST_TIME: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveConfig {
    pub levels: usize,
    pub target: f64,
    pub replicas: u64,
    pub seed: u64,
    /// Largest trial horizon.
    pub cap: u64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            target: 0.5,
            replicas: 10_000,
            seed: 0,
            cap: 1 << 16,
        }
    }
}

/// Levels built so far, and why the builder stopped early (if it did).
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveProgress {
    pub values: Vec<u64>,
    pub estimates: Vec<f64>,
    pub failure: Option<Error>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub replicas: u64,
}

impl PlanarEstimate {
    fn from_hits(hits: u64, replicas: u64) -> Self {
        let p = if replicas == 0 { 0.0 } else { hits as f64 / replicas as f64 };
        Self {
            p_hat: p,
            stderr: (p * (1.0 - p) / replicas.max(1) as f64).sqrt(),
            replicas,
        }
    }
}

#[derive(Clone, Copy)]
struct Planar {
    x: i64,
    y: i64,
    hit: bool,
}

/// Advances the first two coordinates of one replica from time `from` to
/// `to`, stopping at the first `k > watch_after` with both at zero. Uses the
/// stream layout of the 3D walk, `(k − 1) · 3 + j`.
fn advance(s: &mut Planar, key: StreamKey, coords: &[MarginalSampler], from: u64, to: u64, watch_after: u64) {
    for k in from + 1..=to {
        let base = (k - 1) * 3;
        s.x += coords[0].sample(key.draw(base));
        s.y += coords[1].sample(key.draw(base + 1));
        if k > watch_after && s.x == 0 && s.y == 0 {
            s.hit = true;
            return;
        }
    }
}

fn check_dist(dist: &LatticeDistribution<f64>) -> Result<ProductSampler> {
    dist.validate()?;
    if dist.dimension() != 3 {
        return Err(Error::param(
            "dist",
            format!("expected a 3D law, got dimension {}", dist.dimension()),
        ));
    }
    Ok(ProductSampler::new(dist))
}

/// Monte Carlo estimate of `P[∃k ∈ (a, b]: (x_k, y_k) = 0]` for the planar
/// projection of `dist`. Replica `r` uses `StreamKey::master(seed).split(r)`.
pub fn estimate_planar_return(
    dist: &LatticeDistribution<f64>,
    a: u64,
    b: u64,
    replicas: u64,
    seed: u64,
) -> Result<PlanarEstimate> {
    let sampler = check_dist(dist)?;
    if b > DEFAULT_CAP {
        return Err(Error::NotMaterializable { index: 0, cap: DEFAULT_CAP });
    }
    let master = StreamKey::master(seed);
    let hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut s = Planar { x: 0, y: 0, hit: false };
            advance(&mut s, master.split(r), &sampler.coords, 0, b, a);
            u64::from(s.hit)
        })
        .sum();
    Ok(PlanarEstimate::from_hits(hits, replicas))
}

/// Runs the builder, keeping the levels that were completed.
///
/// Input errors are returned directly; running out of horizon is reported in
/// [`AdaptiveProgress::failure`].
pub fn build_adaptive_progress(dist: &LatticeDistribution<f64>, cfg: &AdaptiveConfig) -> Result<AdaptiveProgress> {
    let sampler = check_dist(dist)?;
    if cfg.levels == 0 {
        return Err(Error::param("levels", "must be at least 1"));
    }
    if cfg.replicas == 0 {
        return Err(Error::param("replicas", "must be positive"));
    }
    if cfg.target.is_nan() {
        return Err(Error::param("target", "must be a number"));
    }
    if cfg.cap > DEFAULT_CAP {
        return Err(Error::param("cap", format!("must not exceed {DEFAULT_CAP}")));
    }
    let mut values = vec![FIRST_TIME];
    let mut estimates = Vec::new();
    let root = StreamKey::master(cfg.seed);
    for level in 1..=cfg.levels {
        let a = *values.last().unwrap();
        let exceeded = |built: usize| Error::CapExceeded {
            cap: cfg.cap,
            target: cfg.target,
            level,
            built,
        };
        // The hitting probability is below one at every finite horizon.
        if cfg.target >= 1.0 || a >= cfg.cap {
            return Ok(AdaptiveProgress {
                failure: Some(exceeded(values.len())),
                values,
                estimates,
            });
        }
        let level_key = root.split(level as u64);
        let mut states = vec![Planar { x: 0, y: 0, hit: false }; cfg.replicas as usize];
        states.par_iter_mut().enumerate().for_each(|(r, s)| {
            advance(s, level_key.split(r as u64), &sampler.coords, 0, a, u64::MAX);
        });
        let mut t = a;
        let mut step = 1u64;
        let found = loop {
            let horizon = a.saturating_add(step).min(cfg.cap);
            states.par_iter_mut().enumerate().for_each(|(r, s)| {
                if !s.hit {
                    // A replica that already hit stops; the others resume at `t`.
                    advance(s, level_key.split(r as u64), &sampler.coords, t, horizon, a);
                }
            });
            t = horizon;
            let hits = states.iter().filter(|s| s.hit).count() as u64;
            let p = hits as f64 / cfg.replicas as f64;
            if p >= cfg.target {
                break Some((horizon, p));
            }
            if horizon >= cfg.cap {
                break None;
            }
            step = step.saturating_mul(2);
        };
        match found {
            Some((b, p)) => {
                values.push(b);
                estimates.push(p);
            }
            None => {
                return Ok(AdaptiveProgress {
                    failure: Some(exceeded(values.len())),
                    values,
                    estimates,
                })
            }
        }
    }
    Ok(AdaptiveProgress {
        values,
        estimates,
        failure: None,
    })
}

/// `a_1 = 2`; each `a_{n+1}` is the first of `a_n + 1, a_n + 2, a_n + 4, …`
/// at which the estimated planar return probability on `(a_n, a_{n+1}]`
/// reaches `cfg.target`.
pub fn build_adaptive_schedule(dist: &LatticeDistribution<f64>, cfg: &AdaptiveConfig) -> Result<ScheduleFamily<f64>> {
    let progress = build_adaptive_progress(dist, cfg)?;
    if let Some(e) = progress.failure {
        return Err(e);
    }
    Ok(ScheduleFamily::Adaptive(AdaptiveSchedule {
        schedule: ExplicitSchedule::new(progress.values)?,
        target: cfg.target,
        estimates: progress.estimates,
        replicas: cfg.replicas,
        seed: cfg.seed,
    }))
}
