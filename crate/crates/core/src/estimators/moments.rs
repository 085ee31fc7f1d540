//! Exact interval expectations for walks in varying dimension and the
//! second-moment ratio of the interval return indicators.

use rayon::prelude::*;
use serde::Serialize;

use super::dp::{exact_hitting_dp, return_prob_series};
use crate::criteria::WalkKind;
use crate::error::{Error, Result};
use crate::lattice_walk::{LatticeDistribution, VaryingWalk, Walk};
use crate::rng::replica_key;
use crate::scalar::Scalar;
use crate::schedules::{ScheduleFamily, DEFAULT_CAP};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedReturns {
    /// Expected returns at `1 <= k < a_1`.
    pub before_first: f64,
    /// Entry `i`: expected returns at `a_{i+1} <= k < a_{i+2}`, cut at the
    /// horizon.
    pub per_interval: Vec<f64>,
}

/// Exact expected return counts per interval of the varying-dimension walk.
///
/// With coordinates independent, a time `k` in interval `n` contributes
/// `prod_{j >= d} P[X^j_n = 0] · prod_{j < d} P[X^j_k = 0]`.
pub fn rwvd_expected_returns(
    dist: &LatticeDistribution<f64>,
    low_dim: usize,
    times: &[u64],
    horizon: u64,
) -> Result<ExpectedReturns> {
    dist.validate()?;
    if low_dim == 0 || low_dim > dist.dimension() {
        return Err(Error::param("low_dim", "need 1 <= d <= D"));
    }
    let times: Vec<u64> = times.iter().copied().take_while(|&t| t <= horizon).collect();
    let low: Vec<Vec<f64>> = dist.marginals()[..low_dim]
        .iter()
        .map(|m| return_prob_series(m, horizon))
        .collect::<Result<_>>()?;
    let high: Vec<Vec<f64>> = dist.marginals()[low_dim..]
        .iter()
        .map(|m| return_prob_series(m, times.len() as u64))
        .collect::<Result<_>>()?;
    let low_at = |k: u64| low.iter().map(|s| s[k as usize]).product::<f64>();
    let span = |from: u64, to: u64| (from..to).map(low_at).sum::<f64>();
    let first = times.first().copied().unwrap_or(horizon + 1);
    let before_first = span(1, first);
    let per_interval = times
        .iter()
        .enumerate()
        .map(|(i, &start)| {
            let end = times.get(i + 1).copied().unwrap_or(horizon + 1);
            let frozen: f64 = high.iter().map(|s| s[i + 1]).product();
            frozen * span(start, end)
        })
        .collect();
    Ok(ExpectedReturns {
        before_first,
        per_interval,
    })
}

/// Exact `P[the walk visits the origin during [a_n, a_{n+1})]`, `n >= 1`.
///
/// The high coordinates are frozen over the interval after `n` moves, so
/// the probability factors into their return probability and a hitting
/// probability of the `d`-dimensional projection.
pub fn rwvd_interval_hit_prob(dist: &LatticeDistribution<f64>, low_dim: usize, times: &[u64], n: usize) -> Result<f64> {
    if n == 0 || n >= times.len() {
        return Err(Error::param("n", format!("need 1 <= n < {}", times.len())));
    }
    let projected = dist.project(low_dim)?;
    let hit = exact_hitting_dp(&projected, times[n - 1], times[n], None)?.value;
    let frozen: f64 = dist.marginals()[low_dim..]
        .iter()
        .map(|m| return_prob_series(m, n as u64).map(|s| s[n]))
        .product::<Result<f64>>()?;
    Ok(frozen * hit)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondMomentReport {
    /// `E[X^2] / E[X]^2` with `X = sum_{n <= M} I_n`.
    pub ratio: f64,
    pub mean: f64,
    pub mean_square: f64,
    /// `a_1, …, a_{M+1}`.
    pub times: Vec<u64>,
    /// `a_{n+1} >= 2 a_n`.
    pub eligible: Vec<bool>,
    /// Empirical `E I_n`.
    pub indicator_means: Vec<f64>,
    pub replicas: u64,
    pub seed: u64,
}

/// Monte Carlo estimate of the second-moment ratio of
/// `I_n = 1{a_{n+1} >= 2 a_n and a return in [a_n, a_{n+1} − 1]}`.
pub fn second_moment_ratio(
    kind: WalkKind,
    dist: &LatticeDistribution<f64>,
    family: &ScheduleFamily<f64>,
    m: usize,
    replicas: u64,
    seed: u64,
) -> Result<SecondMomentReport> {
    let (low, full) = kind
        .dims()
        .ok_or_else(|| Error::param("kind", "needs a varying-dimension walk"))?;
    if dist.dimension() != full {
        return Err(Error::param(
            "dist",
            format!("{kind:?} needs a {full}D law, got {}D", dist.dimension()),
        ));
    }
    if m == 0 {
        return Err(Error::param("m", "must be at least 1"));
    }
    let times = (1..=m as u64 + 1)
        .map(|n| family.materialize(n, DEFAULT_CAP))
        .collect::<Result<Vec<u64>>>()?;
    let eligible: Vec<bool> = times.windows(2).map(|w| w[1] >= 2 * w[0]).collect();
    if !eligible.iter().any(|&e| e) {
        return Err(Error::Undefined);
    }
    let horizon = times[m] - 1;
    let explicit = ScheduleFamily::Explicit(crate::schedules::ExplicitSchedule::new(times.clone())?);
    let walk = VaryingWalk::new(dist, low, &explicit, horizon)?;
    let zero = || (0u64, 0u64, vec![0u64; m]);
    let (sum, sum_sq, per) = (0..replicas)
        .into_par_iter()
        .fold(zero, |(s, s2, mut per), r| {
            let out = walk.run(replica_key(seed, r), false);
            let mut x = 0u64;
            for (i, c) in out.per_interval_counts.iter().take(m).enumerate() {
                if eligible[i] && *c > 0 {
                    x += 1;
                    per[i] += 1;
                }
            }
            (s + x, s2 + x * x, per)
        })
        .reduce(zero, |a, b| {
            let per = a.2.iter().zip(&b.2).map(|(x, y)| x + y).collect();
            (a.0 + b.0, a.1 + b.1, per)
        });
    if sum == 0 {
        return Err(Error::Undefined);
    }
    let r = replicas as f64;
    let mean = sum as f64 / r;
    let mean_square = sum_sq as f64 / r;
    Ok(SecondMomentReport {
        ratio: mean_square / (mean * mean),
        mean,
        mean_square,
        times,
        eligible,
        indicator_means: per.iter().map(|&c| c as f64 / r).collect(),
        replicas,
        seed,
    })
}

/// Both sides of the first-visit decomposition on `[a, b)` for a 1D law:
/// `sum_{a <= k < b} P[S_k = 0]` and `sum_t P[T = t] U(b − t)`, where `T` is
/// the first visit at or after `a` and `U(m) = sum_{j < m} P[S_j = 0]`.
pub fn renewal_identity_sides<T: Scalar>(dist: &LatticeDistribution<T>, a: u64, b: u64) -> Result<(T, T)> {
    if dist.dimension() != 1 {
        return Err(Error::param("dist", "expected a 1D law"));
    }
    let series = return_prob_series(dist.marginal(0), b)?;
    let lhs = series[a as usize..b as usize]
        .iter()
        .fold(T::zero(), |acc, p| acc + p.clone());
    let mut green = Vec::with_capacity((b - a) as usize + 1);
    green.push(T::zero());
    for j in 0..(b - a) as usize {
        let next = green[j].clone() + series[j].clone();
        green.push(next);
    }
    let dp = exact_hitting_dp(dist, a, b, None)?;
    let rhs = dp
        .first_hit
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, p)| {
            let t = a as usize + i;
            acc + p.clone() * green[b as usize - t].clone()
        });
    Ok((lhs, rhs))
}
