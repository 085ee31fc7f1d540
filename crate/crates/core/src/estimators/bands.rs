//! Return-probability exponents and hitting-probability bands from exact
//! programmes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::dp::{exact_hitting_dp, return_prob_series};
use crate::error::{Error, Result};
use crate::lattice_walk::LatticeDistribution;
use crate::numeric::least_squares;

/// Points on the geometric fitting grid.
pub const LCLT_GRID_POINTS: usize = 17;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcltFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub period: u64,
    pub ks: Vec<u64>,
    pub probs: Vec<f64>,
}

/// Geometric grid on `[k_min, k_max]`, snapped to multiples of `period`.
pub fn lclt_grid(k_min: u64, k_max: u64, period: u64) -> Vec<u64> {
    let ratio = (k_max as f64 / k_min as f64).powf(1.0 / (LCLT_GRID_POINTS - 1) as f64);
    let mut ks: Vec<u64> = (0..LCLT_GRID_POINTS)
        .map(|i| {
            let k = (k_min as f64 * ratio.powi(i as i32)).round() as u64;
            let up = k.div_ceil(period) * period;
            if up <= k_max {
                up
            } else {
                k / period * period
            }
        })
        .filter(|&k| k >= k_min)
        .collect();
    ks.dedup();
    ks
}

/// Least-squares slope of `ln P[S_k = 0]` against `ln k` on a geometric grid.
///
/// Periodic laws are sampled on multiples of their period.
pub fn lclt_exponent_fit(dist: &LatticeDistribution<f64>, k_min: u64, k_max: u64) -> Result<LcltFit> {
    let report = dist.validate()?;
    if k_min < 16 {
        return Err(Error::param("k_min", format!("must be at least 16, got {k_min}")));
    }
    if k_max <= k_min {
        return Err(Error::param("k_max", "must exceed k_min"));
    }
    let period = report.joint_period;
    let ks = lclt_grid(k_min, k_max, period);
    let mut probs = vec![1.0; ks.len()];
    for m in dist.marginals() {
        let series = return_prob_series(m, k_max)?;
        for (p, &k) in probs.iter_mut().zip(&ks) {
            *p *= series[k as usize];
        }
    }
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
    let fit = least_squares(&xs, &ys).ok_or_else(|| Error::param("k_min, k_max", "grid too small"))?;
    Ok(LcltFit {
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        period,
        ks,
        probs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCell {
    pub a: u64,
    pub b: u64,
    pub p_exact: f64,
    pub reference: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundBandReport {
    pub dimension: usize,
    pub cells: Vec<BandCell>,
    /// 2D cells with `b <= 2a`, left out of the band.
    pub excluded: Vec<(u64, u64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl BoundBandReport {
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

/// `sqrt((b − a) / b)` in 1D, `ln(b/a) / ln b` in 2D.
pub fn band_reference(dimension: usize, a: u64, b: u64) -> f64 {
    let (a, b) = (a as f64, b as f64);
    if dimension == 1 {
        ((b - a) / b).sqrt()
    } else {
        (b / a).ln() / b.ln()
    }
}

/// Ratios of the exact hitting probability of `[a, b)` to the reference
/// shape over a grid. Cells sharing `a` share one programme.
pub fn bound_band_scan(dist: &LatticeDistribution<f64>, dimension: usize, cells: &[(u64, u64)]) -> Result<BoundBandReport> {
    dist.validate()?;
    if !(dimension == 1 || dimension == 2) || dist.dimension() != dimension {
        return Err(Error::param(
            "dimension",
            format!("need 1 or 2 matching the law, got {dimension} for a {}D law", dist.dimension()),
        ));
    }
    let mut excluded = Vec::new();
    let mut groups: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &(a, b) in cells {
        if a == 0 || b <= a || b < 2 {
            return Err(Error::param("grid", format!("cell ({a}, {b}) needs 0 < a < b, b >= 2")));
        }
        if dimension == 2 && b <= 2 * a {
            excluded.push((a, b));
            continue;
        }
        groups.entry(a).or_default().push(b);
    }
    let grouped: Vec<(u64, Vec<u64>)> = groups.into_iter().collect();
    let results: Vec<Result<Vec<BandCell>>> = grouped
        .par_iter()
        .map(|(a, bs)| {
            let b_max = *bs.iter().max().unwrap();
            let dp = exact_hitting_dp(dist, *a, b_max, None)?;
            let mut cum = Vec::with_capacity(dp.first_hit.len() + 1);
            let mut acc = 0.0;
            cum.push(0.0);
            for p in &dp.first_hit {
                acc += p;
                cum.push(acc);
            }
            Ok(bs
                .iter()
                .map(|&b| {
                    let p = cum[(b - a) as usize];
                    let reference = band_reference(dimension, *a, b);
                    BandCell {
                        a: *a,
                        b,
                        p_exact: p,
                        reference,
                        ratio: p / reference,
                    }
                })
                .collect())
        })
        .collect();
    let mut by_cell = BTreeMap::new();
    for r in results {
        for c in r? {
            by_cell.insert((c.a, c.b), c);
        }
    }
    // keep the caller's order
    let out: Vec<BandCell> = cells
        .iter()
        .filter_map(|k| by_cell.get(k).copied())
        .collect();
    let min_ratio = out.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = out.iter().map(|c| c.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundBandReport {
        dimension,
        cells: out,
        excluded,
        min_ratio,
        max_ratio,
    })
}

/// `b = a + round(f · a)` for every `a` and `f`.
pub fn ratio_grid(starts: &[u64], factors: &[f64]) -> Vec<(u64, u64)> {
    starts
        .iter()
        .flat_map(|&a| factors.iter().map(move |&f| (a, a + (f * a as f64).round() as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_respects_period_and_range() {
        let g = lclt_grid(64, 4096, 2);
        assert!(g.iter().all(|k| k % 2 == 0 && (64..=4096).contains(k)));
        assert_eq!(g[0], 64);
        assert_eq!(*g.last().unwrap(), 4096);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lclt_slopes() {
        let one = lclt_exponent_fit(&LatticeDistribution::lazy(1).unwrap(), 64, 4096).unwrap();
        assert!((one.slope + 0.5).abs() < 0.03, "{}", one.slope);
        let periodic = lclt_exponent_fit(&LatticeDistribution::simple(1).unwrap(), 64, 4096).unwrap();
        assert_eq!(periodic.period, 2);
        assert!((periodic.slope + 0.5).abs() < 0.03);
        assert!(lclt_exponent_fit(&LatticeDistribution::lazy(1).unwrap(), 8, 64).is_err());
    }

    #[test]
    fn degenerate_cell_after_lazification() {
        let dist = LatticeDistribution::simple(1).unwrap().lazify(0.5).unwrap();
        let r = bound_band_scan(&dist, 1, &[(64, 65)]).unwrap();
        assert!(r.cells[0].ratio > 0.0 && r.cells[0].ratio.is_finite());
    }

    #[test]
    fn planar_cells_need_wide_intervals() {
        let dist = LatticeDistribution::lazy(2).unwrap();
        let r = bound_band_scan(&dist, 2, &[(8, 12), (8, 24), (16, 40)]).unwrap();
        assert_eq!(r.excluded, vec![(8, 12)]);
        assert_eq!(r.cells.len(), 2);
        assert!(r.max_ratio.is_finite() && r.min_ratio > 0.0);
    }

    #[test]
    fn scan_matches_direct_programme() {
        let dist = LatticeDistribution::lazy(1).unwrap();
        let r = bound_band_scan(&dist, 1, &[(16, 20), (16, 64), (32, 40)]).unwrap();
        for c in &r.cells {
            let direct = exact_hitting_dp(&dist, c.a, c.b, None).unwrap().value;
            assert!((c.p_exact - direct).abs() < 1e-12);
        }
    }
}
