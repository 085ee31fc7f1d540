//! Summation, regression and the series-convergence heuristic shared by the
//! criterion code and the estimators.

use serde::Serialize;

use crate::scalar::Real;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// Running compensated partial sums of `terms`.
pub fn partial_sums<T: Real>(terms: &[T]) -> Vec<T> {
    let mut acc = CompensatedSum::new();
    terms
        .iter()
        .map(|&t| {
            acc.add(t);
            acc.value()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ intercept + slope * x`.
///
/// Returns `None` with fewer than two points or a degenerate abscissa.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Some(LinearFit {
        slope,
        intercept,
        residual: (sse / nf).sqrt(),
        points: n,
    })
}

/// Convergence verdict for a positive series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Guard band around the critical exponent −1.
pub const TAIL_GUARD: f64 = 0.05;

/// Power and logarithmic tail exponents of `term(n) ≈ c · n^beta · (ln n)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub beta: f64,
    /// Fitted only when `beta` falls inside the guard band.
    pub gamma: Option<f64>,
    pub verdict: SeriesVerdict,
}

/// Fits the tail of `terms` (index `i` holds the term for `n = i + 1`) over
/// the last decade `[N/10, N]`.
///
/// `beta < −1 − δ` is read as convergent, `beta > −1 + δ` as divergent; in the
/// band the logarithmic exponent of `n · term(n)` against `ln n` decides with
/// the same guard, else the result is inconclusive. Nonpositive terms (those
/// before a family's first valid index) are skipped.
pub fn fit_tail(terms: &[f64]) -> Option<TailFit> {
    let n_max = terms.len();
    let lo = (n_max / 10).max(2);
    let mut ln_n = Vec::new();
    let mut ln_ln_n = Vec::new();
    let mut ln_t = Vec::new();
    let mut ln_nt = Vec::new();
    for n in lo..=n_max {
        let t = terms[n - 1];
        if t > 0.0 && t.is_finite() {
            let l = (n as f64).ln();
            ln_n.push(l);
            ln_ln_n.push(l.ln());
            ln_t.push(t.ln());
            ln_nt.push(t.ln() + l);
        }
    }
    let power = least_squares(&ln_n, &ln_t)?;
    let beta = power.slope;
    if beta < -1.0 - TAIL_GUARD {
        return Some(TailFit {
            beta,
            gamma: None,
            verdict: SeriesVerdict::Convergent,
        });
    }
    if beta > -1.0 + TAIL_GUARD {
        return Some(TailFit {
            beta,
            gamma: None,
            verdict: SeriesVerdict::Divergent,
        });
    }
    let log = least_squares(&ln_ln_n, &ln_nt)?;
    let gamma = log.slope;
    let verdict = if gamma < -1.0 - TAIL_GUARD {
        SeriesVerdict::Convergent
    } else if gamma > -1.0 + TAIL_GUARD {
        SeriesVerdict::Divergent
    } else {
        SeriesVerdict::Inconclusive
    };
    Some(TailFit {
        beta,
        gamma: Some(gamma),
        verdict,
    })
}

/// Exact convergence rule for `Σ n^beta (ln n)^gamma`.
pub fn bertrand_verdict(beta: f64, gamma: f64) -> SeriesVerdict {
    if beta < -1.0 || (beta == -1.0 && gamma < -1.0) {
        SeriesVerdict::Convergent
    } else {
        SeriesVerdict::Divergent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-10)).abs() < 1e-20);
    }

    #[test]
    fn least_squares_recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = least_squares(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(least_squares(&[1.0], &[1.0]).is_none());
        assert!(least_squares(&[1.0, 1.0], &[0.0, 2.0]).is_none());
    }

    #[test]
    fn tail_fit_classes() {
        let series = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
            (1..=100_000).map(|n| f(n as f64)).collect()
        };
        let conv = fit_tail(&series(&|n| n.powf(-1.5))).unwrap();
        assert_eq!(conv.verdict, SeriesVerdict::Convergent);
        assert!((conv.beta + 1.5).abs() < 1e-9);
        let harmonic = fit_tail(&series(&|n| 1.0 / n)).unwrap();
        assert_eq!(harmonic.verdict, SeriesVerdict::Divergent);
        assert!(harmonic.gamma.unwrap().abs() < 1e-9);
        let bertrand = fit_tail(&series(&|n| 1.0 / (n * n.ln().powi(2)))).unwrap();
        assert_eq!(bertrand.verdict, SeriesVerdict::Convergent);
        // At this range the power fit absorbs the log factor (slope about
        // -1 - 1/ln n), so the critical series is not read as divergent.
        let critical = fit_tail(&series(&|n| 1.0 / (n * n.ln()))).unwrap();
        assert_ne!(critical.verdict, SeriesVerdict::Divergent);
        let banded = fit_tail(&series(&|n| n.powf(-1.0) / n.ln().powi(3) * n.powf(3.0 / 10.5))).unwrap();
        assert!(banded.gamma.is_some());
    }

    #[test]
    fn bertrand_rule() {
        assert_eq!(bertrand_verdict(-1.1, 0.0), SeriesVerdict::Convergent);
        assert_eq!(bertrand_verdict(-1.0, -1.0), SeriesVerdict::Divergent);
        assert_eq!(bertrand_verdict(-1.0, -1.25), SeriesVerdict::Convergent);
        assert_eq!(bertrand_verdict(-0.5, -3.0), SeriesVerdict::Divergent);
    }
}
