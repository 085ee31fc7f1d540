use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Scalar};

const PMF_TOLERANCE: f64 = 1e-12;

/// A finitely supported pmf on `Z`, stored sorted by offset with strictly
/// positive masses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginal<T> {
    support: Vec<(i64, T)>,
}

impl<T: Scalar> Marginal<T> {
    /// Zero-mass entries are dropped and repeated offsets merged.
    pub fn new(mut entries: Vec<(i64, T)>) -> Result<Self> {
        if entries.iter().any(|(_, p)| *p < T::zero()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        entries.retain(|(_, p)| *p != T::zero());
        entries.sort_by_key(|(o, _)| *o);
        let mut support: Vec<(i64, T)> = Vec::with_capacity(entries.len());
        for (o, p) in entries {
            match support.last_mut() {
                Some((lo, lp)) if *lo == o => *lp = lp.clone() + p,
                _ => support.push((o, p)),
            }
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        Ok(Self { support })
    }

    /// Fair ±1 steps.
    pub fn simple() -> Self {
        let half = T::one() / (T::one() + T::one());
        Self {
            support: vec![(-1, half.clone()), (1, half)],
        }
    }

    /// `{−1: 1/4, 0: 1/2, +1: 1/4}`.
    pub fn lazy() -> Self {
        let two = T::one() + T::one();
        let half = T::one() / two.clone();
        let quarter = half.clone() / two;
        Self {
            support: vec![(-1, quarter.clone()), (0, half), (1, quarter)],
        }
    }

    pub fn support(&self) -> &[(i64, T)] {
        &self.support
    }

    pub fn max_abs_offset(&self) -> i64 {
        self.support.iter().map(|(o, _)| o.abs()).max().unwrap_or(0)
    }

    pub fn total_mass(&self) -> T {
        self.support
            .iter()
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .map(|(o, p)| *o as f64 * to_f64(p))
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support
            .iter()
            .map(|(o, p)| (*o as f64 - m).powi(2) * to_f64(p))
            .sum()
    }

    /// Period of the return times of the walk on the lattice its support
    /// generates: with `g = gcd{s − s_0}`, returns are possible only at
    /// times that are multiples of `g / gcd(g, |s_0|)`.
    pub fn period(&self) -> u64 {
        let s0 = self.support[0].0;
        let g = self
            .support
            .iter()
            .fold(0u64, |g, (o, _)| gcd(g, (o - s0).unsigned_abs()));
        if g == 0 {
            return 1;
        }
        g / gcd(g, s0.unsigned_abs())
    }

    /// `(1 − hold) · self + hold · δ_0`.
    pub fn lazify(&self, hold: T) -> Result<Self> {
        if !(hold > T::zero() && hold < T::one()) {
            return Err(Error::param("hold", "must lie in (0, 1)"));
        }
        let keep = T::one() - hold.clone();
        let mut entries: Vec<(i64, T)> = self
            .support
            .iter()
            .map(|(o, p)| (*o, keep.clone() * p.clone()))
            .collect();
        entries.push((0, hold));
        Self::new(entries)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Product law on `Z^D`: coordinate `j` moves according to `marginals[j]`,
/// independently of the others.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeDistribution<T> {
    marginals: Vec<Marginal<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dimension: usize,
    pub periods: Vec<u64>,
    /// Period of returns to the origin of the joint walk.
    pub joint_period: u64,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_aperiodic(&self) -> bool {
        self.joint_period == 1
    }
}

impl<T: Scalar> LatticeDistribution<T> {
    pub fn new(marginals: Vec<Marginal<T>>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidDistribution("dimension must be >= 1".into()));
        }
        Ok(Self { marginals })
    }

    pub fn product_of(marginal: Marginal<T>, dimension: usize) -> Result<Self> {
        Self::new(vec![marginal; dimension])
    }

    /// Fair ±1 marginals in every coordinate.
    pub fn simple(dimension: usize) -> Result<Self> {
        Self::product_of(Marginal::simple(), dimension)
    }

    /// Lazy ±1 marginals (hold 1/2) in every coordinate.
    pub fn lazy(dimension: usize) -> Result<Self> {
        Self::product_of(Marginal::lazy(), dimension)
    }

    pub fn dimension(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal<T>] {
        &self.marginals
    }

    pub fn marginal(&self, j: usize) -> &Marginal<T> {
        &self.marginals[j]
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let mut periods = Vec::with_capacity(self.marginals.len());
        let mut warnings = Vec::new();
        for (j, m) in self.marginals.iter().enumerate() {
            let mass = to_f64(&m.total_mass());
            if (mass - 1.0).abs() > PMF_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "marginal {j}: probabilities sum to {mass}"
                )));
            }
            let mean = m.mean();
            if mean.abs() > PMF_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "marginal {j}: mean {mean} != 0"
                )));
            }
            if m.support.len() < 2 {
                return Err(Error::InvalidDistribution(format!(
                    "marginal {j}: degenerate (support size {})",
                    m.support.len()
                )));
            }
            let p = m.period();
            if p > 1 {
                warnings.push(format!("marginal {j} is periodic with period {p}"));
            }
            periods.push(p);
        }
        let joint_period = periods.iter().fold(1, |acc, &p| lcm(acc, p));
        Ok(ValidationReport {
            dimension: self.marginals.len(),
            periods,
            joint_period,
            warnings,
        })
    }

    pub fn lazify(&self, hold: T) -> Result<Self> {
        let marginals = self
            .marginals
            .iter()
            .map(|m| m.lazify(hold.clone()))
            .collect::<Result<_>>()?;
        Ok(Self { marginals })
    }

    /// Law of the first `d` coordinates.
    pub fn project(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.marginals.len() {
            return Err(Error::param(
                "d",
                format!("projection dimension {d} outside 1..={}", self.marginals.len()),
            ));
        }
        Ok(Self {
            marginals: self.marginals[..d].to_vec(),
        })
    }
}

pub fn validate<T: Scalar>(dist: &LatticeDistribution<T>) -> Result<ValidationReport> {
    dist.validate()
}

pub fn lazify<T: Scalar>(dist: &LatticeDistribution<T>, hold: T) -> Result<LatticeDistribution<T>> {
    dist.lazify(hold)
}

pub fn project<T: Scalar>(dist: &LatticeDistribution<T>, d: usize) -> Result<LatticeDistribution<T>> {
    dist.project(d)
}

/// Inverse-CDF sampler over 64-bit words.
#[derive(Debug, Clone)]
pub(crate) struct MarginalSampler {
    thresholds: Vec<u64>,
    offsets: Vec<i64>,
}

impl MarginalSampler {
    pub(crate) fn new(m: &Marginal<f64>) -> Self {
        let total: f64 = m.support.iter().map(|(_, p)| p).sum();
        let scale = 2f64.powi(64);
        let mut acc = 0.0;
        let mut thresholds = Vec::with_capacity(m.support.len());
        let mut offsets = Vec::with_capacity(m.support.len());
        for (i, (o, p)) in m.support.iter().enumerate() {
            acc += p / total;
            let t = if i + 1 == m.support.len() {
                u64::MAX
            } else {
                // saturating float-to-int cast
                (acc * scale) as u64
            };
            thresholds.push(t);
            offsets.push(*o);
        }
        Self { thresholds, offsets }
    }

    #[inline(always)]
    pub(crate) fn sample(&self, word: u64) -> i64 {
        for (t, o) in self.thresholds.iter().zip(&self.offsets) {
            if word < *t {
                return *o;
            }
        }
        *self.offsets.last().unwrap()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ProductSampler {
    pub(crate) coords: Vec<MarginalSampler>,
}

impl ProductSampler {
    pub(crate) fn new(dist: &LatticeDistribution<f64>) -> Self {
        Self {
            coords: dist.marginals.iter().map(MarginalSampler::new).collect(),
        }
    }
}
