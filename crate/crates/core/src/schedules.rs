//! Schedule families `{a_n}` and the criterion quantities built on them.
//!
//! Analytic families are never evaluated as integers unless a simulation
//! needs concrete step indices. Everything else works from
//! `L(n) = ln a_n` and, where `L` itself would overflow, from
//! `ln L(n)`: `phi(n) = 1 − L(n)/L(n+1)` only depends on the gap
//! `ln L(n+1) − ln L(n)`, which every analytic family supplies in closed
//! form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default materialization cap, `2^53`.
pub const DEFAULT_CAP: u64 = 1 << 53;

/// Absolute tolerance used when scanning for monotonicity violations.
pub const MONOTONE_TOLERANCE: f64 = 1e-12;

/// A strictly increasing list of integers, all `>= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExplicitSchedule {
    values: Vec<u64>,
}

impl ExplicitSchedule {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("values", "empty schedule"));
        }
        if values[0] < 2 {
            return Err(Error::param("values", format!("a_1 = {} < 2", values[0])));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "values",
                format!(
                    "not strictly increasing at n = {} ({} then {})",
                    i + 1,
                    values[i],
                    values[i + 1]
                ),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn get(&self, n: u64) -> Result<u64> {
        if n == 0 || n as usize > self.values.len() {
            return Err(Error::IndexOutOfDomain {
                index: n,
                first: 1,
                last: Some(self.values.len() as u64),
            });
        }
        Ok(self.values[n as usize - 1])
    }
}

/// Output of the adaptive builder: the schedule plus the Monte Carlo
/// estimate that justified each interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveSchedule {
    pub schedule: ExplicitSchedule,
    pub target: f64,
    /// `estimates[i]` belongs to the interval `(a_{i+1}, a_{i+2}]`.
    pub estimates: Vec<f64>,
    pub replicas: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ScheduleFamily<T> {
    /// `a_n = exp(e^{sqrt n})`.
    DoubleExpSqrt,
    /// `a_n = exp(e^{n^theta})`, `0 < theta < 1`.
    DoubleExpTheta { theta: T },
    /// `a_n = exp(e^n)`.
    SingleExp,
    /// `a_n = exp(n / ln^alpha n)`, defined from the first `n` with
    /// `ln n > alpha + 1` (where `L` becomes increasing and concave).
    ExpPolyLog { alpha: T },
    /// `a_n = r^n`, `r > 1`.
    Geometric { ratio: T },
    /// `a_n = n^p`, `p >= 1`, defined from `n = 2`.
    PowerLaw { power: T },
    Explicit(ExplicitSchedule),
    Adaptive(AdaptiveSchedule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiKind {
    Phi,
    Phi1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiReport<T> {
    pub n: u64,
    pub value: T,
    pub kind: PhiKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonotoneReport {
    pub nonincreasing: bool,
    pub first_violation: Option<u64>,
}

impl<T: Real> ScheduleFamily<T> {
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        match self {
            ScheduleFamily::DoubleExpTheta { theta } => {
                if !(*theta > zero && *theta < one) {
                    return Err(Error::param("theta", "must lie in (0, 1)"));
                }
            }
            ScheduleFamily::ExpPolyLog { alpha } => {
                if !(*alpha > zero) || !alpha.is_finite() {
                    return Err(Error::param("alpha", "must be a finite real > 0"));
                }
            }
            ScheduleFamily::Geometric { ratio } => {
                if !(*ratio > one) || !ratio.is_finite() {
                    return Err(Error::param("ratio", "must be a finite real > 1"));
                }
            }
            ScheduleFamily::PowerLaw { power } => {
                if !(*power >= one) || !power.is_finite() {
                    return Err(Error::param("power", "must be a finite real >= 1"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn explicit(&self) -> Option<&ExplicitSchedule> {
        match self {
            ScheduleFamily::Explicit(s) => Some(s),
            ScheduleFamily::Adaptive(a) => Some(&a.schedule),
            _ => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        self.explicit().is_none()
    }

    /// Smallest index at which the family is defined.
    pub fn first_index(&self) -> u64 {
        match self {
            ScheduleFamily::PowerLaw { .. } => 2,
            ScheduleFamily::ExpPolyLog { alpha } => {
                let e = (alpha.to_f64().unwrap_or(f64::INFINITY) + 1.0).exp();
                e.floor() as u64 + 1
            }
            _ => 1,
        }
    }

    /// Largest index at which `a_n` is known, `None` for analytic families.
    pub fn last_index(&self) -> Option<u64> {
        self.explicit().map(|s| s.len() as u64)
    }

    fn check_index(&self, n: u64) -> Result<()> {
        let first = self.first_index();
        let last = self.last_index();
        if n < first || last.is_some_and(|l| n > l) {
            return Err(Error::IndexOutOfDomain {
                index: n,
                first,
                last,
            });
        }
        Ok(())
    }

    /// `ln L(n) = ln ln a_n`.
    pub fn log_log(&self, n: u64) -> Result<T> {
        self.validate()?;
        self.check_index(n)?;
        let x = T::from_u64_lossy(n);
        Ok(match self {
            ScheduleFamily::DoubleExpSqrt => x.sqrt(),
            ScheduleFamily::DoubleExpTheta { theta } => x.powf(*theta),
            ScheduleFamily::SingleExp => x,
            ScheduleFamily::ExpPolyLog { alpha } => x.ln() - *alpha * x.ln().ln(),
            ScheduleFamily::Geometric { ratio } => x.ln() + ratio.ln().ln(),
            ScheduleFamily::PowerLaw { power } => power.ln() + x.ln().ln(),
            ScheduleFamily::Explicit(_) | ScheduleFamily::Adaptive(_) => {
                let a = self.explicit().unwrap().get(n)?;
                T::from_u64_lossy(a).ln().ln()
            }
        })
    }

    /// `ln L(n+1) − ln L(n)`, evaluated without cancellation.
    fn log_log_gap(&self, n: u64) -> Result<T> {
        self.validate()?;
        self.check_index(n)?;
        self.check_index(n + 1)?;
        let x = T::from_u64_lossy(n);
        let one = T::one();
        let inv = one / x;
        Ok(match self {
            ScheduleFamily::DoubleExpSqrt => one / ((x + one).sqrt() + x.sqrt()),
            ScheduleFamily::DoubleExpTheta { theta } => {
                x.powf(*theta) * (*theta * inv.ln_1p()).exp_m1()
            }
            ScheduleFamily::SingleExp => one,
            ScheduleFamily::ExpPolyLog { alpha } => {
                inv.ln_1p() - *alpha * (inv.ln_1p() / x.ln()).ln_1p()
            }
            ScheduleFamily::Geometric { .. } => inv.ln_1p(),
            ScheduleFamily::PowerLaw { .. } => (inv.ln_1p() / x.ln()).ln_1p(),
            ScheduleFamily::Explicit(_) | ScheduleFamily::Adaptive(_) => {
                self.log_log(n + 1)? - self.log_log(n)?
            }
        })
    }

    /// `L(n) = ln a_n`.
    pub fn eval_log(&self, n: u64) -> Result<T> {
        if let Some(s) = self.explicit() {
            self.check_index(n)?;
            return Ok(T::from_u64_lossy(s.get(n)?).ln());
        }
        let l = self.log_log(n)?.exp();
        if !l.is_finite() {
            return Err(Error::Overflow { index: n });
        }
        Ok(l)
    }

    /// `phi(n) = ln(a_{n+1}/a_n) / ln a_{n+1}`.
    pub fn phi(&self, n: u64) -> Result<T> {
        if let Some(s) = self.explicit() {
            self.check_index(n + 1)?;
            let (lo, hi) = (s.get(n)?, s.get(n + 1)?);
            let ratio_log = (T::from_u64_lossy(hi - lo) / T::from_u64_lossy(lo)).ln_1p();
            return Ok(ratio_log / T::from_u64_lossy(hi).ln());
        }
        Ok(-(-self.log_log_gap(n)?).exp_m1())
    }

    /// `phi1(n) = sqrt((a_{n+1} − a_n) / a_{n+1})`.
    pub fn phi1(&self, n: u64) -> Result<T> {
        if let Some(s) = self.explicit() {
            self.check_index(n + 1)?;
            let (lo, hi) = (s.get(n)?, s.get(n + 1)?);
            return Ok((T::from_u64_lossy(hi - lo) / T::from_u64_lossy(hi)).sqrt());
        }
        // Overflow of the growth to +inf gives phi1 = 1.
        let delta = self.log_growth(n)?;
        Ok((-(-delta).exp_m1()).sqrt())
    }

    /// `L(n+1) − L(n) = ln(a_{n+1}/a_n)`; may be `+inf` where `L` overflows.
    pub fn log_growth(&self, n: u64) -> Result<T> {
        if let Some(s) = self.explicit() {
            self.check_index(n + 1)?;
            let (lo, hi) = (s.get(n)?, s.get(n + 1)?);
            return Ok((T::from_u64_lossy(hi - lo) / T::from_u64_lossy(lo)).ln_1p());
        }
        Ok(self.log_log(n + 1)?.exp() * self.phi(n)?)
    }

    pub fn phi_kind(&self, kind: PhiKind, n: u64) -> Result<T> {
        match kind {
            PhiKind::Phi => self.phi(n),
            PhiKind::Phi1 => self.phi1(n),
        }
    }

    pub fn report(&self, kind: PhiKind, n: u64) -> Result<PhiReport<T>> {
        Ok(PhiReport {
            n,
            value: self.phi_kind(kind, n)?,
            kind,
        })
    }

    /// `round(exp(L(n)))` for analytic families, the stored value otherwise.
    ///
    /// Rounding is made strictly increasing by bumping a value that would
    /// not exceed its predecessor; the whole prefix is therefore evaluated,
    /// at cost linear in `n`.
    pub fn materialize(&self, n: u64, cap: u64) -> Result<u64> {
        if let Some(s) = self.explicit() {
            let v = s.get(n)?;
            if v > cap {
                return Err(Error::NotMaterializable { index: n, cap });
            }
            return Ok(v);
        }
        self.check_index(n)?;
        let mut prev = 1u64;
        for m in self.first_index()..=n {
            prev = self.materialize_step(m, prev, cap)?;
        }
        Ok(prev)
    }

    fn materialize_step(&self, m: u64, prev: u64, cap: u64) -> Result<u64> {
        let l = self
            .eval_log(m)
            .map_err(|_| Error::NotMaterializable { index: m, cap })?;
        let real = l.exp();
        let cap_t = T::from_u64_lossy(cap);
        if !(real <= cap_t) {
            return Err(Error::NotMaterializable { index: m, cap });
        }
        let rounded = real.round().to_u64().unwrap_or(u64::MAX);
        let v = rounded.max(prev + 1);
        if v > cap {
            return Err(Error::NotMaterializable { index: m, cap });
        }
        Ok(v)
    }

    /// Every `a_n <= limit`, in order. `limit` must not exceed `cap`.
    pub fn materialize_up_to(&self, limit: u64, cap: u64) -> Result<Vec<u64>> {
        if limit > cap {
            return Err(Error::NotMaterializable { index: 0, cap });
        }
        if let Some(s) = self.explicit() {
            return Ok(s.values().iter().copied().take_while(|&v| v <= limit).collect());
        }
        self.validate()?;
        let mut out = Vec::new();
        let mut prev = 1u64;
        let mut m = self.first_index();
        loop {
            match self.materialize_step(m, prev, cap) {
                Ok(v) if v <= limit => {
                    out.push(v);
                    prev = v;
                    m += 1;
                }
                Ok(_) | Err(Error::NotMaterializable { .. }) => return Ok(out),
                Err(e) => return Err(e),
            }
        }
    }

    /// Asymptotic form `phi_kind(n) ≈ c · n^beta · (ln n)^gamma`, when known.
    pub fn phi_asymptotics(&self, kind: PhiKind) -> Option<(f64, f64)> {
        let f = |x: &T| x.to_f64().unwrap_or(f64::NAN);
        match (self, kind) {
            (ScheduleFamily::DoubleExpSqrt, PhiKind::Phi) => Some((-0.5, 0.0)),
            (ScheduleFamily::DoubleExpTheta { theta }, PhiKind::Phi) => Some((f(theta) - 1.0, 0.0)),
            (ScheduleFamily::SingleExp, PhiKind::Phi) => Some((0.0, 0.0)),
            (ScheduleFamily::ExpPolyLog { .. }, PhiKind::Phi) => Some((-1.0, 0.0)),
            (ScheduleFamily::Geometric { .. }, PhiKind::Phi) => Some((-1.0, 0.0)),
            (ScheduleFamily::PowerLaw { .. }, PhiKind::Phi) => Some((-1.0, -1.0)),
            // a_{n+1}/a_n → ∞, so phi1 → 1.
            (
                ScheduleFamily::DoubleExpSqrt
                | ScheduleFamily::DoubleExpTheta { .. }
                | ScheduleFamily::SingleExp,
                PhiKind::Phi1,
            ) => Some((0.0, 0.0)),
            (ScheduleFamily::ExpPolyLog { alpha }, PhiKind::Phi1) => Some((0.0, -f(alpha) / 2.0)),
            (ScheduleFamily::Geometric { .. }, PhiKind::Phi1) => Some((0.0, 0.0)),
            (ScheduleFamily::PowerLaw { .. }, PhiKind::Phi1) => Some((-0.5, 0.0)),
            (ScheduleFamily::Explicit(_) | ScheduleFamily::Adaptive(_), _) => None,
        }
    }
}

pub fn eval_log<T: Real>(family: &ScheduleFamily<T>, n: u64) -> Result<T> {
    family.eval_log(n)
}

pub fn materialize<T: Real>(family: &ScheduleFamily<T>, n: u64, cap: u64) -> Result<u64> {
    family.materialize(n, cap)
}

pub fn phi<T: Real>(family: &ScheduleFamily<T>, n: u64) -> Result<T> {
    family.phi(n)
}

pub fn phi1<T: Real>(family: &ScheduleFamily<T>, n: u64) -> Result<T> {
    family.phi1(n)
}

/// Values of `kind` for `n = first_index ..= n_max`.
pub fn phi_values<T: Real>(
    family: &ScheduleFamily<T>,
    kind: PhiKind,
    n_max: u64,
) -> Result<Vec<(u64, T)>> {
    (family.first_index()..=n_max)
        .map(|n| family.phi_kind(kind, n).map(|v| (n, v)))
        .collect()
}

/// Scans `n = first_index ..= n_max` for a strict increase beyond
/// [`MONOTONE_TOLERANCE`].
pub fn check_monotone<T: Real>(
    family: &ScheduleFamily<T>,
    kind: PhiKind,
    n_max: u64,
) -> Result<MonotoneReport> {
    if n_max < 2 {
        return Err(Error::InsufficientRange {
            required: 2,
            got: n_max,
        });
    }
    let tol = T::lit(MONOTONE_TOLERANCE);
    let mut prev: Option<T> = None;
    for n in family.first_index()..=n_max {
        let v = family.phi_kind(kind, n)?;
        if let Some(p) = prev {
            if v > p + tol {
                return Ok(MonotoneReport {
                    nonincreasing: false,
                    first_violation: Some(n),
                });
            }
        }
        prev = Some(v);
    }
    Ok(MonotoneReport {
        nonincreasing: true,
        first_violation: None,
    })
}

/// `max_{n < m <= n_max} v(m) / v(n)`, via a running minimum.
pub fn check_bounded_ratio<T: Real>(
    family: &ScheduleFamily<T>,
    kind: PhiKind,
    n_max: u64,
) -> Result<T> {
    if n_max < 2 {
        return Err(Error::InsufficientRange {
            required: 2,
            got: n_max,
        });
    }
    let values = phi_values(family, kind, n_max)?;
    Ok(max_forward_ratio(values.iter().map(|&(_, v)| v)))
}

pub(crate) fn max_forward_ratio<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut it = values.into_iter();
    let Some(first) = it.next() else {
        return T::zero();
    };
    let mut running_min = first;
    let mut best = T::neg_infinity();
    for v in it {
        best = best.max(v / running_min);
        running_min = running_min.min(v);
    }
    best
}
