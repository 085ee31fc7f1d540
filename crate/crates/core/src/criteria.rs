//! Recurrence criteria for walks in varying dimension and the deterministic
//! sums behind them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{bertrand_verdict, fit_tail, least_squares, partial_sums, CompensatedSum, SeriesVerdict, TailFit};
use crate::scalar::Real;
use crate::schedules::{check_monotone, max_forward_ratio, PhiKind, ScheduleFamily, DEFAULT_CAP};

/// Smallest `N` at which a verdict may rest on the tail fit alone.
pub const MIN_FIT_RANGE: u64 = 100;
/// Relative growth of the forward-ratio supremum from `N/2` to `N` still
/// read as bounded.
pub const RATIO_STABILITY: f64 = 0.01;
/// Forward-ratio suprema above this are never read as bounded.
pub const RATIO_CEILING: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WalkKind {
    /// Planar steps, occasional 3D steps.
    Z2inZ3,
    /// Planar steps, occasional 4D steps.
    Z2inZ4,
    /// Linear steps, occasional 3D steps.
    Z1inZ3,
    /// The planar walk alternating diagonal and horizontal blocks.
    Alternating12,
}

impl WalkKind {
    /// Exponent of the weight `n^w` in the criterion series.
    pub fn weight_exponent(self) -> Option<f64> {
        match self {
            WalkKind::Z2inZ3 => Some(-0.5),
            WalkKind::Z2inZ4 | WalkKind::Z1inZ3 => Some(-1.0),
            WalkKind::Alternating12 => None,
        }
    }

    pub fn phi_kind(self) -> Option<PhiKind> {
        match self {
            WalkKind::Z2inZ3 | WalkKind::Z2inZ4 => Some(PhiKind::Phi),
            WalkKind::Z1inZ3 => Some(PhiKind::Phi1),
            WalkKind::Alternating12 => None,
        }
    }

    /// `(d, D)`.
    pub fn dims(self) -> Option<(usize, usize)> {
        match self {
            WalkKind::Z2inZ3 => Some((2, 3)),
            WalkKind::Z2inZ4 => Some((2, 4)),
            WalkKind::Z1inZ3 => Some((1, 3)),
            WalkKind::Alternating12 => None,
        }
    }

    fn series(self) -> Result<(f64, PhiKind)> {
        match (self.weight_exponent(), self.phi_kind()) {
            (Some(w), Some(k)) => Ok((w, k)),
            _ => Err(Error::param("kind", "the alternating walk uses prop61_sums")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Transient,
    Recurrent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictSource {
    AnalyticHint,
    TailFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruningDiagnostics<T> {
    /// `doubled[i]` is `a_{n+1} >= 2 a_n` for `n = i + 1`.
    pub doubled: Vec<bool>,
    pub pruned: u64,
    pub unpruned: u64,
    /// Sum of `n^{-1/2} phi(n)` over the pruned `n`.
    pub correction: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport<T> {
    pub walk_kind: WalkKind,
    pub n_evaluated: u64,
    pub partial_sums: Vec<T>,
    /// Fitted power exponent of the terms over the last decade.
    pub tail_exponent_fit: Option<f64>,
    pub monotone_ok: bool,
    pub bounded_ratio_ok: bool,
    pub verdict: Verdict,
    pub verdict_source: VerdictSource,
    pub diagnostics: BTreeMap<String, f64>,
    pub pruning: PruningDiagnostics<T>,
}

/// Terms `n^w · phi_variant(n)` for `n = 1..=n_max`; zero before the
/// family's first index.
pub fn criterion_terms<T: Real>(kind: WalkKind, family: &ScheduleFamily<T>, n_max: u64) -> Result<Vec<T>> {
    let (w, phi_kind) = kind.series()?;
    family.validate()?;
    let w = T::lit(w);
    let first = family.first_index();
    (1..=n_max)
        .map(|n| {
            if n < first {
                return Ok(T::zero());
            }
            let v = family.phi_kind(phi_kind, n)?;
            Ok(T::from_u64_lossy(n).powf(w) * v)
        })
        .collect()
}

/// `S(m) = sum_{n <= m} n^w · phi_variant(n)` for `m = 1..=n_max`.
pub fn criterion_partial_sums<T: Real>(kind: WalkKind, family: &ScheduleFamily<T>, n_max: u64) -> Result<Vec<T>> {
    Ok(partial_sums(&criterion_terms(kind, family, n_max)?))
}

fn doubles<T: Real>(family: &ScheduleFamily<T>, n: u64) -> Result<bool> {
    if !family.is_analytic() {
        let lo = family.materialize(n, u64::MAX)?;
        let hi = family.materialize(n + 1, u64::MAX)?;
        return Ok(hi >= lo.saturating_mul(2));
    }
    let g = family.log_growth(n)?;
    Ok(g >= T::lit(std::f64::consts::LN_2 * (1.0 - 1e-12)))
}

/// Intervals with `a_{n+1} < 2 a_n` for `n <= n_max` and the part of the
/// planar criterion series they carry.
pub fn pruning_diagnostics<T: Real>(family: &ScheduleFamily<T>, n_max: u64) -> Result<PruningDiagnostics<T>> {
    family.validate()?;
    let first = family.first_index();
    let mut doubled = Vec::with_capacity(n_max as usize);
    let mut correction = CompensatedSum::new();
    let (mut pruned, mut unpruned) = (0, 0);
    for n in 1..=n_max {
        if n < first {
            doubled.push(false);
            pruned += 1;
            continue;
        }
        let d = doubles(family, n)?;
        doubled.push(d);
        if d {
            unpruned += 1;
        } else {
            pruned += 1;
            correction.add(T::from_u64_lossy(n).powf(T::lit(-0.5)) * family.phi(n)?);
        }
    }
    Ok(PruningDiagnostics {
        doubled,
        pruned,
        unpruned,
        correction: correction.value(),
    })
}

/// Series verdict of the criterion, its source, and the recurrence gate.
///
/// A family with known asymptotics decides convergence exactly; otherwise
/// the tail of the computed terms is fitted. A divergent series reads as
/// recurrent only when `phi_variant` is nonincreasing or its forward ratio
/// `sup_{n < m} v(m)/v(n)` has stopped growing between `N/2` and `N`.
pub fn classify<T: Real>(kind: WalkKind, family: &ScheduleFamily<T>, n_max: u64) -> Result<CriterionReport<T>> {
    let (w, phi_kind) = kind.series()?;
    family.validate()?;
    let hint = family.phi_asymptotics(phi_kind).map(|(b, g)| (b + w, g));
    let required = if hint.is_some() { 2 } else { MIN_FIT_RANGE };
    if n_max < required {
        return Err(Error::InsufficientRange {
            required,
            got: n_max,
        });
    }
    let first = family.first_index();
    if let Some(last) = family.last_index() {
        if n_max + 1 > last {
            return Err(Error::IndexOutOfDomain {
                index: n_max + 1,
                first,
                last: Some(last),
            });
        }
    }
    let terms = criterion_terms(kind, family, n_max)?;
    let sums = partial_sums(&terms);
    let terms_f: Vec<f64> = terms.iter().map(|t| t.to_f64().unwrap_or(f64::NAN)).collect();
    let fit: Option<TailFit> = fit_tail(&terms_f);

    let monotone_ok = check_monotone(family, phi_kind, n_max)?.nonincreasing;
    let values: Vec<T> = (first..=n_max)
        .map(|n| family.phi_kind(phi_kind, n))
        .collect::<Result<_>>()?;
    let half = ((n_max / 2).saturating_sub(first) + 1) as usize;
    let sup = max_forward_ratio(values.iter().copied()).to_f64().unwrap_or(f64::NAN);
    let sup_half = if n_max / 2 > first {
        max_forward_ratio(values[..half.min(values.len())].iter().copied())
            .to_f64()
            .unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    let bounded_ratio_ok = sup.is_finite()
        && sup_half.is_finite()
        && sup <= sup_half * (1.0 + RATIO_STABILITY)
        && sup <= RATIO_CEILING;

    let (series, source) = match hint {
        Some((b, g)) => (bertrand_verdict(b, g), VerdictSource::AnalyticHint),
        None => (
            fit.map_or(SeriesVerdict::Inconclusive, |f| f.verdict),
            VerdictSource::TailFit,
        ),
    };
    let verdict = gate(series, monotone_ok, bounded_ratio_ok);

    let pruning = pruning_diagnostics(family, n_max)?;
    let mut diagnostics = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        diagnostics.insert(k.to_string(), v);
    };
    if let Some(f) = fit {
        put("tail_beta", f.beta);
        if let Some(g) = f.gamma {
            put("tail_gamma", g);
        }
    }
    if let Some((b, g)) = hint {
        put("hint_beta", b);
        put("hint_gamma", g);
    }
    put("forward_ratio_sup", sup);
    put("forward_ratio_sup_half", sup_half);
    put("pruned", pruning.pruned as f64);
    put("unpruned", pruning.unpruned as f64);
    put("pruning_correction", pruning.correction.to_f64().unwrap_or(f64::NAN));
    put(
        "final_partial_sum",
        sums.last().and_then(|s| s.to_f64()).unwrap_or(f64::NAN),
    );

    Ok(CriterionReport {
        walk_kind: kind,
        n_evaluated: n_max,
        partial_sums: sums,
        tail_exponent_fit: fit.map(|f| f.beta),
        monotone_ok,
        bounded_ratio_ok,
        verdict,
        verdict_source: source,
        diagnostics,
        pruning,
    })
}

fn gate(series: SeriesVerdict, monotone_ok: bool, bounded_ratio_ok: bool) -> Verdict {
    match series {
        SeriesVerdict::Convergent => Verdict::Transient,
        SeriesVerdict::Divergent if monotone_ok || bounded_ratio_ok => Verdict::Recurrent,
        _ => Verdict::Inconclusive,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapVerdict {
    ConstructibleRecurrent,
    ForcedTransient,
}

/// Whether a walk mixing steps of the given dimensions can be made
/// recurrent: the lowest dimension must be at most 2 and no gap between
/// consecutive dimensions may exceed 2.
pub fn dimension_gap_check(dims: &[u64]) -> Result<GapVerdict> {
    if dims.is_empty() {
        return Err(Error::MalformedDimensions("empty list".into()));
    }
    if dims[0] == 0 {
        return Err(Error::MalformedDimensions("dimensions must be positive".into()));
    }
    if let Some(w) = dims.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::MalformedDimensions(format!(
            "not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    let ok = dims[0] <= 2 && dims.windows(2).all(|w| w[1] - w[0] <= 2);
    Ok(if ok {
        GapVerdict::ConstructibleRecurrent
    } else {
        GapVerdict::ForcedTransient
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma46Report<T> {
    pub partial_sums: Vec<T>,
    /// Sums over `(N/8, N/4]`, `(N/4, N/2]`, `(N/2, N]`; absent below `N = 8`.
    pub increments: Option<[T; 3]>,
    pub bounded_heuristic: Option<bool>,
}

fn check_positive<T: Real>(name: &'static str, seq: &[T], n: usize) -> Result<()> {
    if seq.len() < n {
        return Err(Error::SequenceExhausted { name, len: seq.len() });
    }
    if let Some(i) = seq[..n].iter().position(|v| !(*v >= T::one()) || !v.is_finite()) {
        return Err(Error::param(name, format!("entry {} is not a positive integer", i + 1)));
    }
    Ok(())
}

/// Partial sums of `min(1/sqrt(B_{n-1}), sqrt(b_n / B_n) / n)` with
/// `B_n = b_1 + … + b_n`; the first term uses `1/sqrt(B_1)`.
pub fn lemma46_partial_sums<T: Real>(b_seq: &[T], n_max: usize) -> Result<Lemma46Report<T>> {
    if n_max < 2 {
        return Err(Error::InsufficientRange {
            required: 2,
            got: n_max as u64,
        });
    }
    check_positive("b_seq", b_seq, n_max)?;
    let mut terms = Vec::with_capacity(n_max);
    let mut prev = T::zero();
    let mut total = T::zero();
    for (i, &b) in b_seq[..n_max].iter().enumerate() {
        total = total + b;
        let n = T::from_u64_lossy(i as u64 + 1);
        let first = if i == 0 { total } else { prev };
        let t = (T::one() / first.sqrt()).min((b / total).sqrt() / n);
        terms.push(t);
        prev = total;
    }
    let partial = partial_sums(&terms);
    let window = |lo: usize, hi: usize| {
        let mut acc = CompensatedSum::new();
        for &t in &terms[lo..hi] {
            acc.add(t);
        }
        acc.value()
    };
    let (increments, heuristic) = if n_max >= 8 {
        let inc = [
            window(n_max / 8, n_max / 4),
            window(n_max / 4, n_max / 2),
            window(n_max / 2, n_max),
        ];
        let dec = inc[0] > inc[1] && inc[1] > inc[2];
        (Some(inc), Some(dec))
    } else {
        (None, None)
    };
    Ok(Lemma46Report {
        partial_sums: partial,
        increments,
        bounded_heuristic: heuristic,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop61Report<T> {
    pub dumb_terms: Vec<T>,
    pub t_terms: Vec<T>,
    pub sum_dumb: Vec<T>,
    pub sum_t: Vec<T>,
    pub dumb_fit: Option<TailFit>,
    pub t_fit: Option<TailFit>,
    pub dumb_verdict: SeriesVerdict,
    pub t_verdict: SeriesVerdict,
    /// Transient when both series converge; no conclusion otherwise.
    pub walk_verdict: Verdict,
}

/// Inner sums up to this length are added term by term.
pub const DIRECT_INNER_TERMS: u64 = 1 << 20;

/// `sum_{j=1}^{len} (p + j)^{-1/2} (q + j)^{-1/2}` with `p = q + B`.
fn inner_sum<T: Real>(q: T, p: T, len: u64) -> T {
    let f = |x: T| (x + p).sqrt().recip() * (x + q).sqrt().recip();
    let direct = len.min(DIRECT_INNER_TERMS);
    let mut acc = CompensatedSum::new();
    for j in 1..=direct {
        acc.add(f(T::from_u64_lossy(j)));
    }
    if len > direct {
        // Euler–Maclaurin on [direct + 1, len] with the antiderivative
        // 2 ln(sqrt(x + p) + sqrt(x + q)).
        let lo = T::from_u64_lossy(direct + 1);
        let hi = T::from_u64_lossy(len);
        let anti = |x: T| T::lit(2.0) * ((x + p).sqrt() + (x + q).sqrt()).ln();
        let df = |x: T| -T::lit(0.5) * f(x) * ((x + p).recip() + (x + q).recip());
        acc.add(anti(hi) - anti(lo));
        acc.add((f(lo) + f(hi)) * T::lit(0.5));
        acc.add((df(hi) - df(lo)) / T::lit(12.0));
    }
    acc.value()
}

/// The two series whose convergence makes the alternating walk transient,
/// with `A_n`, `B_n` the prefix sums of the block lengths.
pub fn prop61_sums<T: Real>(a_seq: &[T], b_seq: &[T], n_max: usize) -> Result<Prop61Report<T>> {
    if n_max < 2 {
        return Err(Error::InsufficientRange {
            required: 2,
            got: n_max as u64,
        });
    }
    check_positive("a_seq", a_seq, n_max)?;
    check_positive("b_seq", b_seq, n_max)?;
    let cap = T::from_u64_lossy(DEFAULT_CAP);
    if let Some(i) = a_seq[..n_max].iter().position(|&a| a > cap) {
        return Err(Error::NotMaterializable {
            index: i as u64 + 1,
            cap: DEFAULT_CAP,
        });
    }
    let mut dumb = Vec::with_capacity(n_max);
    let mut tt = Vec::with_capacity(n_max);
    let (mut big_a, mut big_b) = (T::zero(), T::zero());
    for i in 0..n_max {
        let (a, b) = (a_seq[i], b_seq[i]);
        let prev_b = big_b;
        big_a = big_a + a;
        big_b = big_b + b;
        // sqrt(A + B_n) − sqrt(A + B_{n−1}) = b_n / (sum of the roots)
        let roots = (big_a + big_b).sqrt() + (big_a + prev_b).sqrt();
        dumb.push(b.sqrt() / (big_a.sqrt() * roots));
        let log_a = a.max(T::lit(2.0)).ln();
        let len = a.to_u64().unwrap_or(0);
        tt.push(inner_sum(big_a, big_a + big_b, len) / log_a);
    }
    let to_f = |v: &[T]| -> Vec<f64> { v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect() };
    let dumb_fit = fit_tail(&to_f(&dumb));
    let t_fit = fit_tail(&to_f(&tt));
    let dumb_verdict = dumb_fit.map_or(SeriesVerdict::Inconclusive, |f| f.verdict);
    let t_verdict = t_fit.map_or(SeriesVerdict::Inconclusive, |f| f.verdict);
    let walk_verdict = if dumb_verdict == SeriesVerdict::Convergent && t_verdict == SeriesVerdict::Convergent {
        Verdict::Transient
    } else {
        Verdict::Inconclusive
    };
    Ok(Prop61Report {
        sum_dumb: partial_sums(&dumb),
        sum_t: partial_sums(&tt),
        dumb_terms: dumb,
        t_terms: tt,
        dumb_fit,
        t_fit,
        dumb_verdict,
        t_verdict,
        walk_verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedVisitsReport<T> {
    pub partial_sums: Vec<T>,
    /// Slope of `S(n)` against `ln n` over the last decade.
    pub log_slope: Option<f64>,
}

/// Slope of `sums[n − 1]` against `ln n` for `n` in `[lo, hi]`, on a
/// logarithmic grid of at most 200 points.
pub fn log_growth_slope<T: Real>(sums: &[T], lo: u64, hi: u64) -> Option<f64> {
    if lo < 1 || hi as usize > sums.len() || hi <= lo {
        return None;
    }
    let (l0, l1) = ((lo as f64).ln(), (hi as f64).ln());
    let mut ns: Vec<u64> = (0..200)
        .map(|i| (l0 + (l1 - l0) * i as f64 / 199.0).exp().round() as u64)
        .map(|n| n.clamp(lo, hi))
        .collect();
    ns.dedup();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns
        .iter()
        .map(|&n| sums[n as usize - 1].to_f64().unwrap_or(f64::NAN))
        .collect();
    least_squares(&xs, &ys).map(|f| f.slope)
}

/// Partial sums of the interval-wise expected-visit surrogate
/// `sum n^{-1/2} phi(n)` of the planar walk in three dimensions.
pub fn expected_visits_partial_sum<T: Real>(
    kind: WalkKind,
    family: &ScheduleFamily<T>,
    n_max: u64,
) -> Result<ExpectedVisitsReport<T>> {
    if kind != WalkKind::Z2inZ3 {
        return Err(Error::param("kind", "only the planar walk in three dimensions"));
    }
    if n_max < 2 {
        return Err(Error::InsufficientRange {
            required: 2,
            got: n_max,
        });
    }
    let sums = criterion_partial_sums(kind, family, n_max)?;
    let log_slope = log_growth_slope(&sums, (n_max / 10).max(1), n_max);
    Ok(ExpectedVisitsReport {
        partial_sums: sums,
        log_slope,
    })
}
