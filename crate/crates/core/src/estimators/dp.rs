//! Forward dynamic programmes for lattice walks with optional absorption at
//! the origin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice_walk::{LatticeDistribution, Marginal};
use crate::scalar::{to_f64, Scalar};

/// Truncation budget of the default 2D radius.
pub const DEFAULT_EPSILON: f64 = 1e-12;
/// Largest `b` accepted by the 1D hitting programme.
pub const MAX_STEPS_1D: u64 = 1 << 15;
/// Largest `b` accepted by the 2D hitting programme.
pub const MAX_STEPS_2D: u64 = 1 << 11;
/// Largest radius any table may allocate.
pub const MAX_RADIUS: usize = 1 << 22;
/// Largest radius of a 2D table (the table holds `(2R + 1)^2` cells).
pub const MAX_RADIUS_2D: usize = 2048;

fn abs_diff_one<T: Scalar>(s: T) -> f64 {
    let one = T::one();
    if s > one {
        to_f64(&(s - one))
    } else {
        to_f64(&(one - s))
    }
}

/// Distribution of a 1D walk on `[-R, R]`.
///
/// Mass leaving the window is moved to `truncated`; mass removed at the
/// origin by [`DpTable::absorb_origin`] is moved to `absorbed`.
#[derive(Debug, Clone)]
pub struct DpTable<T> {
    time: u64,
    radius: usize,
    probs: Vec<T>,
    scratch: Vec<T>,
    lo: usize,
    hi: usize,
    absorbed: T,
    truncated: T,
}

impl<T: Scalar> DpTable<T> {
    /// Point mass at the origin.
    pub fn new(radius: usize) -> Result<Self> {
        if radius > MAX_RADIUS {
            return Err(Error::Infeasible(format!("radius {radius} above {MAX_RADIUS}")));
        }
        let w = 2 * radius + 1;
        let mut probs = vec![T::zero(); w];
        probs[radius] = T::one();
        Ok(Self {
            time: 0,
            radius,
            probs,
            scratch: vec![T::zero(); w],
            lo: radius,
            hi: radius,
            absorbed: T::zero(),
            truncated: T::zero(),
        })
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn at(&self, x: i64) -> T {
        let i = x + self.radius as i64;
        if i < 0 || i as usize >= self.probs.len() {
            return T::zero();
        }
        self.probs[i as usize].clone()
    }

    pub fn absorbed(&self) -> T {
        self.absorbed.clone()
    }

    pub fn truncated(&self) -> T {
        self.truncated.clone()
    }

    /// Mass still on the lattice window.
    pub fn mass(&self) -> T {
        self.probs[self.lo..=self.hi]
            .iter()
            .fold(T::zero(), |acc, p| acc + p.clone())
    }

    /// `|mass + absorbed + truncated − 1|`.
    pub fn conservation_error(&self) -> f64 {
        abs_diff_one(self.mass() + self.absorbed() + self.truncated())
    }

    pub fn step(&mut self, m: &Marginal<T>) {
        let r = self.radius as i64;
        let top = 2 * r;
        let (min_off, max_off) = (m.support()[0].0, m.support().last().unwrap().0);
        let new_lo = (self.lo as i64 + min_off).clamp(0, top) as usize;
        let new_hi = (self.hi as i64 + max_off).clamp(0, top) as usize;
        for v in &mut self.scratch[new_lo..=new_hi] {
            *v = T::zero();
        }
        let mut lost = T::zero();
        for x in self.lo..=self.hi {
            let p = &self.probs[x];
            if *p == T::zero() {
                continue;
            }
            for (o, q) in m.support() {
                let y = x as i64 + o;
                let w = p.clone() * q.clone();
                if (0..=top).contains(&y) {
                    let cell = &mut self.scratch[y as usize];
                    *cell = cell.clone() + w;
                } else {
                    lost = lost + w;
                }
            }
        }
        for v in &mut self.probs[self.lo..=self.hi] {
            *v = T::zero();
        }
        std::mem::swap(&mut self.probs, &mut self.scratch);
        self.lo = new_lo;
        self.hi = new_hi;
        self.truncated = self.truncated.clone() + lost;
        self.time += 1;
    }

    /// Removes the mass at the origin and returns it.
    pub fn absorb_origin(&mut self) -> T {
        let c = self.radius;
        let p = std::mem::replace(&mut self.probs[c], T::zero());
        self.absorbed = self.absorbed.clone() + p.clone();
        p
    }
}

/// Distribution of a product walk on `[-R, R]^2`.
#[derive(Debug, Clone)]
pub struct DpTable2<T> {
    time: u64,
    radius: usize,
    probs: Vec<T>,
    scratch: Vec<T>,
    /// Active rectangle `[x_lo, x_hi] × [y_lo, y_hi]`, in array indices.
    rect: [usize; 4],
    absorbed: T,
    truncated: T,
}

impl<T: Scalar> DpTable2<T> {
    pub fn new(radius: usize) -> Result<Self> {
        if radius > MAX_RADIUS_2D {
            return Err(Error::Infeasible(format!("2D radius {radius} above {MAX_RADIUS_2D}")));
        }
        let w = 2 * radius + 1;
        let mut probs = vec![T::zero(); w * w];
        probs[radius * w + radius] = T::one();
        Ok(Self {
            time: 0,
            radius,
            probs,
            scratch: vec![T::zero(); w * w],
            rect: [radius, radius, radius, radius],
            absorbed: T::zero(),
            truncated: T::zero(),
        })
    }

    fn width(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn at(&self, x: i64, y: i64) -> T {
        let r = self.radius as i64;
        if x.abs() > r || y.abs() > r {
            return T::zero();
        }
        self.probs[(x + r) as usize * self.width() + (y + r) as usize].clone()
    }

    pub fn absorbed(&self) -> T {
        self.absorbed.clone()
    }

    pub fn truncated(&self) -> T {
        self.truncated.clone()
    }

    pub fn mass(&self) -> T {
        let w = self.width();
        let [xl, xh, yl, yh] = self.rect;
        let mut acc = T::zero();
        for x in xl..=xh {
            for p in &self.probs[x * w + yl..=x * w + yh] {
                acc = acc + p.clone();
            }
        }
        acc
    }

    pub fn conservation_error(&self) -> f64 {
        abs_diff_one(self.mass() + self.absorbed() + self.truncated())
    }

    /// One step with independent x and y increments, as an x pass followed
    /// by a y pass.
    pub fn step(&mut self, mx: &Marginal<T>, my: &Marginal<T>) {
        let w = self.width();
        let top = (w - 1) as i64;
        let [xl, xh, yl, yh] = self.rect;
        let span = |lo: usize, hi: usize, m: &Marginal<T>| {
            let (a, b) = (m.support()[0].0, m.support().last().unwrap().0);
            ((lo as i64 + a).clamp(0, top) as usize, (hi as i64 + b).clamp(0, top) as usize)
        };
        let (nxl, nxh) = span(xl, xh, mx);
        let (nyl, nyh) = span(yl, yh, my);
        let mut lost = T::zero();

        // x pass: probs -> scratch over rows nxl..=nxh, columns yl..=yh.
        for x in nxl..=nxh {
            for v in &mut self.scratch[x * w + yl..=x * w + yh] {
                *v = T::zero();
            }
        }
        for x in xl..=xh {
            for y in yl..=yh {
                let p = &self.probs[x * w + y];
                if *p == T::zero() {
                    continue;
                }
                for (o, q) in mx.support() {
                    let t = x as i64 + o;
                    let v = p.clone() * q.clone();
                    if (0..=top).contains(&t) {
                        let cell = &mut self.scratch[t as usize * w + y];
                        *cell = cell.clone() + v;
                    } else {
                        lost = lost + v;
                    }
                }
            }
        }
        for x in xl..=xh {
            for v in &mut self.probs[x * w + yl..=x * w + yh] {
                *v = T::zero();
            }
        }

        // y pass: scratch -> probs.
        for x in nxl..=nxh {
            for y in yl..=yh {
                let p = std::mem::replace(&mut self.scratch[x * w + y], T::zero());
                if p == T::zero() {
                    continue;
                }
                for (o, q) in my.support() {
                    let t = y as i64 + o;
                    let v = p.clone() * q.clone();
                    if (0..=top).contains(&t) {
                        let cell = &mut self.probs[x * w + t as usize];
                        *cell = cell.clone() + v;
                    } else {
                        lost = lost + v;
                    }
                }
            }
        }
        self.rect = [nxl, nxh, nyl, nyh];
        self.truncated = self.truncated.clone() + lost;
        self.time += 1;
    }

    pub fn absorb_origin(&mut self) -> T {
        let c = self.radius * self.width() + self.radius;
        let p = std::mem::replace(&mut self.probs[c], T::zero());
        self.absorbed = self.absorbed.clone() + p.clone();
        p
    }
}

fn exact_radius(steps: u64, reach: i64) -> Result<usize> {
    let r = (steps as u128) * (reach as u128);
    if r > MAX_RADIUS as u128 {
        return Err(Error::Infeasible(format!(
            "exact radius {r} above {MAX_RADIUS}; pass a smaller radius"
        )));
    }
    Ok(r as usize)
}

/// Radius beyond which each coordinate of a walk with steps bounded by
/// `reach` strays before time `steps` with total probability at most `eps`
/// (maximal Hoeffding bound, two coordinates, two sides).
pub fn truncation_radius(steps: u64, reach: i64, eps: f64) -> usize {
    let r = reach as f64 * (2.0 * steps as f64 * (4.0 / eps).ln()).sqrt();
    r.ceil() as usize
}

/// `P[X_k = 0]` for `k = 0..=k_max`, exactly (full support growth).
pub fn return_prob_series<T: Scalar>(m: &Marginal<T>, k_max: u64) -> Result<Vec<T>> {
    let mut table = DpTable::new(exact_radius(k_max, m.max_abs_offset())?)?;
    let mut out = Vec::with_capacity(k_max as usize + 1);
    out.push(T::one());
    for _ in 0..k_max {
        table.step(m);
        out.push(table.at(0));
    }
    Ok(out)
}

/// `P[S_k = 0]` for a product law, as the product of the coordinate values.
///
/// `radius` defaults to full support growth; a smaller radius is accepted
/// and the returned value then ignores the truncated mass.
pub fn exact_return_prob<T: Scalar>(dist: &LatticeDistribution<T>, k: u64, radius: Option<usize>) -> Result<T> {
    dist.validate()?;
    let mut acc = T::one();
    for m in dist.marginals() {
        let r = match radius {
            Some(r) => r,
            None => exact_radius(k, m.max_abs_offset())?,
        };
        let mut table = DpTable::new(r)?;
        for _ in 0..k {
            table.step(m);
        }
        acc = acc * table.at(0);
    }
    Ok(acc)
}

/// `P[S_k = 0]` for a planar law from a full 2D table, without using the
/// product structure.
pub fn exact_return_prob_2d<T: Scalar>(dist: &LatticeDistribution<T>, k: u64, radius: Option<usize>) -> Result<T> {
    dist.validate()?;
    if dist.dimension() != 2 {
        return Err(Error::param("dist", "expected a 2D law"));
    }
    let reach = dist.marginals().iter().map(|m| m.max_abs_offset()).max().unwrap();
    let r = match radius {
        Some(r) => r,
        None => exact_radius(k, reach)?,
    };
    let mut table = DpTable2::new(r)?;
    for _ in 0..k {
        table.step(dist.marginal(0), dist.marginal(1));
    }
    Ok(table.at(0, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingDp<T> {
    /// `P[S_k = 0 for some a <= k < b]`.
    pub value: T,
    /// `P[T = k]` for `k = a..b`, `T` the first visit at or after `a`.
    pub first_hit: Vec<T>,
    pub truncated: T,
    /// Declared bound on `truncated` (`0` for an exact radius).
    pub truncation_bound: f64,
    pub radius: usize,
    /// Worst `|mass + absorbed + truncated − 1|` seen at any step.
    pub max_conservation_error: f64,
}

/// Unconstrained programme to time `a`, then absorption at the origin at
/// every `k` in `[a, b)`.
///
/// 1D defaults to the exact radius; 2D to [`truncation_radius`] with
/// [`DEFAULT_EPSILON`]. Larger instances than [`MAX_STEPS_1D`] /
/// [`MAX_STEPS_2D`] are refused.
pub fn exact_hitting_dp<T: Scalar>(
    dist: &LatticeDistribution<T>,
    a: u64,
    b: u64,
    radius: Option<usize>,
) -> Result<HittingDp<T>> {
    dist.validate()?;
    if a == 0 || a >= b {
        return Err(Error::param("a, b", format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    let reach = dist.marginals().iter().map(|m| m.max_abs_offset()).max().unwrap();
    match dist.dimension() {
        1 => {
            if b > MAX_STEPS_1D {
                return Err(Error::Infeasible(format!("1D horizon {b} above {MAX_STEPS_1D}")));
            }
            let exact = exact_radius(b, reach)?;
            let r = radius.unwrap_or(exact);
            let bound = if r >= exact { 0.0 } else { f64::NAN };
            let m = dist.marginal(0);
            let mut table = DpTable::new(r)?;
            let mut worst: f64 = 0.0;
            let mut first_hit = Vec::with_capacity((b - a) as usize);
            let mut value = T::zero();
            for _ in 0..a {
                table.step(m);
                worst = worst.max(table.conservation_error());
            }
            for k in a..b {
                let p = table.absorb_origin();
                value = value + p.clone();
                first_hit.push(p);
                if k + 1 < b {
                    table.step(m);
                    worst = worst.max(table.conservation_error());
                }
            }
            Ok(HittingDp {
                value,
                first_hit,
                truncated: table.truncated(),
                truncation_bound: bound,
                radius: r,
                max_conservation_error: worst.max(table.conservation_error()),
            })
        }
        2 => {
            if b > MAX_STEPS_2D {
                return Err(Error::Infeasible(format!("2D horizon {b} above {MAX_STEPS_2D}")));
            }
            let exact = (b as usize) * reach as usize;
            let auto = truncation_radius(b, reach, DEFAULT_EPSILON);
            let r = radius.unwrap_or(auto.min(exact));
            let bound = if r >= exact {
                0.0
            } else if r >= auto {
                DEFAULT_EPSILON
            } else {
                f64::NAN
            };
            let (mx, my) = (dist.marginal(0), dist.marginal(1));
            let mut table = DpTable2::new(r)?;
            let mut worst: f64 = 0.0;
            let mut first_hit = Vec::with_capacity((b - a) as usize);
            let mut value = T::zero();
            for _ in 0..a {
                table.step(mx, my);
                worst = worst.max(table.conservation_error());
            }
            for k in a..b {
                let p = table.absorb_origin();
                value = value + p.clone();
                first_hit.push(p);
                if k + 1 < b {
                    table.step(mx, my);
                    worst = worst.max(table.conservation_error());
                }
            }
            Ok(HittingDp {
                value,
                first_hit,
                truncated: table.truncated(),
                truncation_bound: bound,
                radius: r,
                max_conservation_error: worst.max(table.conservation_error()),
            })
        }
        d => Err(Error::Infeasible(format!("no hitting programme for dimension {d}"))),
    }
}
