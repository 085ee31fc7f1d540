//! Scalar abstractions.
//!
//! [`Scalar`] is the minimum the dynamic-programming oracles need (a
//! commutative ring with an ordering and a lossy conversion to `f64`), so the
//! same code runs on `f64` and on exact rationals. [`Real`] adds the
//! transcendental functions the schedule and criterion code relies on.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Num + Clone + PartialOrd + Debug + ToPrimitive + Send + Sync + 'static {}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + Debug + ToPrimitive + Send + Sync + 'static {}

pub trait Real: Scalar + Float + FromPrimitive {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_u64_lossy(x: u64) -> Self {
        Self::from_u64(x).expect("u64 representable")
    }
}

impl<T> Real for T where T: Scalar + Float + FromPrimitive {}

/// Lossy view of any scalar as `f64`, NaN when not representable.
pub fn to_f64<T: Scalar>(x: &T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
