//! Recurrence and transience of random walks in varying dimension.
//!
//! The crate is organised around five pieces:
//!
//! * [`schedules`]: schedule families `{a_n}` held in log-domain and the
//!   criterion quantities `phi(n)` and `phi1(n)`.
//! * [`criteria`]: criterion series, verdict classification, the
//!   dimension-gap rule and the deterministic sums used by the proofs.
//! * [`lattice_walk`]: product lattice laws, exact step-by-step simulation
//!   and the adaptive schedule builder.
//! * [`estimators`]: dynamic-programming oracles, Monte Carlo hitting
//!   estimators, local-CLT fits, bound bands and second-moment ratios.
//! * [`rng`]: the counter-based stream used by every simulation.
//!
//! Numeric kernels are generic over the scalar type (see [`scalar`]); the
//! aliases below fix the scalar to `f64`, which is what the CLI uses.

pub mod criteria;
pub mod error;
pub mod estimators;
pub mod lattice_walk;
pub mod numeric;
pub mod rng;
pub mod scalar;
pub mod schedules;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

pub type Schedule = schedules::ScheduleFamily<f64>;
pub type Distribution = lattice_walk::LatticeDistribution<f64>;
pub type Marginal = lattice_walk::Marginal<f64>;
pub type CriterionReport = criteria::CriterionReport<f64>;
pub type DpTable = estimators::DpTable<f64>;
pub type DpTable2 = estimators::DpTable2<f64>;
