//! Product lattice laws, walk simulation and the adaptive schedule builder.

pub mod adaptive;
pub mod distribution;
pub mod simulate;

pub use adaptive::{
    build_adaptive_progress, build_adaptive_schedule, estimate_planar_return, AdaptiveConfig,
    AdaptiveProgress, PlanarEstimate,
};
pub use distribution::{lazify, project, validate, LatticeDistribution, Marginal, ValidationReport};
pub use simulate::{
    simulate_alternating, simulate_replicas, simulate_rwvd, trace_replicas, AlternatingWalk,
    DimensionProfile, ProfileMode, ReplicaSummary, ReturnRecord, VaryingWalk, Walk,
};
