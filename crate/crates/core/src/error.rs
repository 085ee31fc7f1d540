use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} outside the schedule domain (first valid index {first}, last {last:?})")]
    IndexOutOfDomain {
        index: u64,
        first: u64,
        last: Option<u64>,
    },

    #[error("log a_n overflows the floating range at n = {index}")]
    Overflow { index: u64 },

    #[error("a_{index} exceeds the materialization cap {cap}")]
    NotMaterializable { index: u64, cap: u64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("sequence `{name}` exhausted after {len} entries")]
    SequenceExhausted { name: &'static str, len: usize },

    #[error("insufficient range: need N >= {required}, got {got}")]
    InsufficientRange { required: u64, got: u64 },

    #[error("malformed dimension list: {0}")]
    MalformedDimensions(String),

    #[error("dynamic programme infeasible: {0}")]
    Infeasible(String),

    #[error("no horizon <= {cap} reached the target {target} at level {level} ({built} levels built)")]
    CapExceeded {
        cap: u64,
        target: f64,
        level: usize,
        built: usize,
    },

    #[error("second-moment ratio undefined: no interval contributes")]
    Undefined,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
