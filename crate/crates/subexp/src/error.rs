use thiserror::Error;

/// Errors raised by the expectation, capacity and convergence machinery.
#[derive(Debug, Clone, Error)]
pub enum SubexpError {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("measure family must contain at least one measure")]
    EmptyFamily,

    #[error("invalid probability vector for measure {index}: {reason}")]
    InvalidProbabilities { index: usize, reason: String },

    #[error("non-finite {what} at position {index}: {value}")]
    NonFinite {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("invalid parameter {name} = {value}: must satisfy {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("test function arity mismatch: expected {expected} arguments, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("state space too large: about {estimated} states exceeds the {limit} guard")]
    StateSpaceExceeded { estimated: u128, limit: u64 },

    #[error("sequence term {index} violates the mean precondition: upper mean {mean} > 0")]
    MeanSignPrecondition { index: usize, mean: f64 },

    #[error(
        "sequence term {index} violates mean equality: upper mean {upper}, lower mean {lower}, required {required}"
    )]
    MeanEqualityPrecondition {
        index: usize,
        upper: f64,
        lower: f64,
        required: f64,
    },

    #[error("sequence too short: {len} entries, need at least {required}")]
    SequenceTooShort { len: usize, required: usize },

    #[error("sequence {index} is out of range: spec provides {available} terms")]
    TermOutOfRange { index: usize, available: usize },

    #[error("invalid {what} sequence: {reason}")]
    InvalidSequence { what: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, SubexpError>;
