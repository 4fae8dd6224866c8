use thiserror::Error;

/// Errors raised by the numerical kernel and the estimators built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GcnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for simplex with {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("scale undefined: simplex has a zero-length edge")]
    UndefinedScale,

    #[error(
        "enumeration of {required:e} tuple evaluations exceeds the cap of {cap:e}; \
         use monte-carlo mode (--mode mc) or raise the cap"
    )]
    CapExceeded { required: f64, cap: f64 },

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),
}

pub type Result<T> = std::result::Result<T, GcnError>;
