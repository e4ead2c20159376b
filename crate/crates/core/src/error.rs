use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root finder failed to bracket a sign change: {0}")]
    Bracketing(String),

    #[error("root finder did not reach the residual target: {0}")]
    RootResidual(String),

    #[error("empty sample")]
    EmptySample,

    #[error("dimension {dim} unsupported for this operation (max {max})")]
    UnsupportedDim { dim: usize, max: usize },

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("operation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
