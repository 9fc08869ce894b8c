use thiserror::Error;

/// Errors produced by the estimators, the variance lab and the FEM solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TmcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample stream too short: need {needed} values, have {available}")]
    InsufficientStream { needed: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("argument {value} outside the open interval (0, 1)")]
    Domain { value: f64 },

    #[error("at least two replications are required, got {0}")]
    TooFewReplications(usize),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, TmcError>;
