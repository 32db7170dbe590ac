use thiserror::Error;

/// Errors from model construction, calibration and inference.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("calibration did not converge: {0}")]
    NoConvergence(String),

    #[error("grid maximum check failed: {0}")]
    GridMaximum(String),

    #[error("privacy budget too small for the three-way selection split")]
    BudgetTooSmall,

    #[error("csv error at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
