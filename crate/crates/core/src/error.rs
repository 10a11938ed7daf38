use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root bracket failure: {0}")]
    Bracket(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("matrix size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("resolution too coarse: estimated error {estimate:e} above tolerance {tolerance:e}")]
    Resolution { estimate: f64, tolerance: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
