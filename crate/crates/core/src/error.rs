use thiserror::Error;

pub type Result<T> = std::result::Result<T, TarlError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TarlError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("not enough samples: have {have}, need {need}")]
    NotEnoughSamples { have: usize, need: usize },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

impl TarlError {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        TarlError::Shape(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        TarlError::Argument(msg.into())
    }
}
