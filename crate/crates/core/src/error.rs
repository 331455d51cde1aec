use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("corrupted state: {0}")]
    CorruptedState(String),

    #[error("numeric failure at k={k}: {reason}")]
    Numeric { k: usize, reason: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
