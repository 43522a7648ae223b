use thiserror::Error;

/// Failures surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unsupported shape: {0}")]
    Shape(String),
    #[error("item index {index} out of range for {len} items")]
    Index { index: usize, len: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("invalid confidence policy: {0}")]
    InvalidPolicy(String),
    #[error("internal invariant violated: {0}")]
    Bug(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
