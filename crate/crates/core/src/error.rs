use crate::network::Network;

/// Errors raised anywhere in the lab.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input shape error: expected width {expected}, got {got}")]
    InputShape { expected: usize, got: usize },
    #[error("width mismatch: {0}")]
    WidthMismatch(String),
    #[error("activation mismatch: {0}")]
    ActivationMismatch(String),
    #[error("unsupported construction: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("domain mismatch: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("training diverged: {message}")]
    Divergence {
        message: String,
        /// Parameters of the last iterate whose loss was finite.
        last_stable: Box<Network>,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
