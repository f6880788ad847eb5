use thiserror::Error;

#[derive(Debug, Error)]
pub enum JlError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("malformed transform file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, JlError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(JlError::InvalidArgument(msg.into()))
}
