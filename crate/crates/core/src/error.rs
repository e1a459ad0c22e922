use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violates the mathematical precondition of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A construction would exceed a size guard before any allocation happens.
    #[error("resource guard: {what} needs {needed}, limit is {limit}")]
    Resource {
        what: &'static str,
        needed: usize,
        limit: usize,
    },

    /// Malformed external input (group tables, measure files).
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
