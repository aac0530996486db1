use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller passed inconsistent arguments (dimension mismatch, unknown id, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// Mathematically undefined request, such as inverting zero.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// An enumeration or table would exceed its configured guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Observations are inconsistent with the code.
    #[error("contradiction: {0}")]
    Contradiction(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
