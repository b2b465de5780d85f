use thiserror::Error;

/// Errors produced by type constructors and solvers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum AgwError {
    /// An argument violates a precondition (bad value, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Matrix/vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, AgwError>;

impl AgwError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        AgwError::InvalidArgument(msg.into())
    }

    pub fn dims(msg: impl Into<String>) -> Self {
        AgwError::DimensionMismatch(msg.into())
    }
}
