use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Caller passed a value outside the accepted domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An input violated a documented precondition (non-unitary operator,
    /// non-orthonormal basis, unnormalized state).
    #[error("contract violation: {0}")]
    ContractViolation(String),
    /// Internal consistency check failed while building a table.
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }
}
