use thiserror::Error;

/// Error type shared by all library operations.
///
/// `Domain` means a numeric argument lies outside the mathematical domain of
/// the operation (non-positive rate, probability outside its interval, ...).
/// `Contract` means a structural precondition was violated (wrong sequence
/// length, index out of range, too few samples, ...).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
