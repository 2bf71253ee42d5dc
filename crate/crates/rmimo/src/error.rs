//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario or search configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An input value is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix or vector dimensions do not match the operation's contract.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The effective channel is rank deficient and cannot be zero-forced.
    #[error("singular channel: {0}")]
    Singular(String),

    /// An exhaustive search was requested over a space larger than its limit.
    #[error("search space too large: {0}")]
    SearchSpace(String),

    /// A serialized dump is malformed or has an unsupported version.
    #[error("invalid dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
