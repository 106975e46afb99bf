//! Crate-wide error type.
//!
//! The CLI maps these onto exit codes: invalid input -> 2, numerics fault -> 3,
//! underpowered or capped statistics -> 4.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition or type invariant was violated by the caller.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// An internal numerical routine failed to converge or went unstable.
    #[error("numerics fault: {0}")]
    Numerics(String),

    /// A statistical result exists but is too weak to report (capped
    /// replicates, too few survivors, ...).
    #[error("underpowered statistics: {0}")]
    Underpowered(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn numerics(msg: impl Into<String>) -> Self {
        Error::Numerics(msg.into())
    }

    pub fn underpowered(msg: impl Into<String>) -> Self {
        Error::Underpowered(msg.into())
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Config(_) | Error::Io(_) => 2,
            Error::Numerics(_) => 3,
            Error::Underpowered(_) => 4,
        }
    }
}
