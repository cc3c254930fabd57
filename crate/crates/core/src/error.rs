//! Error types shared across the toolkit.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula diverges at the requested operating point (threshold crossing).
    #[error("divergence: {0}")]
    Divergence(String),

    /// A measurement is self-inconsistent (e.g. raw noise below the electronic floor).
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    /// Combined inputs are mutually inconsistent (e.g. back-out efficiency above one).
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    /// A configuration file could not be parsed or validated.
    #[error("config error at line {line}, key `{key}`: {reason}")]
    Config {
        key: String,
        line: usize,
        reason: String,
    },

    /// A CSV data file could not be parsed or validated.
    #[error("data error at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn quadrature(msg: impl Into<String>) -> Self {
        Error::Quadrature(msg.into())
    }
}
