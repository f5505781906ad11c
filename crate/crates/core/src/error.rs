use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {context}: {message}")]
    Domain { context: &'static str, message: String },

    /// A computed quantity violated a contract it is required to satisfy
    /// (mass drift, tolerance overrun, grid mismatch).
    #[error("inconsistency in {context}: {message}")]
    Inconsistency { context: &'static str, message: String },

    /// Monte Carlo sampling could not produce a valid sample.
    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { context, message: message.into() }
    }

    pub fn inconsistency(context: &'static str, message: impl Into<String>) -> Self {
        Error::Inconsistency { context, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
