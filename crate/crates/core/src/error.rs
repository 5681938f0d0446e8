use thiserror::Error;

/// Errors raised by the chain analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An index, cut, interval or parameter lies outside its admissible range.
    #[error("out of range: {0}")]
    Range(String),
    /// Input data violates a documented invariant.
    #[error("invalid input: {0}")]
    Validation(String),
    /// A dense object would exceed the configured memory or solver cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A numerical procedure failed to converge or a cross-check disagreed.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// A bound is not defined for the given arguments (e.g. logarithm of zero).
    #[error("bound undefined: {0}")]
    BoundUndefined(String),
    /// Too few data points to carry out a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
