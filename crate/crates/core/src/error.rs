use thiserror::Error;

/// Errors raised by the geometry, objective, policy and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed arguments: dimension mismatch, non-finite values, bad step size.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A point lies outside the domain where the requested quantity exists.
    #[error("domain error: {0}")]
    Domain(String),
    /// The caller broke an operation's precondition (e.g. proposing a step at a zero gradient).
    #[error("contract violation: {0}")]
    Contract(String),
    /// An objective or policy could not be built from the given parameters.
    #[error("construction error: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
