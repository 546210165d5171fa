use thiserror::Error;

/// Errors produced by the phase-space model and its operators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented precondition.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two fields that must share grids do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An operator precondition on field values does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The scheme produced a non-finite value.
    #[error("non-finite value produced at step {step}")]
    NonFinite { step: usize },

    /// Snapshot encoding or decoding failed.
    #[error("snapshot format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
