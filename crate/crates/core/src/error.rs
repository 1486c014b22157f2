use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Instance exceeds an enumeration or memory budget.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    /// A structural invariant of an input object does not hold.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },
    /// Probability measure cannot be normalized (all weights vanish).
    #[error("degenerate measure: {0}")]
    Degenerate(String),
    /// Iterative solver did not reach its tolerance.
    #[error("did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Error {
    Error::Invalid {
        what,
        why: why.into(),
    }
}
