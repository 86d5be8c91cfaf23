use thiserror::Error;

/// Errors raised by model construction, solvers and reductions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A value lies outside the domain of the operation (e.g. a position
    /// beyond a relation's arity, or a variable foreign to an instance).
    #[error("domain error: {0}")]
    Domain(String),
    /// The operation was invoked on an input it is not defined for.
    #[error("usage error: {0}")]
    Usage(String),
    /// The method's structural precondition does not hold for the instance.
    #[error("not applicable: {0}")]
    NotApplicable(String),
    /// A brute-force bound was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A document failed validation; `path` names the offending field.
    #[error("invalid document at {path}: {message}")]
    Invalid { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
