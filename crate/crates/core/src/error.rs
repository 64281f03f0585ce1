use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or degrees of the arguments do not fit together.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Parameters outside the domain where the construction is defined.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget { what: String, needed: u128, limit: u128 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid tree decomposition: {0}")]
    TreeDecomposition(String),
    /// A result that must be exact by construction was not (signals a bug).
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("no verified family after {attempts} attempts")]
    Resample { attempts: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn budget(what: impl Into<String>, needed: u128, limit: u128) -> Self {
        Error::Budget { what: what.into(), needed, limit }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
