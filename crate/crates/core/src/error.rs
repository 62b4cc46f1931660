use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("item index {index} is out of range for a ground set of {n} items")]
    InvalidSubset { index: usize, n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested exhaustive computation is beyond the configured bound.
    #[error("{what}: size {size} exceeds the exhaustive bound {limit}")]
    Capability {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A checked mathematical guarantee failed at runtime.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("LP solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn capability(what: &'static str, size: usize, limit: usize) -> Self {
        Error::Capability { what, size, limit }
    }

    /// True for errors the CLI reports with the capability exit code.
    pub fn is_capability(&self) -> bool {
        matches!(self, Error::Capability { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
