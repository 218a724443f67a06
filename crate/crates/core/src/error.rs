use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its declared domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes of two inputs do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Data violates a type invariant (non-finite value, non-unit row, missing class, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Malformed file contents.
    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// An internal postcondition failed. Indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller's input rather than a bug.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}
