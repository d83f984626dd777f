use std::path::PathBuf;

use thiserror::Error;

use crate::optimize::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("great-circle interpolation is undefined between antipodal points")]
    Antipodal,

    #[error("model has {vars} variables, above the exact-solver cap of {cap}; use the greedy or export backend")]
    SizeCap { vars: usize, cap: usize },

    #[error("model is infeasible")]
    Infeasible,

    #[error("LP relaxation is unbounded")]
    Unbounded,

    #[error("simplex iteration limit reached")]
    IterationLimit,

    #[error("solution rejected: {0}")]
    Rejected(Violation),

    #[error("solution file: unknown variable `{0}`")]
    UnknownVariable(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
