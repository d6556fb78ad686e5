use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Encoding { path: PathBuf, offset: usize },

    #[error("{path}: unknown column `{column}` (header has: {available})")]
    UnknownColumn {
        path: PathBuf,
        column: String,
        available: String,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("model format version {found} is not supported (expected {expected})")]
    Version { found: String, expected: u32 },

    #[error("{0}")]
    Precondition(String),

    #[error("grid point n_set={n_set} t_mc={t_mc} t_tm={t_tm} failed: {source}")]
    GridPoint {
        n_set: String,
        t_mc: f64,
        t_tm: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    /// Process exit status for this error: 2 for broken invariants, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            Error::GridPoint { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
