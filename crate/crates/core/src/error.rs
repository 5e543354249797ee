//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed dataset or embedding line (1-based line number).
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("resource error: {0}")]
    Resource(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Inconsistent input data, e.g. predictions that do not cover the gold ids.
    #[error("data error: {0}")]
    Data(String),

    #[error("unlabeled dataset")]
    Unlabeled,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("no vectors")]
    NoVectors,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("degenerate sample {index}: self-similarity {value} is not positive")]
    DegenerateSample { index: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("model file: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 2,
            Error::Resource(_) | Error::Io { .. } => 4,
            Error::NoConvergence(_) => 5,
            _ => 3,
        }
    }
}
