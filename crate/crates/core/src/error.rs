use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch in {context}: expected {expected}, got {actual}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{what} of size {size} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// KL(p || q) is +inf: p puts mass on a cell where q has none.
    #[error("absolute continuity violated at cell {index}: p = {p}, q = 0 (divergence is infinite)")]
    AbsoluteContinuity { index: usize, p: f64 },

    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported combination: {subject} with {object}: {reason}")]
    Unsupported {
        subject: String,
        object: String,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },
}

impl Error {
    /// Errors caused by the caller's configuration or inputs, as opposed to
    /// failures while running.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Unsupported { .. }
                | Error::TooLarge { .. }
                | Error::Parse { .. }
                | Error::Csv { .. }
                | Error::InvalidArgument(_)
        )
    }

    pub(crate) fn unsupported(
        subject: impl Into<String>,
        object: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Error::Unsupported {
            subject: subject.into(),
            object: object.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
