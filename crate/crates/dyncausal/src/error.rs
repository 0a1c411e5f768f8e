//! Crate-wide error type.

use std::fmt;

/// Errors produced by data loading, validation, and estimation.
#[derive(Debug)]
pub enum Error {
    /// Invalid argument or configuration.
    InvalidInput(String),
    /// A cell of an input file failed to parse. Row and column are 1-based;
    /// row 1 is the first data row below the header.
    Parse {
        row: usize,
        col: usize,
        message: String,
    },
    /// A value that must be finite was NaN or infinite.
    NonFinite { row: usize, col: usize },
    /// Operand shapes do not agree.
    DimensionMismatch(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl Error {
    pub fn invalid_input(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub fn dimension_mismatch(message: impl Into<String>) -> Self {
        Error::DimensionMismatch(message.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Parse { row, col, message } => {
                write!(f, "parse error at row {row}, column {col}: {message}")
            }
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
