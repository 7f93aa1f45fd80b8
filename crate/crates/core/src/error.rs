use thiserror::Error;

/// Errors produced by the lattice toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Fixed-point value or intermediate left the signed 64-bit range.
    #[error("fixed-point range exceeded: {0}")]
    Range(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("length mismatch: expected {expected} sites, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("malformed state file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Range(_) => "range",
            Error::State(_) => "state",
            Error::Length { .. } => "length",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Length { expected, actual })
    }
}
