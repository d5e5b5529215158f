use thiserror::Error;

/// Errors raised by the placement, channel and rate routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("channel Gram matrix is numerically singular (condition number {condition:.3e})")]
    SingularChannel { condition: f64 },

    #[error("{skipped} of {trials} Monte-Carlo trials hit a singular channel")]
    TooManySingular { skipped: usize, trials: usize },

    #[error("exhaustive grid has {points} points, budget is {budget}")]
    GridTooLarge { points: usize, budget: usize },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
