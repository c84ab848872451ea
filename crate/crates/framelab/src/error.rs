use thiserror::Error;

/// Errors surfaced by measure construction and evaluation.
#[derive(Debug, Error)]
pub enum FrameError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation not supported for this measure kind: {0}")]
    UnsupportedKind(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown catalog entry: {0}")]
    UnknownEntry(String),
}

impl From<serde_json::Error> for FrameError {
    fn from(e: serde_json::Error) -> Self {
        FrameError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FrameError>;
