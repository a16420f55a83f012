use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("measures indistinguishable up to the moment cap (all moments match)")]
    AllMatch,

    #[error("pair generation failed after {retries} retries")]
    GenerationFailed { retries: usize },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("resource budget exceeded: {0}")]
    Budget(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
