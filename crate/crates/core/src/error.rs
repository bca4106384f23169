use thiserror::Error;

/// Errors raised by the modelling, learning and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no CV entry for class label {0}")]
    UnknownClass(u8),

    #[error("study validation failed for subject {subject}, step {step}: {reason}")]
    Study {
        subject: String,
        step: usize,
        reason: String,
    },

    #[error("non-positive homeostatic estimate {value} for subject {subject}, feature {feature}")]
    NonPositiveHomeostatic {
        subject: String,
        feature: String,
        value: f64,
    },

    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("feature mismatch: missing from profile {missing_in_profile:?}, missing from data {missing_in_data:?}")]
    FeatureMismatch {
        missing_in_profile: Vec<String>,
        missing_in_data: Vec<String>,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
