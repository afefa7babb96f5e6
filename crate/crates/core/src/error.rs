//! Error type shared across the library.

use thiserror::Error;

use crate::data::Label;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column '{column}': cannot parse '{value}' as a finite number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("label column '{0}' not found")]
    MissingLabelColumn(String),

    #[error("need at least 2 data rows, found {found}")]
    TooFewRows { found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("training data has a single class, need at least 2")]
    SingleClass,

    #[error("class '{label}' has {size} samples, fewer than the required {required}")]
    ClassTooSmall {
        label: Label,
        size: usize,
        required: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("report mismatch: {0}")]
    ReportMismatch(String),
}
