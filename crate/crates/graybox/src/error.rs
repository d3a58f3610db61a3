use std::io;

/// Failures of the file formats and the benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("inconsistent dimensions: {0}")]
    DimensionInconsistency(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("trailing data: {0} bytes after the last layer")]
    TrailingData(usize),
    #[error("pixel {index} has value {value}, outside [0, 1]")]
    PixelOutOfRange { index: usize, value: f64 },
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] graybox_core::Error),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;
