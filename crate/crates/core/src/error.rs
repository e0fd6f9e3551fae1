use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input while reading a dataset; `line` is 1-based and counts the header.
    #[error("ingest error at line {line}: {message}")]
    Ingest { line: u64, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// No admissible assignment of groups to the train and test sides.
    #[error("group partition failed: {0}")]
    Partition(String),

    /// Input is too degenerate for the requested computation.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
