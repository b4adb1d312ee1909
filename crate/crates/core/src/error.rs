use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown category '{value}' for feature '{feature}'")]
    UnknownCategory { feature: String, value: String },

    #[error("value {value} outside domain [{lo}, {hi}] of feature '{feature}'")]
    DomainViolation {
        feature: String,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("row {row}: expected {expected} columns, found {found}")]
    ArityMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("CSV header does not match schema: {0}")]
    HeaderMismatch(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("row {row}: label '{value}' is not 0 or 1")]
    InvalidLabel { row: usize, value: String },

    #[error("training data contains only class {0}")]
    DegenerateLabels(u8),

    #[error("model protocol error: {0}")]
    Protocol(String),

    #[error("model did not answer within {0} ms")]
    Timeout(u64),

    #[error("model process exited unexpectedly")]
    ChildExited,

    #[error("cannot fit a surrogate tree on an empty sample set")]
    EmptySampleSet,

    #[error("k-means with k={k} needs at least k rows, found {rows}")]
    TooFewRows { k: usize, rows: usize },

    #[error("{combinations} protected-value combinations exceed the cap of {cap}; coarsen the protected domains")]
    CombinationExplosion { combinations: u128, cap: u128 },

    #[error("schema declares no protected attributes")]
    NoProtectedAttributes,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
