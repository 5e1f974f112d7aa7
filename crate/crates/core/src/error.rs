use thiserror::Error;

/// Errors produced by stream ingestion, estimation and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV row could not be ingested. `row` is the 1-based data row number
    /// (the header is row 0).
    #[error("parse error at row {row}: {reason}")]
    Parse { row: usize, reason: String },

    /// An answer normalized to the empty string.
    #[error("blank answer")]
    BlankAnswer,

    /// An operation that needs at least one record was given an empty stream.
    #[error("no samples")]
    EmptyStream,

    /// An operation that needs duplication information was given fewer than
    /// two samples.
    #[error("needs two samples")]
    NeedsTwoSamples,

    /// `prefix` was asked for more records than the stream holds.
    #[error("prefix length {requested} exceeds stream length {available}")]
    PrefixOutOfRange { requested: usize, available: usize },

    /// A frequency statistic or estimator precondition was violated.
    #[error("invalid statistics: {0}")]
    InvalidStatistics(String),

    /// A configuration value is outside its documented domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A list-walk probability was requested for an empty cohort.
    #[error("empty cohort")]
    EmptyCohort,

    /// A simulation request cannot be satisfied, e.g. more without-replacement
    /// draws than there are items.
    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
