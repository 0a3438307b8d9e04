use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("no records")]
    NoRecords,

    #[error("row {row}: expected {expected} fields, found {found}")]
    MalformedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a real number")]
    ParseContinuous {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column `{column}`: unknown level `{value}`")]
    UnknownLevel {
        row: usize,
        column: String,
        value: String,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("need >=2 variables, got {0}")]
    TooFewVariables(usize),

    #[error("column `{column}` typed binary but has {levels} levels")]
    NotBinary { column: String, levels: usize },

    #[error("need at least 2 complete windows of {window_len} rows, table has {rows} rows")]
    TooFewWindows { rows: usize, window_len: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate variance for pair ({0}, {1})")]
    DegenerateVariance(String, String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("horizon {0} exceeds the 62-bit integer code width")]
    HorizonOverflow(usize),

    #[error("code {code} out of range for horizon {horizon}")]
    CodeOutOfRange { code: u64, horizon: usize },

    #[error("transition index {0} not present in dataset")]
    UnknownTransition(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
