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

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("missing value in column `{column}` at row {row}")]
    MissingValue { column: String, row: usize },

    #[error("column `{column}` is not numeric: value `{value}` at row {row}")]
    NotNumeric {
        column: String,
        row: usize,
        value: String,
    },

    #[error("target not binary: column `{column}` has {found} distinct labels")]
    TargetNotBinary { column: String, found: usize },

    #[error("positive label `{label}` does not occur in target column `{column}`")]
    UnknownPositiveLabel { column: String, label: String },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("class `{label}` has {count} rows, at least 2 are required")]
    ClassTooSmall { label: String, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("invalid registry: {0}")]
    InvalidRegistry(String),

    #[error("invalid characterization: {0}")]
    InvalidCharacterization(String),

    #[error("rule tree leaf order is missing candidate `{0}`")]
    LeafMissingCandidate(String),

    #[error("algorithm `{algorithm}` has {count} experience pairs, at least 2 are required")]
    InsufficientExperience { algorithm: String, count: usize },

    #[error("recall undefined: no positive examples")]
    NoPositives,

    #[error("not a permutation of 1..{0}")]
    NotPermutation(usize),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("dataset `{dataset}`, algorithm `{algorithm}`, repetition {repetition}: {source}")]
    Cell {
        dataset: String,
        algorithm: String,
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset `{dataset}`: {source}")]
    Dataset {
        dataset: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn in_dataset(self, dataset: &str) -> Self {
        Error::Dataset {
            dataset: dataset.to_string(),
            source: Box::new(self),
        }
    }
}
