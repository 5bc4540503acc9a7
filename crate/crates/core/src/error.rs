use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite input value at index {index}")]
    NonFiniteInput { index: usize },

    #[error("model has no learned class")]
    EmptyModel,

    #[error("empty variant list")]
    EmptyVariants,

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unsupported format version {found:?}, expected {expected:?}")]
    VersionMismatch { expected: String, found: String },

    #[error("truncated file: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("corrupt payload: {0}")]
    CorruptPayload(String),

    #[error("line {line}: expected {expected} fields, found {actual}")]
    RaggedRow {
        line: u64,
        expected: usize,
        actual: usize,
    },

    #[error("line {line}, column {col}: not a number: {value:?}")]
    NonNumericCell {
        line: u64,
        col: usize,
        value: String,
    },

    #[error("line {line}: empty label")]
    EmptyLabel { line: usize },

    #[error("{features} feature vectors but {labels} labels")]
    LabelCountMismatch { features: usize, labels: usize },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("empty data split")]
    EmptySplit,

    #[error("unknown method {0:?}")]
    UnknownMethod(String),

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("cannot stratify: class {label:?} has {count} examples for {parts} parts")]
    StratificationImpossible {
        label: String,
        count: usize,
        parts: usize,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
