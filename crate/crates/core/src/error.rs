use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix data length {len} does not match shape {rows}x{cols}")]
    BadLength {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sampling weight {index} is not strictly positive ({value})")]
    ZeroWeight { index: usize, value: f64 },

    #[error("reference solution has zero Frobenius norm; use an absolute error instead")]
    ZeroReference,

    #[error("{matrix} has an all-zero row {index}")]
    ZeroRow { matrix: char, index: usize },

    #[error("{matrix} has an all-zero column {index}")]
    ZeroColumn { matrix: char, index: usize },

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("Kronecker system of {rows}x{cols} exceeds the desk-scale limit of {limit} entries")]
    TooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("invalid solver configuration: {0}")]
    BadConfig(String),

    #[error("invalid problem specification: {0}")]
    BadSpec(String),

    #[error("invalid shape: {0}")]
    BadShape(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: entry ({row}, {col}) lies outside the declared {rows}x{cols} shape")]
    Dimension {
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("line {line}: duplicate entry ({row}, {col})")]
    DuplicateEntry { line: usize, row: usize, col: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
