//! Error type shared by every module in this crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A layer or head dimension is zero or the dimension chain is broken.
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    /// Vector/matrix shapes do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A value is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A feature column is constant on the fitting indices, so it cannot be z-scored.
    #[error("degenerate feature: {0}")]
    DegenerateFeature(String),

    /// The truth vector is constant, so R² is undefined.
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    /// The candidate pool is empty; acquisition cannot continue.
    #[error("pool exhausted")]
    PoolExhausted,

    /// A CSV file failed to parse. Line numbers are 1-based and count the header.
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
