//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid LUT resolution {0}: must be at least 2")]
    InvalidResolution(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("truncated data: expected {expected} entries, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    #[error("token index {index} out of range for codebook of size {k}")]
    TokenOutOfRange { index: usize, k: usize },

    #[error("codebook hash mismatch: record has {record}, loaded codebook is {loaded}")]
    CodebookHashMismatch { record: String, loaded: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("reward unavailable: {0}")]
    RewardUnavailable(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("image error: {0}")]
    Image(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
