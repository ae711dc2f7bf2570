use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or unsupported configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed external data (tabulated potential files, etc.).
    #[error("format error: {0}")]
    Format(String),

    /// Data failed a consistency check against its declared metadata.
    #[error("validation error: {0}")]
    Validation(String),

    /// Index past the available range.
    #[error("index error: {0}")]
    Index(String),

    /// Required derived state is missing (e.g. profile coefficients).
    #[error("state error: {0}")]
    State(String),

    /// I/O failure while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
