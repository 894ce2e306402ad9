use thiserror::Error;

/// Errors raised by the harmonic-analysis and field layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: String, found: String },

    #[error("band limit must be at least {min}, got {got}")]
    InvalidBand { min: usize, got: usize },

    #[error("invalid irrep label: {0}")]
    InvalidLabel(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient replicates: need at least {min}, got {got}")]
    TooFewReplicates { min: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DomainMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
