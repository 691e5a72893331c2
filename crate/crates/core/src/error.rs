use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("empty domain")]
    EmptyDomain,

    #[error("geometry violation: {0}")]
    Geometry(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("operation not supported in dimension {dim}: {what}")]
    UnsupportedDim { dim: usize, what: &'static str },

    #[error("coincident points in kernel evaluation")]
    CoincidentPoints,

    #[error("operator spec violates its comparability bounds: {what} (sample: {sample})")]
    SpecProbe { what: String, sample: String },

    #[error("empty test-function dictionary")]
    EmptyDictionary,

    #[error("exterior constraint violated at node {node}: {value} != {expected}")]
    ExteriorConstraint {
        node: usize,
        value: f64,
        expected: f64,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason: reason.into(),
    }
}
