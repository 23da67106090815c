use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid participant id {0:?}")]
    InvalidParticipant(String),

    #[error("no valid gaze samples")]
    EmptyInput,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("insufficient events: {0}")]
    InsufficientEvents(String),

    #[error("dataset is missing a class: {0}")]
    ClassMissing(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("SMO did not converge after {iterations} iterations (max KKT violation {violation:.3e})")]
    Convergence { iterations: usize, violation: f64 },

    #[error("ranking contains no positive items")]
    NoPositives,

    #[error("need at least 2 participants, found {0}")]
    InsufficientParticipants(usize),

    #[error("out of range: {0}")]
    Range(String),

    #[error("label has no variance")]
    NoVariance,

    #[error("not found: {0}")]
    NotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
