use thiserror::Error;

/// Errors raised by the optimizers, objectives and the run harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite value at index {index} in {context}")]
    NonFinite { index: usize, context: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown objective id `{0}`")]
    UnknownObjective(String),

    #[error("unknown optimizer id `{0}`")]
    UnknownOptimizer(String),

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("invalid value `{value}` for `{key}`")]
    InvalidValue { key: String, value: String },

    #[error("invalid box constraint: {0}")]
    InvalidBox(String),

    #[error("empty vector: dimension must be at least 1")]
    EmptyVector,

    #[error("race needs specs sharing one objective and start: {0}")]
    MismatchedRace(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for OptError {
    fn from(e: std::io::Error) -> Self {
        OptError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, OptError>;
