use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }
}

/// A trajectory whose state stopped being finite.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("non-finite trajectory state at t = {time}")]
pub struct BlowUp {
    pub time: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("record has {found} grid points, accumulator expects {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error("record tracks jump counts up to {found}, accumulator up to {expected}")]
    JumpCapMismatch { expected: usize, found: usize },
    #[error("accumulator is empty")]
    Empty,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{aborted} of {total} trajectories aborted (limit {limit}); first: {first}")]
    AbortRate {
        aborted: usize,
        total: usize,
        limit: usize,
        first: BlowUp,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}
