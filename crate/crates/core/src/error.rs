use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("depth mismatch: need depth {required}, have {actual}")]
    DepthMismatch { required: u32, actual: u32 },

    #[error("level mismatch: expected level {expected}, found {found}")]
    LevelMismatch { expected: u32, found: u32 },

    #[error("level {level} must have {expected} entries, got {found}")]
    EntryCount { level: u32, expected: usize, found: usize },

    #[error("averaging constraint violated at level {level}, index {index} (residual {residual:e})")]
    ConstraintViolation { level: u32, index: u64, residual: f64 },

    #[error("depth {0} exceeds the supported maximum of {max}", max = crate::tree::MAX_DEPTH)]
    TooDeep(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("at most {max} events per joint table, got {found}")]
    TooManyEvents { max: usize, found: usize },

    #[error("need at least {min} samples, got {found}")]
    InsufficientSamples { min: usize, found: usize },

    #[error("set has estimated measure indistinguishable from zero")]
    NullSet,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
