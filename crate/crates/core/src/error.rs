use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("clip too short: {len} samples, need at least {min}")]
    ClipTooShort { len: usize, min: usize },
    #[error("too few frames: {frames}, need at least {min}")]
    TooFewFrames { frames: usize, min: usize },
    #[error("feature streams misaligned: mel {mel}, pitch {pitch}, energy {energy}")]
    Misaligned { mel: usize, pitch: usize, energy: usize },
    #[error("corpus too small: {0}")]
    CorpusTooSmall(String),
    #[error("training diverged at epoch {epoch}: {what} is not finite")]
    Diverged { epoch: usize, what: &'static str },
    #[error("degenerate: zero variance")]
    ZeroVariance,
    #[error("missing emotion class: {0}")]
    MissingClass(&'static str),
    #[error("component count {n} out of range 1..={max}")]
    ComponentsOutOfRange { n: usize, max: usize },
    #[error("zero-norm class mean for {0}")]
    ZeroNorm(&'static str),
    #[error("unknown emotion: {0}")]
    UnknownEmotion(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn bad_config(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
