use maac_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("unknown environment `{0}`")]
    UnknownEnv(String),

    #[error("environment `{0}` has no explicit model (generative only)")]
    NotExplicit(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("map line {line}: {reason}")]
    Map { line: usize, reason: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, EnvError>;
