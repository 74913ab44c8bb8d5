use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("output directory {0} is not empty; pass --force to overwrite")]
    OutputExists(PathBuf),
    #[error("environment `{0}` has no explicit model")]
    UnsupportedEnvironment(String),
    #[error("CSV schema mismatch in: {}", .0.join(", "))]
    Schema(Vec<String>),
    #[error("no aggregates to plot")]
    NothingToPlot,
    #[error(transparent)]
    Env(#[from] maac_envs::EnvError),
    #[error(transparent)]
    Exact(#[from] maac_exact::ExactError),
    #[error(transparent)]
    Train(#[from] maac_learners::TrainError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
