use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("row {row} of the {table} table sums to {sum} (expected 1)")]
    NonStochasticRow {
        table: &'static str,
        row: usize,
        sum: f64,
    },

    #[error("agent {agent} chose action {action}, but only {num_actions} actions exist")]
    ActionOutOfRange {
        agent: usize,
        action: usize,
        num_actions: usize,
    },

    #[error("expected {expected} policies, got {got}")]
    PolicyCount { expected: usize, got: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
