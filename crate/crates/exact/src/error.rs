use maac_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("history chain has more than {limit} nodes; reduce k or the model size")]
    TooLarge { limit: usize },

    #[error("steady-state system is singular or ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("power iteration did not settle after {iterations} sweeps (change {change:e})")]
    PowerIteration { iterations: usize, change: f64 },

    #[error("fixed point not reached after {iterations} iterations (residual {residual:e}); recent residuals {trace:?}")]
    NotConverged {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("policy for agent {agent} has {got} actions, model expects {expected}")]
    ActionCount {
        agent: usize,
        expected: usize,
        got: usize,
    },

    #[error("policy for agent {agent} at history {history} is not a distribution (sum {sum})")]
    BadDistribution {
        agent: usize,
        history: String,
        sum: f64,
    },

    #[error("table shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, ExactError>;
