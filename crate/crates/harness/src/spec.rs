//! Experiment specification files and grid expansion.

use std::collections::BTreeMap;
use std::path::PathBuf;

use maac_envs::{EnvParams, ENV_NAMES};
use maac_learners::{Algorithm, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HarnessError, Result};

fn default_runs() -> usize {
    20
}

fn default_window() -> usize {
    64
}

/// JSON experiment description.
///
/// `config` overrides [`TrainConfig`] defaults. `grid` maps a key to a list
/// of values; keys name a config field, or an environment parameter when
/// prefixed with `env.`. Every combination becomes one cell per algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub env: String,
    #[serde(default)]
    pub env_params: EnvParams,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub config: serde_json::Map<String, Value>,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Value>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub parallelism: Option<usize>,
    /// Rollouts per sliding window of the gradient-variance series.
    #[serde(default = "default_window")]
    pub gradient_window: usize,
}

/// One algorithm at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub tag: String,
    pub algorithm: Algorithm,
    pub grid: BTreeMap<String, Value>,
    pub config: TrainConfig,
    pub env_params: EnvParams,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Spec(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if !ENV_NAMES.contains(&self.env.as_str()) {
            return bad(format!("unknown environment `{}`", self.env));
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty".into());
        }
        if self.gradient_window < 2 {
            return bad("gradient_window must be at least 2".into());
        }
        if self.parallelism == Some(0) {
            return bad("parallelism must be at least 1".into());
        }
        for (key, values) in &self.grid {
            if values.is_empty() {
                return bad(format!("grid key `{key}` has no values"));
            }
            if key == "algorithm" || key == "seed" {
                return bad(format!("grid key `{key}` is set elsewhere in the spec"));
            }
        }
        self.cells()?;
        Ok(())
    }

    /// Cross product of algorithms and grid values, in a fixed order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut points: Vec<BTreeMap<String, Value>> = vec![BTreeMap::new()];
        for (key, values) in &self.grid {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        let mut cells = Vec::new();
        for &algorithm in &self.algorithms {
            for point in &points {
                let mut config = self.config.clone();
                let mut env_params = self.env_params.clone();
                for (key, v) in point {
                    match key.strip_prefix("env.") {
                        Some(p) => env_params.insert(p.to_string(), v.clone()),
                        None => config.insert(key.clone(), v.clone()),
                    };
                }
                config.insert("algorithm".into(), serde_json::to_value(algorithm)?);
                let config: TrainConfig = serde_json::from_value(Value::Object(config))
                    .map_err(|e| HarnessError::Spec(format!("config: {e}")))?;
                config
                    .validate()
                    .map_err(|e| HarnessError::Spec(e.to_string()))?;
                let mut tag = algorithm.name().to_string();
                for (key, v) in point {
                    tag.push_str(&format!("_{key}={}", value_label(v)));
                }
                cells.push(Cell {
                    tag,
                    algorithm,
                    grid: point.clone(),
                    config,
                    env_params,
                });
            }
        }
        Ok(cells)
    }
}

fn value_label(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    raw.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '-' })
        .collect()
}
