//! Exact-analysis reports for explicit models.

use std::collections::BTreeMap;
use std::path::Path;

use maac_core::{FnPolicy, History, Policy};
use maac_envs::{build_model, is_explicit, EnvError, EnvParams};
use maac_exact::{Analysis, ChainStructure, ExactReport, PolicyTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

/// Per-agent action probabilities keyed by history as printed in reports
/// (`<>`, `<o1>`, `<a0o1 a2o0>`); histories not listed use `default`, or
/// the uniform distribution when that is absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub agents: Vec<AgentPolicy>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentPolicy {
    #[serde(default)]
    pub default: Option<Vec<f64>>,
    #[serde(default)]
    pub histories: BTreeMap<String, Vec<f64>>,
}

pub enum PolicySource {
    Uniform,
    File(PolicyFile),
}

impl PolicySource {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let file = serde_json::from_str(&text).map_err(|e| HarnessError::Spec(e.to_string()))?;
        Ok(Self::File(file))
    }
}

pub const CONTRACTION_PAIRS: usize = 100;

/// Run the exact analysis of `name` under the given policies and memory.
pub fn exact_report(
    name: &str,
    params: &EnvParams,
    source: &PolicySource,
    k: usize,
    seed: u64,
) -> Result<ExactReport> {
    if !is_explicit(name) {
        return Err(match build_model(name, params) {
            Err(EnvError::UnknownEnv(n)) => EnvError::UnknownEnv(n).into(),
            _ => HarnessError::UnsupportedEnvironment(name.to_string()),
        });
    }
    let model = build_model(name, params)?;
    let chain = ChainStructure::build(&model, k)?;
    let table = match source {
        PolicySource::Uniform => PolicyTable::uniform(&chain),
        PolicySource::File(file) => {
            if file.agents.len() != model.num_agents() {
                return Err(HarnessError::Spec(format!(
                    "policy file lists {} agents, model has {}",
                    file.agents.len(),
                    model.num_agents()
                )));
            }
            let policies: Vec<_> = file
                .agents
                .iter()
                .enumerate()
                .map(|(i, ap)| {
                    let n = model.num_actions(i);
                    FnPolicy::new(n, move |h: &History| {
                        ap.histories
                            .get(&h.to_string())
                            .or(ap.default.as_ref())
                            .cloned()
                            .unwrap_or_else(|| vec![1.0 / n as f64; n])
                    })
                })
                .collect();
            let refs: Vec<&dyn Policy> = policies.iter().map(|p| p as &dyn Policy).collect();
            PolicyTable::new(&chain, &refs)?
        }
    };
    let analysis = Analysis::new(chain, table)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(analysis.report(CONTRACTION_PAIRS, &mut rng)?)
}

/// Write `report.json` and the long-format `report.csv` into `dir`.
pub fn write_report(report: &ExactReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let json = dir.join("report.json");
    std::fs::write(&json, report.to_json()).map_err(io_err(&json))?;
    let csv_path = dir.join("report.csv");
    let file = std::fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(crate::aggregate::LONG_HEADER)?;
    for (run, step, metric, value) in report.csv_rows() {
        w.write_record([run.to_string(), step.to_string(), metric, value.to_string()])?;
    }
    w.flush().map_err(io_err(&csv_path))?;
    Ok(())
}
