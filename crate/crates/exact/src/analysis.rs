//! Everything the exact engine computes for one model, memory length and
//! policy profile, plus its JSON/CSV report.

use rand::Rng;
use serde::Serialize;

use crate::bellman::{
    contraction_check, marginalize_central, solve, BellmanOperator, ContractionReport,
    ExactCriticTable,
};
use crate::chain::ChainStructure;
use crate::error::Result;
use crate::gradient::{gradient_moments, mav, mov, GradientMoments};
use crate::policy_table::PolicyTable;
use crate::steady::{steady_state, SolveMethod, SteadyState};

pub struct Analysis {
    pub chain: ChainStructure,
    pub policy: PolicyTable,
    pub steady: SteadyState,
    pub central: ExactCriticTable,
    pub decentral: Vec<ExactCriticTable>,
}

/// Per-agent comparison of the two critic types.
#[derive(Clone, Debug, Serialize)]
pub struct AgentCheck {
    pub agent: usize,
    /// Sup-norm gap between the decentralized fixed point and the
    /// marginalized centralized fixed point.
    pub marginal_residual: f64,
    /// Sup-norm gap between the centralized and decentralized mean gradients.
    pub gradient_residual: f64,
    /// Smallest per-dimension `Var_c - Var_d`.
    pub min_variance_gap: f64,
}

impl Analysis {
    pub fn new(chain: ChainStructure, policy: PolicyTable) -> Result<Self> {
        let steady = steady_state(&chain, &policy)?;
        let central = solve(&BellmanOperator::central(&chain, &policy, &steady))?;
        let decentral = (0..chain.num_agents())
            .map(|i| solve(&BellmanOperator::decentral(&chain, &policy, &steady, i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            chain,
            policy,
            steady,
            central,
            decentral,
        })
    }

    pub fn central_operator(&self) -> BellmanOperator {
        BellmanOperator::central(&self.chain, &self.policy, &self.steady)
    }

    pub fn decentral_operator(&self, agent: usize) -> BellmanOperator {
        BellmanOperator::decentral(&self.chain, &self.policy, &self.steady, agent)
    }

    pub fn marginal(&self, agent: usize) -> Vec<f64> {
        marginalize_central(&self.chain, &self.policy, &self.steady, &self.central, agent)
    }

    /// Gradient moments under the centralized and the decentralized critic.
    pub fn gradients(&self, agent: usize) -> (GradientMoments, GradientMoments) {
        (
            gradient_moments(&self.chain, &self.policy, &self.steady, agent, &self.central),
            gradient_moments(
                &self.chain,
                &self.policy,
                &self.steady,
                agent,
                &self.decentral[agent],
            ),
        )
    }

    pub fn check(&self, agent: usize) -> AgentCheck {
        let marginal = self.marginal(agent);
        let (gc, gd) = self.gradients(agent);
        AgentCheck {
            agent,
            marginal_residual: sup(&marginal, &self.decentral[agent].values),
            gradient_residual: sup(&gc.mean, &gd.mean),
            min_variance_gap: gc
                .variance
                .iter()
                .zip(&gd.variance)
                .map(|(c, d)| c - d)
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn mav(&self, agent: usize) -> Vec<f64> {
        mav(&self.chain, &self.policy, agent, &self.central)
    }

    pub fn mov(&self, agent: usize) -> Vec<f64> {
        mov(&self.chain, &self.steady, agent, &self.central)
    }

    /// Contraction probes for the centralized operator followed by each
    /// agent's decentralized operator.
    pub fn contraction<R: Rng + ?Sized>(
        &self,
        pairs: usize,
        rng: &mut R,
    ) -> Result<Vec<ContractionReport>> {
        let mut out = vec![contraction_check(&self.central_operator(), pairs, 100.0, rng)?];
        for i in 0..self.chain.num_agents() {
            out.push(contraction_check(&self.decentral_operator(i), pairs, 100.0, rng)?);
        }
        Ok(out)
    }

    pub fn joint_label(&self, joint: usize) -> String {
        self.chain
            .joint_history(joint)
            .iter()
            .map(|h| h.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn report<R: Rng + ?Sized>(&self, contraction_pairs: usize, rng: &mut R) -> Result<ExactReport> {
        let chain = &self.chain;
        let model = chain.model();
        let space = model.joint_actions();
        let steady = self
            .steady
            .pr_history_state(chain)
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|((h, s), p)| SteadyEntry {
                history: self.joint_label(h),
                state: s,
                probability: p,
            })
            .collect();
        let mut central = Vec::new();
        for h in 0..chain.num_joint_histories() {
            for a in 0..space.len() {
                central.push(ValueEntry {
                    history: self.joint_label(h),
                    action: space.decode(a),
                    value: self.central.get(h, a),
                });
            }
        }
        let agents = (0..chain.num_agents())
            .map(|i| {
                let na = chain.num_actions(i);
                let label = |h: usize| chain.local_history(i, h).to_string();
                let marginal = self.marginal(i);
                let (gc, gd) = self.gradients(i);
                let mut decentral = Vec::new();
                for h in 0..chain.num_local_histories(i) {
                    for a in 0..na {
                        decentral.push(LocalEntry {
                            history: label(h),
                            action: a,
                            value: self.decentral[i].get(h, a),
                            marginal: marginal[h * na + a],
                            grad_central: gc.mean[h * na + a],
                            grad_decentral: gd.mean[h * na + a],
                            var_central: gc.variance[h * na + a],
                            var_decentral: gd.variance[h * na + a],
                        });
                    }
                }
                let mav_table = self.mav(i);
                let mut mav_rows = Vec::new();
                for h in 0..chain.num_joint_histories() {
                    if self.steady.pr_joint(h) > 0.0 {
                        for a in 0..na {
                            mav_rows.push(ValueEntry {
                                history: self.joint_label(h),
                                action: vec![a],
                                value: mav_table[h * na + a],
                            });
                        }
                    }
                }
                let mov_table = self.mov(i);
                let mut mov_rows = Vec::new();
                for h in 0..chain.num_local_histories(i) {
                    if self.steady.pr_local(i, h) > 0.0 {
                        for a in 0..space.len() {
                            mov_rows.push(ValueEntry {
                                history: label(h),
                                action: space.decode(a),
                                value: mov_table[h * space.len() + a],
                            });
                        }
                    }
                }
                AgentReport {
                    check: self.check(i),
                    iterations: self.decentral[i].iterations,
                    table: decentral,
                    mav: mav_rows,
                    mov: mov_rows,
                }
            })
            .collect::<Vec<_>>();
        let contraction = self.contraction(contraction_pairs, rng)?;
        Ok(ExactReport {
            model: model.name().to_string(),
            k: chain.k(),
            gamma: model.gamma(),
            horizon: model.horizon(),
            num_nodes: chain.num_nodes(),
            solve_method: self.steady.method(),
            condition_estimate: self.steady.condition_estimate(),
            central_iterations: self.central.iterations,
            steady_state: steady,
            central,
            agents,
            contraction,
        })
    }
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Tolerances used by [`ExactReport::violations`].
pub const MARGINAL_TOLERANCE: f64 = 1e-8;
pub const GRADIENT_TOLERANCE: f64 = 1e-10;
pub const VARIANCE_FLOOR: f64 = -1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct SteadyEntry {
    pub history: String,
    pub state: usize,
    pub probability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValueEntry {
    pub history: String,
    pub action: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalEntry {
    pub history: String,
    pub action: usize,
    pub value: f64,
    pub marginal: f64,
    pub grad_central: f64,
    pub grad_decentral: f64,
    pub var_central: f64,
    pub var_decentral: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgentReport {
    pub check: AgentCheck,
    pub iterations: usize,
    pub table: Vec<LocalEntry>,
    pub mav: Vec<ValueEntry>,
    pub mov: Vec<ValueEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactReport {
    pub model: String,
    pub k: usize,
    pub gamma: f64,
    pub horizon: Option<usize>,
    pub num_nodes: usize,
    pub solve_method: SolveMethod,
    pub condition_estimate: Option<f64>,
    pub central_iterations: usize,
    pub steady_state: Vec<SteadyEntry>,
    pub central: Vec<ValueEntry>,
    pub agents: Vec<AgentReport>,
    pub contraction: Vec<ContractionReport>,
}

impl ExactReport {
    /// Descriptions of every property that failed its tolerance.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for a in &self.agents {
            let c = &a.check;
            if c.marginal_residual > MARGINAL_TOLERANCE {
                out.push(format!(
                    "agent {}: marginalization residual {:e}",
                    c.agent, c.marginal_residual
                ));
            }
            if c.gradient_residual > GRADIENT_TOLERANCE {
                out.push(format!(
                    "agent {}: gradient residual {:e}",
                    c.agent, c.gradient_residual
                ));
            }
            if c.min_variance_gap < VARIANCE_FLOOR {
                out.push(format!(
                    "agent {}: variance gap {:e}",
                    c.agent, c.min_variance_gap
                ));
            }
        }
        for c in &self.contraction {
            if let Some(v) = &c.violation {
                out.push(format!(
                    "{:?} operator: |BQ1-BQ2| = {:e} > gamma * {:e}",
                    c.mode, v.output_distance, v.input_distance
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Long-format rows `(run, step, metric, value)`; `step` is the row
    /// index within each table, matching the order of the JSON tables.
    pub fn csv_rows(&self) -> Vec<(usize, usize, String, f64)> {
        let mut rows = Vec::new();
        for (i, e) in self.steady_state.iter().enumerate() {
            rows.push((0, i, "steady_state".to_string(), e.probability));
        }
        for (i, e) in self.central.iter().enumerate() {
            rows.push((0, i, "q_central".to_string(), e.value));
        }
        for (ag, a) in self.agents.iter().enumerate() {
            for (i, e) in a.table.iter().enumerate() {
                for (name, v) in [
                    ("q_decentral", e.value),
                    ("q_marginal", e.marginal),
                    ("grad_central", e.grad_central),
                    ("grad_decentral", e.grad_decentral),
                    ("var_central", e.var_central),
                    ("var_decentral", e.var_decentral),
                    ("var_gap", e.var_central - e.var_decentral),
                ] {
                    rows.push((0, i, format!("{name}.{ag}"), v));
                }
            }
            for (i, e) in a.mav.iter().enumerate() {
                rows.push((0, i, format!("mav.{ag}"), e.value));
            }
            for (i, e) in a.mov.iter().enumerate() {
                rows.push((0, i, format!("mov.{ag}"), e.value));
            }
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use maac_envs::{build_binary_match_game, build_climb_game};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform(model: &maac_core::DecPomdpModel, k: usize) -> Analysis {
        let chain = ChainStructure::build(model, k).unwrap();
        let policy = PolicyTable::uniform(&chain);
        Analysis::new(chain, policy).unwrap()
    }

    #[test]
    fn climb_report_holds_both_agent_columns() {
        let a = uniform(&build_climb_game(), 1);
        let report = a.report(10, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(report.violations().is_empty());
        let q1: Vec<f64> = report.agents[0].table.iter().map(|e| e.value).collect();
        let q2: Vec<f64> = report.agents[1].table.iter().map(|e| e.value).collect();
        assert!((q1[2] - 11.0 / 3.0).abs() < 1e-10);
        assert!((q2[2] - 5.0 / 3.0).abs() < 1e-10);
        assert!(report.agents[0].check.gradient_residual < 1e-10);
        assert!(!report.csv_rows().is_empty());
        assert!(report.to_json().contains("\"q_central\"") || report.to_json().contains("central"));
    }

    #[test]
    fn binary_match_mov_table_is_constant() {
        let a = uniform(&build_binary_match_game(10.0).unwrap(), 1);
        let report = a.report(5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for ag in &report.agents {
            assert!(ag.mov.iter().all(|e| (e.value - 100.0).abs() < 1e-9));
        }
    }
}
