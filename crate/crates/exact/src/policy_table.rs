//! Action probabilities cached over every local history in a chain.

use maac_core::{Policy, SoftmaxPolicy};
use rand::Rng;

use crate::chain::ChainStructure;
use crate::error::{ExactError, Result};

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PolicyTable {
    local: Vec<Vec<Vec<f64>>>,
    joint: Vec<Vec<f64>>,
}

impl PolicyTable {
    pub fn new(chain: &ChainStructure, policies: &[&dyn Policy]) -> Result<Self> {
        let n = chain.num_agents();
        if policies.len() != n {
            return Err(maac_core::CoreError::PolicyCount {
                expected: n,
                got: policies.len(),
            }
            .into());
        }
        let mut local = Vec::with_capacity(n);
        for (i, pi) in policies.iter().enumerate() {
            let expected = chain.num_actions(i);
            if pi.num_actions() != expected {
                return Err(ExactError::ActionCount {
                    agent: i,
                    expected,
                    got: pi.num_actions(),
                });
            }
            let mut rows = Vec::with_capacity(chain.num_local_histories(i));
            for h in 0..chain.num_local_histories(i) {
                let hist = chain.local_history(i, h);
                let probs = pi.action_probs(hist);
                let sum: f64 = probs.iter().sum();
                if probs.len() != expected
                    || probs.iter().any(|p| !(*p >= 0.0))
                    || (sum - 1.0).abs() > SUM_TOLERANCE
                {
                    return Err(ExactError::BadDistribution {
                        agent: i,
                        history: hist.to_string(),
                        sum,
                    });
                }
                rows.push(probs);
            }
            local.push(rows);
        }
        Ok(Self::from_local(chain, local))
    }

    pub fn uniform(chain: &ChainStructure) -> Self {
        let local = (0..chain.num_agents())
            .map(|i| {
                let na = chain.num_actions(i);
                vec![vec![1.0 / na as f64; na]; chain.num_local_histories(i)]
            })
            .collect();
        Self::from_local(chain, local)
    }

    fn from_local(chain: &ChainStructure, local: Vec<Vec<Vec<f64>>>) -> Self {
        let space = chain.model().joint_actions();
        let mut parts = Vec::new();
        let joint = (0..chain.num_joint_histories())
            .map(|j| {
                let ids = chain.joint_parts(j);
                (0..space.len())
                    .map(|a| {
                        space.decode_into(a, &mut parts);
                        ids.iter()
                            .enumerate()
                            .map(|(i, &h)| local[i][h as usize][parts[i]])
                            .product()
                    })
                    .collect()
            })
            .collect();
        Self { local, joint }
    }

    /// `pi_i(. | h_i)` for a local history id.
    pub fn local(&self, agent: usize, history: usize) -> &[f64] {
        &self.local[agent][history]
    }

    /// `pi(a | h)` over joint actions for a joint history id.
    pub fn joint(&self, joint_history: usize) -> &[f64] {
        &self.joint[joint_history]
    }

    /// Probability that every agent except `agent` plays its part of
    /// `joint_action` at `joint_history`.
    pub fn teammates(
        &self,
        chain: &ChainStructure,
        agent: usize,
        joint_history: usize,
        joint_action: usize,
    ) -> f64 {
        let space = chain.model().joint_actions();
        chain
            .joint_parts(joint_history)
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != agent)
            .map(|(i, &h)| self.local[i][h as usize][space.component(joint_action, i)])
            .product()
    }
}

/// Softmax policies with logits drawn uniformly from `[-scale, scale]` on
/// every local history of the chain.
pub fn random_softmax_policies<R: Rng + ?Sized>(
    chain: &ChainStructure,
    rng: &mut R,
    scale: f64,
) -> Vec<SoftmaxPolicy> {
    (0..chain.num_agents())
        .map(|i| {
            let na = chain.num_actions(i);
            let mut pi = SoftmaxPolicy::new(na);
            for h in 0..chain.num_local_histories(i) {
                let logits = (0..na)
                    .map(|_| rng.gen_range(-scale..=scale))
                    .collect();
                pi.set_logits(chain.local_history(i, h), logits);
            }
            pi
        })
        .collect()
}
