//! Enumeration of the history chain: every `(time, joint history, state)`
//! node reachable from the initial distribution, with per-joint-action
//! outcomes.
//!
//! Episodes restart from the initial distribution when they enter a terminal
//! state or reach the horizon, so the chain is recurrent. The time index is
//! tracked only for models with a finite horizon.

use std::collections::{HashMap, VecDeque};

use indexmap::IndexSet;
use maac_core::{DecPomdpModel, History, JointHistory};

use crate::error::{ExactError, Result};

/// Node limit applied by [`ChainStructure::build`].
pub const DEFAULT_MAX_NODES: usize = 500_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    /// Decision step within the episode; `None` for models without a horizon.
    pub t: Option<u32>,
    pub joint: u32,
    pub state: u32,
}

/// What follows one joint action taken at one node.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// `sum_s' T(s'|s,a) R(s,a,s')`.
    pub reward: f64,
    /// Probability that the episode ends (terminal state or horizon).
    pub exit: f64,
    /// Successor nodes within the episode, merged by node.
    pub next: Vec<(u32, f64)>,
}

#[derive(Clone, Debug)]
pub struct ChainStructure {
    model: DecPomdpModel,
    k: usize,
    locals: Vec<IndexSet<History>>,
    joints: IndexSet<Vec<u32>>,
    nodes: IndexSet<Node>,
    start: Vec<(u32, f64)>,
    outcomes: Vec<Outcome>,
    joints_of_local: Vec<Vec<Vec<u32>>>,
}

impl ChainStructure {
    pub fn build(model: &DecPomdpModel, k: usize) -> Result<Self> {
        Self::build_with_limit(model, k, DEFAULT_MAX_NODES)
    }

    pub fn build_with_limit(model: &DecPomdpModel, k: usize, max_nodes: usize) -> Result<Self> {
        let mut chain = Self {
            model: model.clone(),
            k,
            locals: vec![IndexSet::new(); model.num_agents()],
            joints: IndexSet::new(),
            nodes: IndexSet::new(),
            start: Vec::new(),
            outcomes: Vec::new(),
            joints_of_local: Vec::new(),
        };
        let t0 = model.horizon().map(|_| 0u32);
        let jo = model.joint_observations();
        let mut starts: HashMap<u32, f64> = HashMap::new();
        for s in 0..model.num_states() {
            let p0 = model.initial()[s];
            if p0 <= 0.0 {
                continue;
            }
            let obs: Vec<(Option<usize>, f64)> = match model.initial_observation_row(s) {
                Some(row) => row
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(o, p)| (Some(o), *p))
                    .collect(),
                None => vec![(None, 1.0)],
            };
            for (o, po) in obs {
                let hist: JointHistory = (0..model.num_agents())
                    .map(|i| History::start(o.map(|o| jo.component(o, i)), k))
                    .collect();
                let joint = chain.intern_joint(&hist);
                let (id, _) = chain.nodes.insert_full(Node {
                    t: t0,
                    joint,
                    state: s as u32,
                });
                *starts.entry(id as u32).or_default() += p0 * po;
            }
        }
        chain.start = starts.into_iter().collect();
        chain.start.sort_by_key(|(n, _)| *n);

        let na = model.joint_actions().len();
        let mut queue: VecDeque<u32> = (0..chain.nodes.len() as u32).collect();
        let mut actions = Vec::new();
        while let Some(id) = queue.pop_front() {
            let node = chain.nodes[id as usize];
            let s = node.state as usize;
            let ends_now = match (node.t, model.horizon()) {
                (Some(t), Some(h)) => t as usize + 1 >= h,
                _ => false,
            };
            let hist: Vec<History> = chain.joints[node.joint as usize]
                .iter()
                .enumerate()
                .map(|(i, &l)| chain.locals[i][l as usize].clone())
                .collect();
            for a in 0..na {
                model.joint_actions().decode_into(a, &mut actions);
                let mut out = Outcome::default();
                let mut merged: HashMap<u32, f64> = HashMap::new();
                for (next, &pt) in model.transition_row(s, a).iter().enumerate() {
                    if pt <= 0.0 {
                        continue;
                    }
                    out.reward += pt * model.reward(s, a, next);
                    if ends_now || model.is_terminal(next) {
                        out.exit += pt;
                        continue;
                    }
                    for (o, &po) in model.observation_row(s, a).iter().enumerate() {
                        if po <= 0.0 {
                            continue;
                        }
                        let next_hist: JointHistory = hist
                            .iter()
                            .enumerate()
                            .map(|(i, h)| h.append_step(actions[i], jo.component(o, i), k))
                            .collect();
                        let joint = chain.intern_joint(&next_hist);
                        let (nid, fresh) = chain.nodes.insert_full(Node {
                            t: node.t.map(|t| t + 1),
                            joint,
                            state: next as u32,
                        });
                        if fresh {
                            if chain.nodes.len() > max_nodes {
                                return Err(ExactError::TooLarge { limit: max_nodes });
                            }
                            queue.push_back(nid as u32);
                        }
                        *merged.entry(nid as u32).or_default() += pt * po;
                    }
                }
                out.next = merged.into_iter().collect();
                out.next.sort_by_key(|(n, _)| *n);
                chain.outcomes.push(out);
            }
        }

        chain.joints_of_local = chain
            .locals
            .iter()
            .map(|set| vec![Vec::new(); set.len()])
            .collect();
        for (j, parts) in chain.joints.iter().enumerate() {
            for (i, &l) in parts.iter().enumerate() {
                chain.joints_of_local[i][l as usize].push(j as u32);
            }
        }
        Ok(chain)
    }

    fn intern_joint(&mut self, hist: &[History]) -> u32 {
        let parts: Vec<u32> = hist
            .iter()
            .enumerate()
            .map(|(i, h)| self.locals[i].insert_full(h.clone()).0 as u32)
            .collect();
        self.joints.insert_full(parts).0 as u32
    }

    pub fn model(&self) -> &DecPomdpModel {
        &self.model
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_agents(&self) -> usize {
        self.model.num_agents()
    }

    pub fn num_joint_actions(&self) -> usize {
        self.model.joint_actions().len()
    }

    pub fn num_actions(&self, agent: usize) -> usize {
        self.model.num_actions(agent)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> Node {
        self.nodes[id]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn node_id(&self, node: &Node) -> Option<usize> {
        self.nodes.get_index_of(node)
    }

    /// Restart distribution over nodes.
    pub fn start(&self) -> &[(u32, f64)] {
        &self.start
    }

    pub fn outcome(&self, node: usize, joint_action: usize) -> &Outcome {
        &self.outcomes[node * self.num_joint_actions() + joint_action]
    }

    pub fn num_joint_histories(&self) -> usize {
        self.joints.len()
    }

    pub fn num_local_histories(&self, agent: usize) -> usize {
        self.locals[agent].len()
    }

    pub fn local_history(&self, agent: usize, id: usize) -> &History {
        &self.locals[agent][id]
    }

    pub fn local_id(&self, agent: usize, history: &History) -> Option<usize> {
        self.locals[agent].get_index_of(history)
    }

    /// Local history ids making up a joint history.
    pub fn joint_parts(&self, joint: usize) -> &[u32] {
        &self.joints[joint]
    }

    pub fn joint_history(&self, joint: usize) -> JointHistory {
        self.joints[joint]
            .iter()
            .enumerate()
            .map(|(i, &l)| self.locals[i][l as usize].clone())
            .collect()
    }

    pub fn joint_id(&self, history: &[History]) -> Option<usize> {
        let parts: Option<Vec<u32>> = history
            .iter()
            .enumerate()
            .map(|(i, h)| self.local_id(i, h).map(|l| l as u32))
            .collect();
        self.joints.get_index_of(&parts?)
    }

    /// Joint histories whose agent-`agent` component is `local`.
    pub fn joints_with_local(&self, agent: usize, local: usize) -> &[u32] {
        &self.joints_of_local[agent][local]
    }

    /// Number of policy parameters `theta_i(h_i, a_i)` for one agent.
    pub fn num_params(&self, agent: usize) -> usize {
        self.num_local_histories(agent) * self.num_actions(agent)
    }

    pub fn param_index(&self, agent: usize, local: usize, action: usize) -> usize {
        local * self.num_actions(agent) + action
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use maac_envs::{build_climb_game, build_dectiger_with, build_guess_game, DecTigerParams};

    #[test]
    fn matrix_game_has_one_node() {
        let chain = ChainStructure::build(&build_climb_game(), 1).unwrap();
        assert_eq!(chain.num_nodes(), 1);
        assert_eq!(chain.start(), &[(0, 1.0)]);
        for a in 0..9 {
            let out = chain.outcome(0, a);
            assert_eq!(out.exit, 1.0);
            assert!(out.next.is_empty());
        }
        assert_eq!(chain.outcome(0, 0).reward, 11.0);
    }

    #[test]
    fn guess_game_starts_from_observed_bits() {
        let chain = ChainStructure::build(&build_guess_game(10.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(chain.num_nodes(), 4);
        assert_eq!(chain.num_local_histories(0), 2);
        assert_eq!(chain.num_joint_histories(), 4);
        let total: f64 = chain.start().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dectiger_layers_only_follow_listening() {
        let params = DecTigerParams {
            horizon: Some(3),
            ..DecTigerParams::default()
        };
        let chain = ChainStructure::build(&build_dectiger_with(&params).unwrap(), 2).unwrap();
        let count = |t| chain.nodes().filter(|n| n.t == Some(t)).count();
        assert_eq!(count(0), 2);
        assert_eq!(count(1), 2 * 4);
        assert_eq!(count(2), 2 * 16);
        let total: usize = (0..3).map(count).sum();
        assert_eq!(total, chain.num_nodes());
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let chain = ChainStructure::build(&build_dectiger_with(&DecTigerParams {
            horizon: None,
            ..DecTigerParams::default()
        })
        .unwrap(), 2)
        .unwrap();
        for n in 0..chain.num_nodes() {
            for a in 0..chain.num_joint_actions() {
                let out = chain.outcome(n, a);
                let mass: f64 = out.exit + out.next.iter().map(|(_, p)| p).sum::<f64>();
                assert!((mass - 1.0).abs() < 1e-12);
            }
        }
    }
}
