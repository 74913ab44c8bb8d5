//! Stationary distribution of the restart chain over `(history, state)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::ChainStructure;
use crate::error::{ExactError, Result};
use crate::policy_table::PolicyTable;

/// Largest chain solved by dense LU; bigger chains use power iteration.
pub const DENSE_LIMIT: usize = 2000;
const CONDITION_LIMIT: f64 = 1e13;
const POWER_TOLERANCE: f64 = 1e-14;
const POWER_MAX_SWEEPS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Exact layered propagation for finite-horizon models.
    Layered,
    DenseLu,
    PowerIteration,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    node_mass: Vec<f64>,
    joint_mass: Vec<f64>,
    local_mass: Vec<Vec<f64>>,
    state_mass: Vec<f64>,
    method: SolveMethod,
    condition: Option<f64>,
}

/// Solve for the stationary distribution of the history chain under fixed
/// policies.
pub fn steady_state(chain: &ChainStructure, policy: &PolicyTable) -> Result<SteadyState> {
    let (mass, method, condition) = if chain.model().horizon().is_some() {
        (layered(chain, policy), SolveMethod::Layered, None)
    } else if chain.num_nodes() <= DENSE_LIMIT {
        let (m, c) = dense(chain, policy)?;
        (m, SolveMethod::DenseLu, Some(c))
    } else {
        (power(chain, policy)?, SolveMethod::PowerIteration, None)
    };
    Ok(SteadyState::from_node_mass(chain, mass, method, condition))
}

/// Row `n` of the chain's transition kernel, restart included.
fn kernel_row(chain: &ChainStructure, policy: &PolicyTable, n: usize, out: &mut Vec<(u32, f64)>) {
    out.clear();
    let node = chain.node(n);
    let pi = policy.joint(node.joint as usize);
    let mut exit = 0.0;
    for (a, &pa) in pi.iter().enumerate() {
        if pa <= 0.0 {
            continue;
        }
        let o = chain.outcome(n, a);
        exit += pa * o.exit;
        out.extend(o.next.iter().map(|&(m, p)| (m, pa * p)));
    }
    if exit > 0.0 {
        out.extend(chain.start().iter().map(|&(m, p)| (m, exit * p)));
    }
}

fn layered(chain: &ChainStructure, policy: &PolicyTable) -> Vec<f64> {
    // Successor ids always exceed their predecessors' ids in a finite-horizon
    // chain, so one forward sweep visits each node after all its parents.
    let mut mass = vec![0.0; chain.num_nodes()];
    for &(n, p) in chain.start() {
        mass[n as usize] += p;
    }
    for n in 0..chain.num_nodes() {
        let m = mass[n];
        if m == 0.0 {
            continue;
        }
        let pi = policy.joint(chain.node(n).joint as usize);
        for (a, &pa) in pi.iter().enumerate() {
            if pa <= 0.0 {
                continue;
            }
            for &(next, p) in &chain.outcome(n, a).next {
                mass[next as usize] += m * pa * p;
            }
        }
    }
    normalize(&mut mass);
    mass
}

fn dense(chain: &ChainStructure, policy: &PolicyTable) -> Result<(Vec<f64>, f64)> {
    let n = chain.num_nodes();
    // (P^T - I) eta = 0 with the last equation replaced by sum(eta) = 1.
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut row = Vec::new();
    for from in 0..n {
        kernel_row(chain, policy, from, &mut row);
        for &(to, p) in &row {
            a[(to as usize, from)] += p;
        }
        a[(from, from)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(ExactError::IllConditioned { condition });
    }
    let x = lu
        .solve(&b)
        .ok_or(ExactError::IllConditioned { condition })?;
    let mut mass: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    normalize(&mut mass);
    Ok((mass, condition))
}

fn power(chain: &ChainStructure, policy: &PolicyTable) -> Result<Vec<f64>> {
    let n = chain.num_nodes();
    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .map(|from| {
            let mut row = Vec::new();
            kernel_row(chain, policy, from, &mut row);
            row
        })
        .collect();
    let mut eta = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut change = f64::INFINITY;
    for _ in 0..POWER_MAX_SWEEPS {
        // Lazy chain (P + I) / 2 has the same stationary law and no period.
        for (v, e) in next.iter_mut().zip(&eta) {
            *v = 0.5 * e;
        }
        for (from, row) in rows.iter().enumerate() {
            let w = 0.5 * eta[from];
            for &(to, p) in row {
                next[to as usize] += w * p;
            }
        }
        normalize(&mut next);
        change = next.iter().zip(&eta).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut eta, &mut next);
        if change < POWER_TOLERANCE {
            return Ok(eta);
        }
    }
    Err(ExactError::PowerIteration {
        iterations: POWER_MAX_SWEEPS,
        change,
    })
}

fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
}

impl SteadyState {
    fn from_node_mass(
        chain: &ChainStructure,
        node_mass: Vec<f64>,
        method: SolveMethod,
        condition: Option<f64>,
    ) -> Self {
        let mut joint_mass = vec![0.0; chain.num_joint_histories()];
        let mut state_mass = vec![0.0; chain.model().num_states()];
        for (n, &m) in node_mass.iter().enumerate() {
            let node = chain.node(n);
            joint_mass[node.joint as usize] += m;
            state_mass[node.state as usize] += m;
        }
        let mut local_mass: Vec<Vec<f64>> = (0..chain.num_agents())
            .map(|i| vec![0.0; chain.num_local_histories(i)])
            .collect();
        for (j, &m) in joint_mass.iter().enumerate() {
            for (i, &l) in chain.joint_parts(j).iter().enumerate() {
                local_mass[i][l as usize] += m;
            }
        }
        Self {
            node_mass,
            joint_mass,
            local_mass,
            state_mass,
            method,
            condition,
        }
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    /// Ratio of the largest to the smallest LU pivot, when LU was used.
    pub fn condition_estimate(&self) -> Option<f64> {
        self.condition
    }

    pub fn node_mass(&self) -> &[f64] {
        &self.node_mass
    }

    /// `Pr(h)` for a joint history id.
    pub fn pr_joint(&self, joint: usize) -> f64 {
        self.joint_mass[joint]
    }

    pub fn joint_mass(&self) -> &[f64] {
        &self.joint_mass
    }

    /// `Pr(h_i)` for a local history id.
    pub fn pr_local(&self, agent: usize, local: usize) -> f64 {
        self.local_mass[agent][local]
    }

    /// `Pr(s)`.
    pub fn state_mass(&self) -> &[f64] {
        &self.state_mass
    }

    /// `Pr(h, s)` summed over the time index, sorted by `(h, s)`.
    pub fn pr_history_state(&self, chain: &ChainStructure) -> Vec<((usize, usize), f64)> {
        let mut table = std::collections::BTreeMap::new();
        for (n, &m) in self.node_mass.iter().enumerate() {
            let node = chain.node(n);
            *table
                .entry((node.joint as usize, node.state as usize))
                .or_insert(0.0) += m;
        }
        table.into_iter().collect()
    }

    /// `Pr(s | h)`; all zeros when `Pr(h) = 0`.
    pub fn pr_state_given_joint(&self, chain: &ChainStructure, joint: usize) -> Vec<f64> {
        let mut out = vec![0.0; chain.model().num_states()];
        let z = self.joint_mass[joint];
        if z <= 0.0 {
            return out;
        }
        for (n, &m) in self.node_mass.iter().enumerate() {
            let node = chain.node(n);
            if node.joint as usize == joint {
                out[node.state as usize] += m / z;
            }
        }
        out
    }

    /// `Pr(h | h_i)` over the joint histories extending `h_i`.
    pub fn teammate_conditional(
        &self,
        chain: &ChainStructure,
        agent: usize,
        local: usize,
    ) -> Vec<(usize, f64)> {
        let z = self.local_mass[agent][local];
        if z <= 0.0 {
            return Vec::new();
        }
        chain
            .joints_with_local(agent, local)
            .iter()
            .map(|&j| (j as usize, self.joint_mass[j as usize] / z))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use maac_core::{DecPomdpModel, ModelDocument};
    use maac_envs::{build_climb_game, build_guess_game};

    fn cycle() -> DecPomdpModel {
        DecPomdpModel::new(ModelDocument {
            name: "cycle".into(),
            num_states: 2,
            num_actions: vec![1],
            num_observations: vec![1],
            initial: vec![1.0, 0.0],
            transition: vec![0.0, 1.0, 1.0, 0.0],
            observation: vec![1.0, 1.0],
            initial_observation: None,
            reward: vec![0.0; 4],
            terminal: vec![false, false],
            gamma: 0.9,
            horizon: None,
        })
        .unwrap()
    }

    #[test]
    fn matrix_game_puts_all_mass_on_empty_history() {
        let chain = ChainStructure::build(&build_climb_game(), 1).unwrap();
        let ss = steady_state(&chain, &PolicyTable::uniform(&chain)).unwrap();
        assert_eq!(ss.pr_joint(0), 1.0);
        assert!(chain.joint_history(0).iter().all(|h| h.is_empty()));
    }

    #[test]
    fn deterministic_cycle_splits_evenly() {
        let chain = ChainStructure::build(&cycle(), 1).unwrap();
        let ss = steady_state(&chain, &PolicyTable::uniform(&chain)).unwrap();
        assert_eq!(ss.method(), SolveMethod::DenseLu);
        assert!((ss.state_mass()[0] - 0.5).abs() < 1e-12);
        assert!((ss.state_mass()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_agrees_with_lu() {
        let chain = ChainStructure::build(&cycle(), 1).unwrap();
        let pt = PolicyTable::uniform(&chain);
        let lu = steady_state(&chain, &pt).unwrap();
        let pw = power(&chain, &pt).unwrap();
        for (a, b) in lu.node_mass().iter().zip(&pw) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn guess_game_teammate_bit_is_uniform() {
        let chain = ChainStructure::build(&build_guess_game(10.0, 0.0).unwrap(), 1).unwrap();
        let ss = steady_state(&chain, &PolicyTable::uniform(&chain)).unwrap();
        for l in 0..chain.num_local_histories(0) {
            let cond = ss.teammate_conditional(&chain, 0, l);
            assert_eq!(cond.len(), 2);
            for (_, p) in cond {
                assert!((p - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginals_are_consistent() {
        let chain = ChainStructure::build(&build_guess_game(10.0, 0.0).unwrap(), 1).unwrap();
        let ss = steady_state(&chain, &PolicyTable::uniform(&chain)).unwrap();
        let total: f64 = ss.pr_history_state(&chain).iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for j in 0..chain.num_joint_histories() {
            let cond = ss.pr_state_given_joint(&chain, j);
            for ((jj, s), p) in ss.pr_history_state(&chain) {
                if jj == j {
                    assert!((p - cond[s] * ss.pr_joint(j)).abs() < 1e-12);
                }
            }
        }
    }
}
