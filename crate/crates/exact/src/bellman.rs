//! Centralized and decentralized Bellman operators over history tables.
//!
//! Both operators are built once per `(policies, steady state)` as a sparse
//! kernel: each table row `(history, action)` stores its expected immediate
//! reward and the probabilities of the next history within the episode.
//! Histories with zero stationary mass keep the value 0.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::chain::ChainStructure;
use crate::error::{ExactError, Result};
use crate::policy_table::PolicyTable;
use crate::steady::SteadyState;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticMode {
    Centralized,
    Decentralized(usize),
}

#[derive(Clone, Debug, Default)]
struct Row {
    reward: f64,
    next: Vec<(u32, f64)>,
}

#[derive(Clone, Debug)]
pub struct BellmanOperator {
    mode: CriticMode,
    gamma: f64,
    num_actions: usize,
    rows: Vec<Row>,
    /// Bootstrap action distribution for each history id.
    bootstrap: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactCriticTable {
    pub mode: CriticMode,
    pub num_actions: usize,
    pub values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl ExactCriticTable {
    pub fn get(&self, history: usize, action: usize) -> f64 {
        self.values[history * self.num_actions + action]
    }

    pub fn row(&self, history: usize) -> &[f64] {
        let base = history * self.num_actions;
        &self.values[base..base + self.num_actions]
    }

    pub fn num_histories(&self) -> usize {
        self.values.len() / self.num_actions
    }
}

fn finish(rows: Vec<HashMap<u32, f64>>, rewards: Vec<f64>) -> Vec<Row> {
    rows.into_iter()
        .zip(rewards)
        .map(|(next, reward)| {
            let mut next: Vec<(u32, f64)> = next.into_iter().collect();
            next.sort_by_key(|(h, _)| *h);
            Row { reward, next }
        })
        .collect()
}

impl BellmanOperator {
    /// `Q'(h,a) = sum_s Pr(s|h) sum_{s',o} T O [R + gamma sum_a' pi(a'|h') Q(h',a')]`.
    pub fn central(chain: &ChainStructure, policy: &PolicyTable, steady: &SteadyState) -> Self {
        let na = chain.num_joint_actions();
        let nh = chain.num_joint_histories();
        let mut next = vec![HashMap::new(); nh * na];
        let mut reward = vec![0.0; nh * na];
        for (n, &m) in steady.node_mass().iter().enumerate() {
            if m <= 0.0 {
                continue;
            }
            let h = chain.node(n).joint as usize;
            let w = m / steady.pr_joint(h);
            for a in 0..na {
                let out = chain.outcome(n, a);
                let r = h * na + a;
                reward[r] += w * out.reward;
                for &(succ, p) in &out.next {
                    *next[r].entry(chain.node(succ as usize).joint).or_insert(0.0) += w * p;
                }
            }
        }
        Self {
            mode: CriticMode::Centralized,
            gamma: chain.model().gamma(),
            num_actions: na,
            rows: finish(next, reward),
            bootstrap: (0..nh).map(|h| policy.joint(h).to_vec()).collect(),
        }
    }

    /// Agent `i`'s operator: each node is weighted by
    /// `Pr(h, s | h_i) pi_{-i}(a_{-i} | h_{-i})` and the bootstrap reads
    /// `sum_a' pi_i(a'|h_i') Q_i(h_i', a')`.
    pub fn decentral(
        chain: &ChainStructure,
        policy: &PolicyTable,
        steady: &SteadyState,
        agent: usize,
    ) -> Self {
        let na = chain.num_actions(agent);
        let nh = chain.num_local_histories(agent);
        let space = chain.model().joint_actions();
        let mut next = vec![HashMap::new(); nh * na];
        let mut reward = vec![0.0; nh * na];
        for (n, &m) in steady.node_mass().iter().enumerate() {
            if m <= 0.0 {
                continue;
            }
            let joint = chain.node(n).joint as usize;
            let hi = chain.joint_parts(joint)[agent] as usize;
            let base = m / steady.pr_local(agent, hi);
            for a in 0..space.len() {
                let w = base * policy.teammates(chain, agent, joint, a);
                if w <= 0.0 {
                    continue;
                }
                let out = chain.outcome(n, a);
                let r = hi * na + space.component(a, agent);
                reward[r] += w * out.reward;
                for &(succ, p) in &out.next {
                    let succ_joint = chain.node(succ as usize).joint as usize;
                    let succ_local = chain.joint_parts(succ_joint)[agent];
                    *next[r].entry(succ_local).or_insert(0.0) += w * p;
                }
            }
        }
        Self {
            mode: CriticMode::Decentralized(agent),
            gamma: chain.model().gamma(),
            num_actions: na,
            rows: finish(next, reward),
            bootstrap: (0..nh).map(|h| policy.local(agent, h).to_vec()).collect(),
        }
    }

    pub fn mode(&self) -> CriticMode {
        self.mode
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Number of table entries.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn apply(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.rows.len() {
            return Err(ExactError::Shape {
                expected: self.rows.len(),
                got: q.len(),
            });
        }
        let na = self.num_actions;
        let values: Vec<f64> = self
            .bootstrap
            .iter()
            .enumerate()
            .map(|(h, pi)| pi.iter().zip(&q[h * na..(h + 1) * na]).map(|(p, v)| p * v).sum())
            .collect();
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let boot: f64 = row.next.iter().map(|&(h, p)| p * values[h as usize]).sum();
                row.reward + self.gamma * boot
            })
            .collect())
    }
}

/// `10 * ceil(log(tol) / log(gamma)) + 100`.
pub fn default_max_iter(gamma: f64, tol: f64) -> usize {
    if gamma <= 0.0 {
        return 100;
    }
    10 * (tol.ln() / gamma.ln()).ceil() as usize + 100
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Iterate `op` from `initial` (zeros when `None`) until successive tables
/// differ by at most `tol` in sup norm. `iterations` counts operator
/// applications, including the final one that confirmed convergence.
pub fn fixed_point(
    op: &BellmanOperator,
    initial: Option<Vec<f64>>,
    tol: f64,
    max_iter: usize,
) -> Result<ExactCriticTable> {
    let mut q = initial.unwrap_or_else(|| vec![0.0; op.len()]);
    let mut trace = Vec::new();
    for it in 1..=max_iter {
        let next = op.apply(&q)?;
        let residual = sup_distance(&next, &q);
        q = next;
        if trace.len() == 16 {
            trace.remove(0);
        }
        trace.push(residual);
        if residual <= tol {
            return Ok(ExactCriticTable {
                mode: op.mode,
                num_actions: op.num_actions,
                values: q,
                residual,
                iterations: it,
            });
        }
    }
    Err(ExactError::NotConverged {
        iterations: max_iter,
        residual: trace.last().copied().unwrap_or(f64::NAN),
        trace,
    })
}

/// Fixed point with the default tolerance and iteration budget.
pub fn solve(op: &BellmanOperator) -> Result<ExactCriticTable> {
    fixed_point(
        op,
        None,
        DEFAULT_TOLERANCE,
        default_max_iter(op.gamma, DEFAULT_TOLERANCE),
    )
}

/// `sum_{h_-i} Pr(h_-i | h_i) sum_{a_-i} pi_-i(a_-i | h_-i) Q(h, a)` as a
/// table over agent `agent`'s `(h_i, a_i)`.
pub fn marginalize_central(
    chain: &ChainStructure,
    policy: &PolicyTable,
    steady: &SteadyState,
    central: &ExactCriticTable,
    agent: usize,
) -> Vec<f64> {
    let na = chain.num_actions(agent);
    let space = chain.model().joint_actions();
    let mut out = vec![0.0; chain.num_local_histories(agent) * na];
    for hi in 0..chain.num_local_histories(agent) {
        for (joint, w) in steady.teammate_conditional(chain, agent, hi) {
            for a in 0..space.len() {
                let p = policy.teammates(chain, agent, joint, a);
                out[hi * na + space.component(a, agent)] += w * p * central.get(joint, a);
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub mode: CriticMode,
    pub gamma: f64,
    pub pairs: usize,
    /// Largest `|BQ1 - BQ2| / |Q1 - Q2|` observed.
    pub worst_ratio: f64,
    /// First pair breaking `|BQ1 - BQ2| <= gamma |Q1 - Q2| + 1e-10`.
    pub violation: Option<ContractionViolation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionViolation {
    pub pair: usize,
    pub input_distance: f64,
    pub output_distance: f64,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Probe the contraction bound with random table pairs whose entries lie in
/// `[-scale, scale]`.
pub fn contraction_check<R: Rng + ?Sized>(
    op: &BellmanOperator,
    num_pairs: usize,
    scale: f64,
    rng: &mut R,
) -> Result<ContractionReport> {
    let mut report = ContractionReport {
        mode: op.mode,
        gamma: op.gamma,
        pairs: num_pairs,
        worst_ratio: 0.0,
        violation: None,
    };
    for pair in 0..num_pairs {
        let q1: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-scale..=scale)).collect();
        let q2: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-scale..=scale)).collect();
        let input = sup_distance(&q1, &q2);
        let output = sup_distance(&op.apply(&q1)?, &op.apply(&q2)?);
        if input > 0.0 {
            report.worst_ratio = report.worst_ratio.max(output / input);
        }
        if output > op.gamma * input + 1e-10 && report.violation.is_none() {
            report.violation = Some(ContractionViolation {
                pair,
                input_distance: input,
                output_distance: output,
                q1,
                q2,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::steady_state;
    use maac_envs::{
        build_climb_game, build_dectiger_with, build_guess_game, build_morning_game,
        DecTigerParams,
    };

    fn setup(model: &maac_core::DecPomdpModel, k: usize) -> (ChainStructure, PolicyTable, SteadyState) {
        let chain = ChainStructure::build(model, k).unwrap();
        let policy = PolicyTable::uniform(&chain);
        let steady = steady_state(&chain, &policy).unwrap();
        (chain, policy, steady)
    }

    #[test]
    fn central_backup_of_matrix_game_is_payoff() {
        let (chain, policy, steady) = setup(&build_climb_game(), 0);
        let op = BellmanOperator::central(&chain, &policy, &steady);
        let q = op.apply(&[5.0; 9]).unwrap();
        // joint action index = 3 * a1 + a2, reward = payoff[a2][a1]
        assert_eq!(q[0], 11.0);
        assert_eq!(q[1], -30.0);
        assert_eq!(q[8], 5.0);
    }

    #[test]
    fn decentral_climb_values() {
        let (chain, policy, steady) = setup(&build_climb_game(), 0);
        let op = BellmanOperator::decentral(&chain, &policy, &steady, 0);
        let q = solve(&op).unwrap();
        let want = [-19.0 / 3.0, -23.0 / 3.0, 11.0 / 3.0];
        for (a, w) in want.iter().enumerate() {
            assert!((q.get(0, a) - w).abs() < 1e-12);
        }
        assert_eq!(q.iterations, 2);
    }

    #[test]
    fn decentral_morning_values() {
        let (chain, policy, steady) = setup(&build_morning_game(), 0);
        let op = BellmanOperator::decentral(&chain, &policy, &steady, 0);
        let q = solve(&op).unwrap();
        assert!((q.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((q.get(0, 1) - 1.5).abs() < 1e-12);
        let central = solve(&BellmanOperator::central(&chain, &policy, &steady)).unwrap();
        let m = marginalize_central(&chain, &policy, &steady, &central, 0);
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn guess_game_guessing_actions_average_to_zero() {
        let model = build_guess_game(10.0, 5.0).unwrap();
        // A teammate that always guesses is right half the time.
        let guesser = maac_core::FnPolicy::new(3, |_: &maac_core::History| vec![0.5, 0.5, 0.0]);
        let chain = ChainStructure::build(&model, 1).unwrap();
        let policy = PolicyTable::new(&chain, &[&guesser, &guesser]).unwrap();
        let steady = steady_state(&chain, &policy).unwrap();
        for agent in 0..2 {
            let q = solve(&BellmanOperator::decentral(&chain, &policy, &steady, agent)).unwrap();
            for h in 0..q.num_histories() {
                assert!(q.get(h, 0).abs() < 1e-12);
                assert!(q.get(h, 1).abs() < 1e-12);
            }
        }
        // Under fully uniform policies the guesses still average to 0 and
        // opting out is worth 5 * 1/3.
        let (chain, policy, steady) = setup(&model, 1);
        let q = solve(&BellmanOperator::decentral(&chain, &policy, &steady, 0)).unwrap();
        for h in 0..q.num_histories() {
            assert!(q.get(h, 0).abs() < 1e-12);
            assert!(q.get(h, 1).abs() < 1e-12);
            assert!((q.get(h, 2) - 5.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_step_backup_matches_hand_expansion() {
        let params = DecTigerParams {
            horizon: Some(2),
            ..DecTigerParams::default()
        };
        let model = build_dectiger_with(&params).unwrap();
        let (chain, policy, steady) = setup(&model, 1);
        let op = BellmanOperator::central(&chain, &policy, &steady);
        let q2 = op.apply(&op.apply(&vec![0.0; op.len()]).unwrap()).unwrap();
        let space = model.joint_actions();
        let listen = space.encode(&[2, 2]);
        // After (listen, listen) each state persists and the second step is
        // the last: its uniform-policy value is the mean one-step reward.
        let mean_reward: f64 = (0..space.len())
            .map(|a| maac_envs::dectiger::dectiger_reward(0, space.component(a, 0), space.component(a, 1)))
            .sum::<f64>()
            / space.len() as f64;
        let want = -2.0 + params.gamma * mean_reward;
        let root = chain.joint_id(&[Default::default(), Default::default()]).unwrap();
        assert!((q2[root * space.len() + listen] - want).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_is_unique() {
        let params = DecTigerParams {
            horizon: None,
            ..DecTigerParams::default()
        };
        let (chain, policy, steady) = setup(&build_dectiger_with(&params).unwrap(), 1);
        let op = BellmanOperator::central(&chain, &policy, &steady);
        let max_iter = default_max_iter(op.gamma(), DEFAULT_TOLERANCE);
        let a = fixed_point(&op, None, DEFAULT_TOLERANCE, max_iter).unwrap();
        let b = fixed_point(&op, Some(vec![100.0; op.len()]), DEFAULT_TOLERANCE, max_iter).unwrap();
        let gap = sup_distance(&a.values, &b.values);
        // iteration stops within tol of the step; the fixed point lies within
        // gamma/(1-gamma) tol of each table
        assert!(gap < 2.0 * DEFAULT_TOLERANCE / (1.0 - op.gamma()), "{gap}");
        let again = op.apply(&a.values).unwrap();
        assert!(sup_distance(&again, &a.values) <= DEFAULT_TOLERANCE);
    }

    #[test]
    fn non_convergence_reports_trace() {
        let params = DecTigerParams {
            horizon: None,
            ..DecTigerParams::default()
        };
        let (chain, policy, steady) = setup(&build_dectiger_with(&params).unwrap(), 1);
        let op = BellmanOperator::central(&chain, &policy, &steady);
        match fixed_point(&op, None, 1e-12, 3) {
            Err(ExactError::NotConverged { iterations, trace, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(trace.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn contraction_holds_and_identical_pair_gives_zero() {
        let params = DecTigerParams {
            horizon: None,
            ..DecTigerParams::default()
        };
        let (chain, policy, steady) = setup(&build_dectiger_with(&params).unwrap(), 2);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        for op in [
            BellmanOperator::central(&chain, &policy, &steady),
            BellmanOperator::decentral(&chain, &policy, &steady, 1),
        ] {
            let report = contraction_check(&op, 100, 50.0, &mut rng).unwrap();
            assert!(report.passed());
            assert!(report.worst_ratio <= op.gamma() + 1e-12);
            let q = vec![3.0; op.len()];
            assert_eq!(sup_distance(&op.apply(&q).unwrap(), &op.apply(&q).unwrap()), 0.0);
        }
    }

    #[test]
    fn zero_discount_ignores_bootstrap() {
        let params = DecTigerParams {
            horizon: Some(3),
            gamma: 0.0,
            ..DecTigerParams::default()
        };
        let (chain, policy, steady) = setup(&build_dectiger_with(&params).unwrap(), 2);
        let op = BellmanOperator::central(&chain, &policy, &steady);
        let a = op.apply(&vec![1.0; op.len()]).unwrap();
        let b = op.apply(&vec![-7.0; op.len()]).unwrap();
        assert_eq!(a, b);
    }
}
