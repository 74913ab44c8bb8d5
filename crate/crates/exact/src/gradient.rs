//! Exact policy-gradient moments and the MAV/MOV decomposition.
//!
//! The single-sample estimator for agent `i` is
//! `g = grad_theta log pi_i(a_i | h_i) * Q`, with `(h, a)` drawn from the
//! stationary distribution. Under a centralized critic `Q = Q(h, a)`; under a
//! decentralized critic `Q = Q_i(h_i, a_i)`. Parameters are `theta_i(h_i, b)`
//! indexed by `h_i * |A_i| + b`, and
//! `d log pi_i(a|h_i) / d theta_i(h_i, b) = 1[a = b] - pi_i(b | h_i)`.

use serde::Serialize;

use crate::bellman::{CriticMode, ExactCriticTable};
use crate::chain::ChainStructure;
use crate::policy_table::PolicyTable;
use crate::steady::SteadyState;

#[derive(Clone, Debug, Serialize)]
pub struct GradientMoments {
    pub mode: CriticMode,
    pub agent: usize,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub variance: Vec<f64>,
}

/// One weighted sample `(weight, local history, own action, value)`.
type Sample = (f64, usize, usize, f64);

fn samples(
    chain: &ChainStructure,
    policy: &PolicyTable,
    steady: &SteadyState,
    agent: usize,
    critic: &ExactCriticTable,
) -> Vec<Sample> {
    let mut out = Vec::new();
    match critic.mode {
        CriticMode::Centralized => {
            let space = chain.model().joint_actions();
            for h in 0..chain.num_joint_histories() {
                let ph = steady.pr_joint(h);
                if ph <= 0.0 {
                    continue;
                }
                let hi = chain.joint_parts(h)[agent] as usize;
                for (a, &pa) in policy.joint(h).iter().enumerate() {
                    if pa > 0.0 {
                        out.push((ph * pa, hi, space.component(a, agent), critic.get(h, a)));
                    }
                }
            }
        }
        CriticMode::Decentralized(owner) => {
            assert_eq!(owner, agent, "decentralized critic belongs to agent {owner}");
            for hi in 0..chain.num_local_histories(agent) {
                let ph = steady.pr_local(agent, hi);
                if ph <= 0.0 {
                    continue;
                }
                for (a, &pa) in policy.local(agent, hi).iter().enumerate() {
                    if pa > 0.0 {
                        out.push((ph * pa, hi, a, critic.get(hi, a)));
                    }
                }
            }
        }
    }
    out
}

/// Mean, second moment and variance of the single-sample gradient for
/// `agent` under `critic`. Variances are accumulated around the mean.
pub fn gradient_moments(
    chain: &ChainStructure,
    policy: &PolicyTable,
    steady: &SteadyState,
    agent: usize,
    critic: &ExactCriticTable,
) -> GradientMoments {
    let na = chain.num_actions(agent);
    let dim = chain.num_params(agent);
    let samples = samples(chain, policy, steady, agent, critic);
    let grad = |hi: usize, a: usize, b: usize| {
        let pi = policy.local(agent, hi)[b];
        if a == b {
            1.0 - pi
        } else {
            -pi
        }
    };
    let mut mean = vec![0.0; dim];
    let mut second = vec![0.0; dim];
    for &(w, hi, a, q) in &samples {
        for b in 0..na {
            let g = grad(hi, a, b) * q;
            mean[hi * na + b] += w * g;
            second[hi * na + b] += w * g * g;
        }
    }
    // Every sample is zero outside its own history block, so the centered
    // sum splits into the touched block plus mean^2 times the untouched mass.
    let mut centered = vec![0.0; dim];
    let mut touched = vec![0.0; dim];
    for &(w, hi, a, q) in &samples {
        for b in 0..na {
            let d = hi * na + b;
            let diff = grad(hi, a, b) * q - mean[d];
            centered[d] += w * diff * diff;
            touched[d] += w;
        }
    }
    let variance = (0..dim)
        .map(|d| centered[d] + (1.0 - touched[d]).max(0.0) * mean[d] * mean[d])
        .collect();
    GradientMoments {
        mode: critic.mode,
        agent,
        mean,
        second_moment: second,
        variance,
    }
}

pub fn exact_policy_gradient(
    chain: &ChainStructure,
    policy: &PolicyTable,
    steady: &SteadyState,
    agent: usize,
    critic: &ExactCriticTable,
) -> Vec<f64> {
    gradient_moments(chain, policy, steady, agent, critic).mean
}

fn weighted_variance(values: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let total: f64 = values.clone().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mean: f64 = values.clone().map(|(w, v)| w * v).sum::<f64>() / total;
    values.map(|(w, v)| w * (v - mean) * (v - mean)).sum::<f64>() / total
}

/// Multi-action variance: for each joint history `h` and own action `a_i`,
/// the variance over `a_-i ~ pi_-i(. | h_-i)` of `Q(h, (a_i, a_-i))`.
/// Indexed by `h * |A_i| + a_i`.
pub fn mav(
    chain: &ChainStructure,
    policy: &PolicyTable,
    agent: usize,
    central: &ExactCriticTable,
) -> Vec<f64> {
    let na = chain.num_actions(agent);
    let space = chain.model().joint_actions();
    let mut out = vec![0.0; chain.num_joint_histories() * na];
    for h in 0..chain.num_joint_histories() {
        for ai in 0..na {
            let values = (0..space.len())
                .filter(move |&a| space.component(a, agent) == ai)
                .map(|a| (policy.teammates(chain, agent, h, a), central.get(h, a)));
            out[h * na + ai] = weighted_variance(values);
        }
    }
    out
}

/// Multi-observation variance: for each local history `h_i` and joint
/// action, the variance over `h ~ Pr(h | h_i)` of `Q(h, a)`. Indexed by
/// `h_i * |A| + a`.
pub fn mov(
    chain: &ChainStructure,
    steady: &SteadyState,
    agent: usize,
    central: &ExactCriticTable,
) -> Vec<f64> {
    let na = chain.num_joint_actions();
    let mut out = vec![0.0; chain.num_local_histories(agent) * na];
    for hi in 0..chain.num_local_histories(agent) {
        let cond = steady.teammate_conditional(chain, agent, hi);
        for a in 0..na {
            out[hi * na + a] = weighted_variance(cond.iter().map(|&(h, w)| (w, central.get(h, a))));
        }
    }
    out
}
