//! Sampling transitions and trajectories from an explicit model.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::history::{History, JointHistory};
use crate::model::DecPomdpModel;
use crate::policy::{sample_categorical, Policy};

/// Sample `(next_state, joint_observation, reward)` for one joint action.
///
/// The observation is drawn from `Pr(o | s, a)` with `s` the state the
/// action was taken in.
pub fn step(
    model: &DecPomdpModel,
    state: usize,
    joint_action: usize,
    rng: &mut dyn RngCore,
) -> (usize, usize, f64) {
    let next = sample_categorical(model.transition_row(state, joint_action), rng);
    let obs = sample_categorical(model.observation_row(state, joint_action), rng);
    (next, obs, model.reward(state, joint_action, next))
}

/// Draw an initial state and, when the model defines one, the joint
/// observation received at episode start.
pub fn reset(model: &DecPomdpModel, rng: &mut dyn RngCore) -> (usize, Option<usize>) {
    let s = sample_categorical(model.initial(), rng);
    let o = model
        .initial_observation_row(s)
        .map(|row| sample_categorical(row, rng));
    (s, o)
}

/// Per-agent starting histories for an initial joint observation.
pub fn start_histories(model: &DecPomdpModel, joint_obs: Option<usize>, k: usize) -> JointHistory {
    let js = model.joint_observations();
    (0..model.num_agents())
        .map(|i| History::start(joint_obs.map(|o| js.component(o, i)), k))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub histories: JointHistory,
    pub actions: Vec<usize>,
    pub joint_action: usize,
    pub reward: f64,
    pub next_state: usize,
    pub joint_observation: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub seed: Option<u64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }
}

/// Run one episode. Stops at a terminal state, at the model horizon, or
/// after `max_steps` steps, whichever comes first.
pub fn rollout(
    model: &DecPomdpModel,
    policies: &[&dyn Policy],
    k: usize,
    max_steps: usize,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    let n = model.num_agents();
    if policies.len() != n {
        return Err(CoreError::PolicyCount {
            expected: n,
            got: policies.len(),
        });
    }
    let mut traj = Trajectory::default();
    if max_steps == 0 {
        return Ok(traj);
    }
    let limit = model.horizon().map_or(max_steps, |h| h.min(max_steps));
    let (mut state, o0) = reset(model, rng);
    let mut histories = start_histories(model, o0, k);
    let jo = model.joint_observations();

    for _ in 0..limit {
        let mut actions = Vec::with_capacity(n);
        for (i, pi) in policies.iter().enumerate() {
            let a = pi.sample(&histories[i], rng);
            if a >= model.num_actions(i) {
                return Err(CoreError::ActionOutOfRange {
                    agent: i,
                    action: a,
                    num_actions: model.num_actions(i),
                });
            }
            actions.push(a);
        }
        let joint_action = model.joint_actions().encode(&actions);
        let (next, obs, reward) = step(model, state, joint_action, rng);
        let next_histories: JointHistory = histories
            .iter()
            .enumerate()
            .map(|(i, h)| h.append_step(actions[i], jo.component(obs, i), k))
            .collect();
        traj.steps.push(Step {
            state,
            histories: std::mem::replace(&mut histories, next_histories),
            actions,
            joint_action,
            reward,
            next_state: next,
            joint_observation: obs,
        });
        if model.is_terminal(next) {
            break;
        }
        state = next;
    }
    Ok(traj)
}

/// `sum_t gamma^t r_t` with the first reward undiscounted.
pub fn discounted_return(rewards: impl IntoIterator<Item = f64>, gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut w = 1.0;
    for r in rewards {
        total += w * r;
        w *= gamma;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelDocument;
    use crate::policy::{constant_policy, FnPolicy};
    use proptest::prelude::*;
    use rand::RngCore;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain_model() -> DecPomdpModel {
        // one agent, two states, action 0 stays, action 1 flips with prob 0.3
        let mut transition = Vec::new();
        for s in 0..2 {
            transition.extend(if s == 0 { [1.0, 0.0] } else { [0.0, 1.0] });
            transition.extend(if s == 0 { [0.7, 0.3] } else { [0.3, 0.7] });
        }
        DecPomdpModel::new(ModelDocument {
            name: "chain".into(),
            num_states: 2,
            num_actions: vec![2],
            num_observations: vec![2],
            initial: vec![1.0, 0.0],
            transition,
            observation: vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
            initial_observation: None,
            reward: vec![1.0; 8],
            terminal: vec![false, false],
            gamma: 0.9,
            horizon: None,
        })
        .unwrap()
    }

    #[test]
    fn discounted_return_examples() {
        assert_eq!(discounted_return([5.0], 0.98), 5.0);
        assert!((discounted_return([0.0, 0.0, 100.0], 0.98) - 96.04).abs() < 1e-12);
        assert_eq!(discounted_return(std::iter::empty(), 0.98), 0.0);
    }

    #[test]
    fn zero_steps_gives_empty_trajectory() {
        let m = chain_model();
        let pi = constant_policy(2, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(rollout(&m, &[&pi], 1, 0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn out_of_range_action_is_rejected() {
        let m = chain_model();
        struct Bad;
        impl Policy for Bad {
            fn num_actions(&self) -> usize {
                2
            }
            fn action_probs(&self, _: &History) -> Vec<f64> {
                vec![0.5, 0.5]
            }
            fn sample(&self, _: &History, _: &mut dyn RngCore) -> usize {
                7
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = rollout(&m, &[&Bad], 1, 3, &mut rng).unwrap_err();
        assert!(matches!(err, CoreError::ActionOutOfRange { action: 7, .. }));
    }

    #[test]
    fn empirical_transitions_match_table() {
        let m = chain_model();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mut flips = 0usize;
        for _ in 0..n {
            let (next, _, _) = step(&m, 0, 1, &mut rng);
            flips += next;
        }
        let p = 0.3;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((flips as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn rollout_is_state_consistent_and_follows_append_rule() {
        let m = chain_model();
        let uniform = FnPolicy::new(2, |_: &History| vec![0.5, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = 2;
        let traj = rollout(&m, &[&uniform], k, 50, &mut rng).unwrap();
        assert_eq!(traj.len(), 50);
        for w in traj.steps.windows(2) {
            assert_eq!(w[0].next_state, w[1].state);
            let expected = w[0].histories[0].append_step(w[0].actions[0], w[0].joint_observation, k);
            assert_eq!(w[1].histories[0], expected);
        }
    }

    proptest! {
        #[test]
        fn discounted_return_is_linear(
            rewards in proptest::collection::vec(-100.0f64..100.0, 0..30),
            c in -10.0f64..10.0,
            gamma in 0.0f64..1.0,
        ) {
            let scaled: Vec<f64> = rewards.iter().map(|r| c * r).collect();
            let lhs = discounted_return(scaled, gamma);
            let rhs = c * discounted_return(rewards.iter().copied(), gamma);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
