//! Two-agent Dec-Tiger.
//!
//! A tiger sits behind the left or right door. Agents may open a door or
//! listen; listening together yields an independent noisy hint per agent.
//! Opening any door ends the episode.
//!
//! Rewards (tiger door vs. treasure door):
//! - both listen: -2
//! - both open the treasure door: +20; both open the tiger door: -50
//! - open different doors: -100
//! - one opens the treasure door while the other listens: +9
//! - one opens the tiger door while the other listens: -101

use maac_core::{DecPomdpModel, JointSpace, ModelDocument};

use crate::error::{EnvError, Result};

pub const OPEN_LEFT: usize = 0;
pub const OPEN_RIGHT: usize = 1;
pub const LISTEN: usize = 2;
pub const HEAR_LEFT: usize = 0;
pub const HEAR_RIGHT: usize = 1;
pub const TIGER_LEFT: usize = 0;
pub const TIGER_RIGHT: usize = 1;
pub const DONE: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct DecTigerParams {
    pub horizon: Option<usize>,
    pub gamma: f64,
    pub listen_accuracy: f64,
}

impl Default for DecTigerParams {
    fn default() -> Self {
        Self {
            horizon: Some(3),
            gamma: 0.95,
            listen_accuracy: 0.85,
        }
    }
}

/// Team reward for joint action `(a1, a2)` with the tiger behind `tiger`.
pub fn dectiger_reward(tiger: usize, a1: usize, a2: usize) -> f64 {
    let opens_tiger = |a: usize| a == tiger;
    match (a1, a2) {
        (LISTEN, LISTEN) => -2.0,
        (LISTEN, a) | (a, LISTEN) => {
            if opens_tiger(a) {
                -101.0
            } else {
                9.0
            }
        }
        (x, y) if x != y => -100.0,
        (x, _) => {
            if opens_tiger(x) {
                -50.0
            } else {
                20.0
            }
        }
    }
}

pub fn build_dectiger() -> DecPomdpModel {
    build_dectiger_with(&DecTigerParams::default()).expect("default Dec-Tiger is well formed")
}

pub fn build_dectiger_with(params: &DecTigerParams) -> Result<DecPomdpModel> {
    let acc = params.listen_accuracy;
    if !(0.0..=1.0).contains(&acc) {
        return Err(EnvError::InvalidParam {
            name: "listen_accuracy".into(),
            reason: format!("must lie in [0, 1], got {acc}"),
        });
    }
    let actions = JointSpace::new(&[3, 3]);
    let obs = JointSpace::new(&[2, 2]);
    let (ns, na, no) = (3, actions.len(), obs.len());
    let mut transition = vec![0.0; ns * na * ns];
    let mut observation = vec![0.0; ns * na * no];
    let mut reward = vec![0.0; ns * na * ns];

    for s in 0..ns {
        for a in 0..na {
            let row = s * na + a;
            let (a1, a2) = (actions.component(a, 0), actions.component(a, 1));
            let both_listen = a1 == LISTEN && a2 == LISTEN;
            if s == DONE || !both_listen {
                transition[row * ns + DONE] = 1.0;
            } else {
                transition[row * ns + s] = 1.0;
            }
            if s != DONE {
                let next = if both_listen { s } else { DONE };
                reward[row * ns + next] = dectiger_reward(s, a1, a2);
            }
            for o in 0..no {
                let p = if s != DONE && both_listen {
                    let hear = |bit: usize| if bit == s { acc } else { 1.0 - acc };
                    hear(obs.component(o, 0)) * hear(obs.component(o, 1))
                } else {
                    0.25
                };
                observation[row * no + o] = p;
            }
        }
    }

    Ok(DecPomdpModel::new(ModelDocument {
        name: "dectiger".into(),
        num_states: ns,
        num_actions: vec![3, 3],
        num_observations: vec![2, 2],
        initial: vec![0.5, 0.5, 0.0],
        transition,
        observation,
        initial_observation: None,
        reward,
        terminal: vec![false, false, true],
        gamma: params.gamma,
        horizon: params.horizon,
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use maac_core::{discounted_return, rollout, FnPolicy, History};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn anchored_rewards() {
        // tiger left: right door holds the treasure
        assert_eq!(dectiger_reward(TIGER_LEFT, OPEN_RIGHT, OPEN_RIGHT), 20.0);
        assert_eq!(dectiger_reward(TIGER_LEFT, OPEN_LEFT, OPEN_RIGHT), -100.0);
        assert_eq!(dectiger_reward(TIGER_RIGHT, OPEN_RIGHT, OPEN_LEFT), -100.0);
        assert_eq!(dectiger_reward(TIGER_LEFT, OPEN_LEFT, OPEN_LEFT), -50.0);
        assert_eq!(dectiger_reward(TIGER_LEFT, LISTEN, LISTEN), -2.0);
        assert_eq!(dectiger_reward(TIGER_LEFT, LISTEN, OPEN_RIGHT), 9.0);
        assert_eq!(dectiger_reward(TIGER_RIGHT, OPEN_RIGHT, LISTEN), -101.0);
    }

    #[test]
    fn listening_keeps_state_and_opening_ends() {
        let m = build_dectiger();
        let ll = m.joint_actions().encode(&[LISTEN, LISTEN]);
        let ol = m.joint_actions().encode(&[OPEN_LEFT, LISTEN]);
        assert_eq!(m.transition(TIGER_LEFT, ll, TIGER_LEFT), 1.0);
        assert_eq!(m.transition(TIGER_LEFT, ol, DONE), 1.0);
        let p_both_right = m.observation_row(TIGER_LEFT, ll)[m.joint_observations().encode(&[0, 0])];
        assert!((p_both_right - 0.85 * 0.85).abs() < 1e-15);
    }

    /// Listen twice, then open the door away from the tiger if both of the
    /// agent's hints agree; otherwise listen once more.
    fn scripted(h: &History) -> Vec<f64> {
        let mut p = vec![0.0; 3];
        let e = h.entries();
        let a = if e.len() < 2 {
            LISTEN
        } else if e[0].obs == e[1].obs {
            if e[0].obs as usize == HEAR_LEFT {
                OPEN_RIGHT
            } else {
                OPEN_LEFT
            }
        } else {
            LISTEN
        };
        p[a] = 1.0;
        p
    }

    /// Exhaustive expectation of the scripted policy over horizon 3.
    fn enumerate(gamma: f64) -> f64 {
        let acc = 0.85;
        let hear = |o: usize, s: usize| if o == s { acc } else { 1.0 - acc };
        let mut total = 0.0;
        for s in 0..2 {
            for o in 0..16usize {
                // (agent1 t0, agent1 t1, agent2 t0, agent2 t1)
                let bits = [o >> 3 & 1, o >> 2 & 1, o >> 1 & 1, o & 1];
                let p = 0.5 * bits.iter().map(|&b| hear(b, s)).product::<f64>();
                let act = |x: usize, y: usize| {
                    if x != y {
                        LISTEN
                    } else if x == HEAR_LEFT {
                        OPEN_RIGHT
                    } else {
                        OPEN_LEFT
                    }
                };
                let r3 = dectiger_reward(s, act(bits[0], bits[1]), act(bits[2], bits[3]));
                total += p * (-2.0 - 2.0 * gamma + gamma * gamma * r3);
            }
        }
        total
    }

    #[test]
    fn scripted_policy_matches_enumeration() {
        let m = build_dectiger();
        let expected = enumerate(m.gamma());
        let pi = FnPolicy::new(3, scripted);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 200_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let t = rollout(&m, &[&pi, &pi], 2, 10, &mut rng).unwrap();
            assert!(t.len() <= 3);
            let g = discounted_return(t.rewards(), m.gamma());
            sum += g;
            sq += g * g;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "{mean} vs {expected}");
    }
}
