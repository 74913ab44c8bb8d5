//! Random small Dec-POMDPs for property checks.

use maac_core::{DecPomdpModel, JointSpace, ModelDocument};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct RandomModelConfig {
    pub num_agents: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub max_observations: usize,
    pub horizon: Option<usize>,
    /// Add an absorbing terminal state reachable from every play state.
    pub with_terminal: bool,
    pub reward_scale: f64,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        Self {
            num_agents: 2,
            max_states: 3,
            max_actions: 2,
            max_observations: 2,
            horizon: Some(3),
            with_terminal: true,
            reward_scale: 10.0,
        }
    }
}

/// A random probability row; about a quarter of the entries are zeroed.
fn random_row<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let keep = rng.gen_range(0..len);
    let mut row: Vec<f64> = (0..len)
        .map(|j| {
            if j != keep && rng.gen_bool(0.25) {
                0.0
            } else {
                -(1.0 - rng.gen::<f64>()).ln()
            }
        })
        .collect();
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    row
}

pub fn random_model<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomModelConfig) -> DecPomdpModel {
    let plays = rng.gen_range(2..=cfg.max_states.max(2));
    let ns = plays + usize::from(cfg.with_terminal);
    let num_actions: Vec<usize> = (0..cfg.num_agents)
        .map(|_| rng.gen_range(2..=cfg.max_actions.max(2)))
        .collect();
    let num_observations: Vec<usize> = (0..cfg.num_agents)
        .map(|_| rng.gen_range(2..=cfg.max_observations.max(2)))
        .collect();
    let na = JointSpace::new(&num_actions).len();
    let no = JointSpace::new(&num_observations).len();

    let mut initial = random_row(rng, plays);
    let mut transition = Vec::with_capacity(ns * na * ns);
    let mut observation = Vec::with_capacity(ns * na * no);
    let mut reward = Vec::with_capacity(ns * na * ns);
    for s in 0..ns {
        for _ in 0..na {
            if s >= plays {
                let mut row = vec![0.0; ns];
                row[s] = 1.0;
                transition.extend(row);
                reward.extend(vec![0.0; ns]);
            } else {
                let mut row = random_row(rng, plays);
                if cfg.with_terminal {
                    let stop = rng.gen_range(0.0..0.3);
                    row.iter_mut().for_each(|p| *p *= 1.0 - stop);
                    row.push(stop);
                }
                transition.extend(row);
                reward.extend((0..ns).map(|_| cfg.reward_scale * rng.gen_range(-1.0..1.0)));
            }
            observation.extend(random_row(rng, no));
        }
    }
    let mut terminal = vec![false; plays];
    if cfg.with_terminal {
        terminal.push(true);
        initial.push(0.0);
    }
    DecPomdpModel::new(ModelDocument {
        name: "random".into(),
        num_states: ns,
        num_actions,
        num_observations,
        initial,
        transition,
        observation,
        initial_observation: None,
        reward,
        terminal,
        gamma: rng.gen_range(0.5..0.95),
        horizon: cfg.horizon,
    })
    .expect("generated rows are stochastic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let m = random_model(&mut rng, &RandomModelConfig::default());
            assert_eq!(m.num_agents(), 2);
            assert!(m.gamma() < 1.0);
        }
    }
}
