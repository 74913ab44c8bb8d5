//! Actors and episode collection through the generative interface.

use maac_core::policy::sample_categorical;
use maac_core::{GenerativeEnv, History, JointHistory, JointSpace, SoftmaxPolicy};
use rand::RngCore;

/// Decentralized actors (one softmax per agent over local histories) or a
/// single joint actor over joint histories and joint actions.
#[derive(Clone, Debug)]
pub enum Actors {
    Independent(Vec<SoftmaxPolicy<History>>),
    Joint(SoftmaxPolicy<JointHistory>),
}

impl Actors {
    pub fn independent(num_actions: &[usize]) -> Self {
        Self::Independent(num_actions.iter().map(|&n| SoftmaxPolicy::new(n)).collect())
    }

    pub fn joint(num_actions: &[usize]) -> Self {
        Self::Joint(SoftmaxPolicy::new(JointSpace::new(num_actions).len()))
    }

    /// Sample a joint action, returned as its per-agent components.
    pub fn sample(
        &self,
        space: &JointSpace,
        histories: &JointHistory,
        rng: &mut dyn RngCore,
    ) -> Vec<usize> {
        match self {
            Self::Independent(pis) => pis
                .iter()
                .zip(histories)
                .map(|(pi, h)| sample_categorical(&pi.probs(h), rng))
                .collect(),
            Self::Joint(pi) => space.decode(sample_categorical(&pi.probs(histories), rng)),
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            Self::Independent(pis) => pis.iter().all(|p| p.all_finite()),
            Self::Joint(pi) => pi.all_finite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvStep {
    /// Histories the actions were chosen from.
    pub histories: JointHistory,
    pub actions: Vec<usize>,
    pub joint_action: usize,
    pub reward: f64,
    pub done: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Episode {
    pub steps: Vec<EnvStep>,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn undiscounted_return(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn discounted_return(&self, gamma: f64) -> f64 {
        maac_core::discounted_return(self.steps.iter().map(|s| s.reward), gamma)
    }
}

/// Play one episode until the environment reports `done` or its horizon.
pub fn run_episode(
    env: &mut dyn GenerativeEnv,
    actors: &Actors,
    k: usize,
    rng: &mut dyn RngCore,
) -> Episode {
    let info = env.info().clone();
    let space = JointSpace::new(&info.num_actions);
    let first = env.reset(rng);
    let mut histories: JointHistory = (0..info.num_agents)
        .map(|i| History::start(first.as_ref().map(|o| o[i]), k))
        .collect();
    let mut episode = Episode::default();
    for _ in 0..info.horizon {
        let actions = actors.sample(&space, &histories, rng);
        let out = env.step(&actions, rng);
        let next: JointHistory = histories
            .iter()
            .enumerate()
            .map(|(i, h)| h.append_step(actions[i], out.observations[i], k))
            .collect();
        episode.steps.push(EnvStep {
            histories: std::mem::replace(&mut histories, next),
            joint_action: space.encode(&actions),
            actions,
            reward: out.reward,
            done: out.done,
        });
        if out.done {
            break;
        }
    }
    episode
}

/// Mean undiscounted and discounted return over `episodes` on-policy runs.
pub fn evaluate(
    env: &mut dyn GenerativeEnv,
    actors: &Actors,
    k: usize,
    episodes: usize,
    rng: &mut dyn RngCore,
) -> (f64, f64) {
    let gamma = env.info().gamma;
    let (mut total, mut disc) = (0.0, 0.0);
    for _ in 0..episodes {
        let ep = run_episode(env, actors, k, rng);
        total += ep.undiscounted_return();
        disc += ep.discounted_return(gamma);
    }
    let n = episodes.max(1) as f64;
    (total / n, disc / n)
}
