//! Step-function interface shared by explicit models and generative grid
//! worlds.

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::model::DecPomdpModel;
use crate::sim;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvInfo {
    pub name: String,
    pub num_agents: usize,
    pub num_actions: Vec<usize>,
    pub num_observations: Vec<usize>,
    /// Maximum episode length.
    pub horizon: usize,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub observations: Vec<usize>,
    pub reward: f64,
    pub done: bool,
}

/// Episodic multi-agent environment with a shared team reward.
///
/// Once `done` is returned every further step returns `done` with zero
/// reward and unchanged observations.
pub trait GenerativeEnv: Send {
    fn info(&self) -> &EnvInfo;

    /// Start a new episode. Returns the initial per-agent observations, or
    /// `None` when agents start without one.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Option<Vec<usize>>;

    fn step(&mut self, actions: &[usize], rng: &mut dyn RngCore) -> StepOutcome;
}

/// Adapter running an explicit model through the [`GenerativeEnv`] interface.
#[derive(Clone, Debug)]
pub struct ModelEnv {
    model: Arc<DecPomdpModel>,
    info: EnvInfo,
    state: usize,
    t: usize,
    last_obs: Vec<usize>,
    done: bool,
}

impl ModelEnv {
    /// `max_steps` caps episodes of models without a horizon.
    pub fn new(model: Arc<DecPomdpModel>, max_steps: usize) -> Self {
        let n = model.num_agents();
        let info = EnvInfo {
            name: model.name().to_string(),
            num_agents: n,
            num_actions: (0..n).map(|i| model.num_actions(i)).collect(),
            num_observations: (0..n).map(|i| model.num_observations(i)).collect(),
            horizon: model.horizon().map_or(max_steps, |h| h.min(max_steps)),
            gamma: model.gamma(),
        };
        Self {
            model,
            info,
            state: 0,
            t: 0,
            last_obs: vec![0; n],
            done: true,
        }
    }

    pub fn model(&self) -> &DecPomdpModel {
        &self.model
    }

    pub fn state(&self) -> usize {
        self.state
    }
}

impl GenerativeEnv for ModelEnv {
    fn info(&self) -> &EnvInfo {
        &self.info
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Option<Vec<usize>> {
        let (s, o) = sim::reset(&self.model, rng);
        self.state = s;
        self.t = 0;
        self.done = false;
        o.map(|o| {
            self.last_obs = self.model.joint_observations().decode(o);
            self.last_obs.clone()
        })
    }

    fn step(&mut self, actions: &[usize], rng: &mut dyn RngCore) -> StepOutcome {
        if self.done {
            return StepOutcome {
                observations: self.last_obs.clone(),
                reward: 0.0,
                done: true,
            };
        }
        let a = self.model.joint_actions().encode(actions);
        let (next, o, r) = sim::step(&self.model, self.state, a, rng);
        self.state = next;
        self.t += 1;
        self.done = self.model.is_terminal(next) || self.t >= self.info.horizon;
        self.last_obs = self.model.joint_observations().decode(o);
        StepOutcome {
            observations: self.last_obs.clone(),
            reward: r,
            done: self.done,
        }
    }
}
