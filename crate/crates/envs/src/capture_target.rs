//! Capture Target on an `m x m` torus.
//!
//! Two agents chase a target that moves one cell right every step. Agent
//! moves slip to a uniformly chosen adjacent cell with probability `slip`.
//! Each agent sees its own cell and the target's cell, the latter replaced
//! by a null symbol with probability `blur`. Both agents sharing the
//! target's cell ends the episode with reward `+1`.

use maac_core::{EnvInfo, GenerativeEnv, StepOutcome};
use rand::{Rng, RngCore};

use crate::error::{EnvError, Result};

pub const NUM_ACTIONS: usize = 5;
pub const STAY: usize = 4;

#[derive(Clone, Debug)]
pub struct CaptureTarget {
    m: usize,
    pub slip: f64,
    pub blur: f64,
    info: EnvInfo,
    agents: [usize; 2],
    target: usize,
    t: usize,
    done: bool,
    last_obs: Vec<usize>,
    slips: u64,
    moves: u64,
    blurs: u64,
    sightings: u64,
}

impl CaptureTarget {
    pub fn new(m: usize, horizon: usize, gamma: f64) -> Result<Self> {
        if m < 2 {
            return Err(EnvError::InvalidParam {
                name: "m".into(),
                reason: format!("grid side must be at least 2, got {m}"),
            });
        }
        let cells = m * m;
        let info = EnvInfo {
            name: "capture_target".into(),
            num_agents: 2,
            num_actions: vec![NUM_ACTIONS; 2],
            num_observations: vec![cells * (cells + 1); 2],
            horizon,
            gamma,
        };
        Ok(Self {
            m,
            slip: 0.1,
            blur: 0.3,
            info,
            agents: [0, 0],
            target: 0,
            t: 0,
            done: true,
            last_obs: vec![0; 2],
            slips: 0,
            moves: 0,
            blurs: 0,
            sightings: 0,
        })
    }

    pub fn side(&self) -> usize {
        self.m
    }

    /// The null target symbol in observations.
    pub fn null_target(&self) -> usize {
        self.m * self.m
    }

    pub fn agents(&self) -> [usize; 2] {
        self.agents
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Observed slip frequency across all agent moves so far.
    pub fn slip_rate(&self) -> f64 {
        self.slips as f64 / self.moves.max(1) as f64
    }

    /// Observed fraction of target sightings replaced by the null symbol.
    pub fn blur_rate(&self) -> f64 {
        self.blurs as f64 / self.sightings.max(1) as f64
    }

    pub fn set_positions(&mut self, agents: [usize; 2], target: usize) {
        self.agents = agents;
        self.target = target;
        self.done = false;
    }

    /// Cell reached from `cell` by action `a` without noise.
    pub fn shift(&self, cell: usize, action: usize) -> usize {
        let m = self.m;
        let (x, y) = (cell % m, cell / m);
        let (x, y) = match action {
            0 => (x, (y + m - 1) % m),
            1 => (x, (y + 1) % m),
            2 => ((x + m - 1) % m, y),
            3 => ((x + 1) % m, y),
            _ => (x, y),
        };
        y * m + x
    }

    fn move_agent(&mut self, cell: usize, action: usize, rng: &mut dyn RngCore) -> usize {
        self.moves += 1;
        if rng.gen::<f64>() < self.slip {
            self.slips += 1;
            let dir = rng.gen_range(0..4);
            self.shift(cell, dir)
        } else {
            self.shift(cell, action)
        }
    }

    fn observe(&mut self, rng: &mut dyn RngCore) -> Vec<usize> {
        let width = self.m * self.m + 1;
        let mut out = Vec::with_capacity(2);
        for i in 0..2 {
            self.sightings += 1;
            let seen = if rng.gen::<f64>() < self.blur {
                self.blurs += 1;
                self.null_target()
            } else {
                self.target
            };
            out.push(self.agents[i] * width + seen);
        }
        out
    }

    fn captured(&self) -> bool {
        self.agents.iter().all(|&a| a == self.target)
    }
}

impl GenerativeEnv for CaptureTarget {
    fn info(&self) -> &EnvInfo {
        &self.info
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Option<Vec<usize>> {
        let cells = self.m * self.m;
        loop {
            self.agents = [rng.gen_range(0..cells), rng.gen_range(0..cells)];
            self.target = rng.gen_range(0..cells);
            if !self.captured() {
                break;
            }
        }
        self.t = 0;
        self.done = false;
        self.last_obs = self.observe(rng);
        Some(self.last_obs.clone())
    }

    fn step(&mut self, actions: &[usize], rng: &mut dyn RngCore) -> StepOutcome {
        if self.done {
            return StepOutcome {
                observations: self.last_obs.clone(),
                reward: 0.0,
                done: true,
            };
        }
        for i in 0..2 {
            self.agents[i] = self.move_agent(self.agents[i], actions[i], rng);
        }
        self.target = self.shift(self.target, 3);
        self.t += 1;
        let reward = if self.captured() { 1.0 } else { 0.0 };
        self.done = reward > 0.0 || self.t >= self.info.horizon;
        self.last_obs = self.observe(rng);
        StepOutcome {
            observations: self.last_obs.clone(),
            reward,
            done: self.done,
        }
    }
}

pub fn build_capture_target(m: usize) -> Result<CaptureTarget> {
    CaptureTarget::new(m, 60, 0.95)
}
