//! Small Box Pushing on an `m x m` grid with 2 or 3 agents.
//!
//! Agents have a heading and act with `0 forward, 1 turn left, 2 turn right,
//! 3 stay`. Moving forward into a small box pushes it one cell. A box
//! entering the top row (the goal area) ends the episode with `+100`.
//! Each agent observes only the cell in front of it.

use maac_core::{EnvInfo, GenerativeEnv, StepOutcome};
use rand::RngCore;

use crate::error::{EnvError, Result};

pub const FORWARD: usize = 0;
pub const TURN_LEFT: usize = 1;
pub const TURN_RIGHT: usize = 2;
pub const STAY: usize = 3;

pub const OBS_EMPTY: usize = 0;
pub const OBS_TEAMMATE: usize = 1;
pub const OBS_BOX: usize = 2;
pub const OBS_BOUNDARY: usize = 3;

pub const GOAL_REWARD: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    fn left(self) -> Self {
        match self {
            Self::North => Self::West,
            Self::West => Self::South,
            Self::South => Self::East,
            Self::East => Self::North,
        }
    }

    fn right(self) -> Self {
        self.left().left().left()
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Self::North => (0, -1),
            Self::East => (1, 0),
            Self::South => (0, 1),
            Self::West => (-1, 0),
        }
    }
}

type Pos = (usize, usize);

#[derive(Clone, Debug)]
pub struct SmallBoxPushing {
    m: usize,
    info: EnvInfo,
    agents: Vec<(Pos, Heading)>,
    boxes: Vec<Pos>,
    t: usize,
    done: bool,
    last_obs: Vec<usize>,
}

impl SmallBoxPushing {
    pub fn new(m: usize, n_agents: usize, horizon: usize) -> Result<Self> {
        if m < 4 {
            return Err(EnvError::InvalidParam {
                name: "m".into(),
                reason: format!("grid side must be at least 4, got {m}"),
            });
        }
        if !(2..=3).contains(&n_agents) {
            return Err(EnvError::InvalidParam {
                name: "n_agents".into(),
                reason: format!("must be 2 or 3, got {n_agents}"),
            });
        }
        let info = EnvInfo {
            name: "small_box_pushing".into(),
            num_agents: n_agents,
            num_actions: vec![4; n_agents],
            num_observations: vec![4; n_agents],
            horizon,
            gamma: 0.98,
        };
        let mut env = Self {
            m,
            info,
            agents: Vec::new(),
            boxes: Vec::new(),
            t: 0,
            done: true,
            last_obs: Vec::new(),
        };
        env.place_start();
        Ok(env)
    }

    fn place_start(&mut self) {
        let m = self.m;
        let xs = [1, m - 2, 0];
        self.agents = (0..self.info.num_agents)
            .map(|i| ((xs[i], m - 1), Heading::North))
            .collect();
        self.boxes = vec![(1, m / 2), (m - 2, m / 2)];
    }

    pub fn agents(&self) -> &[(Pos, Heading)] {
        &self.agents
    }

    pub fn boxes(&self) -> &[Pos] {
        &self.boxes
    }

    pub fn set_layout(&mut self, agents: Vec<(Pos, Heading)>, boxes: Vec<Pos>) {
        assert_eq!(agents.len(), self.info.num_agents);
        self.agents = agents;
        self.boxes = boxes;
        self.done = false;
        self.last_obs = self.observe();
    }

    fn ahead(&self, pos: Pos, heading: Heading) -> Option<Pos> {
        let (dx, dy) = heading.delta();
        let x = pos.0.checked_add_signed(dx).filter(|&v| v < self.m)?;
        let y = pos.1.checked_add_signed(dy).filter(|&v| v < self.m)?;
        Some((x, y))
    }

    fn occupied_by_agent(&self, p: Pos) -> bool {
        self.agents.iter().any(|(q, _)| *q == p)
    }

    fn observe(&self) -> Vec<usize> {
        self.agents
            .iter()
            .map(|&(pos, h)| match self.ahead(pos, h) {
                None => OBS_BOUNDARY,
                Some(p) if self.boxes.contains(&p) => OBS_BOX,
                Some(p) if self.occupied_by_agent(p) => OBS_TEAMMATE,
                Some(_) => OBS_EMPTY,
            })
            .collect()
    }
}

/// What one agent intends to do this step.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Intent {
    Stay,
    Move(Pos),
    Push { to: Pos, box_idx: usize, box_to: Pos },
}

impl GenerativeEnv for SmallBoxPushing {
    fn info(&self) -> &EnvInfo {
        &self.info
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Option<Vec<usize>> {
        self.place_start();
        self.t = 0;
        self.done = false;
        self.last_obs = self.observe();
        Some(self.last_obs.clone())
    }

    fn step(&mut self, actions: &[usize], _rng: &mut dyn RngCore) -> StepOutcome {
        if self.done {
            return StepOutcome {
                observations: self.last_obs.clone(),
                reward: 0.0,
                done: true,
            };
        }
        let n = self.agents.len();
        let mut intents = vec![Intent::Stay; n];
        for i in 0..n {
            let (pos, h) = self.agents[i];
            match actions[i] {
                TURN_LEFT => self.agents[i].1 = h.left(),
                TURN_RIGHT => self.agents[i].1 = h.right(),
                FORWARD => {
                    let Some(front) = self.ahead(pos, h) else { continue };
                    if self.occupied_by_agent(front) {
                        continue;
                    }
                    if let Some(b) = self.boxes.iter().position(|&p| p == front) {
                        if let Some(beyond) = self.ahead(front, h) {
                            if !self.boxes.contains(&beyond) && !self.occupied_by_agent(beyond) {
                                intents[i] = Intent::Push {
                                    to: front,
                                    box_idx: b,
                                    box_to: beyond,
                                };
                            }
                        }
                    } else {
                        intents[i] = Intent::Move(front);
                    }
                }
                _ => {}
            }
        }

        // Conflicting intents (same destination, same box, or a box pushed
        // into a cell another agent enters) cancel symmetrically.
        let cells = |it: &Intent| -> Vec<Pos> {
            match *it {
                Intent::Stay => vec![],
                Intent::Move(p) => vec![p],
                Intent::Push { to, box_to, .. } => vec![to, box_to],
            }
        };
        let mut cancel = vec![false; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let ci = cells(&intents[i]);
                let cj = cells(&intents[j]);
                let overlap = ci.iter().any(|p| cj.contains(p));
                let same_box = matches!(
                    (intents[i], intents[j]),
                    (Intent::Push { box_idx: a, .. }, Intent::Push { box_idx: b, .. }) if a == b
                );
                if overlap || same_box {
                    cancel[i] = true;
                    cancel[j] = true;
                }
            }
        }

        let mut reward = 0.0;
        for i in 0..n {
            if cancel[i] {
                continue;
            }
            match intents[i] {
                Intent::Stay => {}
                Intent::Move(p) => self.agents[i].0 = p,
                Intent::Push { to, box_idx, box_to } => {
                    self.agents[i].0 = to;
                    self.boxes[box_idx] = box_to;
                    if box_to.1 == 0 {
                        reward = GOAL_REWARD;
                    }
                }
            }
        }
        self.t += 1;
        self.done = reward > 0.0 || self.t >= self.info.horizon;
        self.last_obs = self.observe();
        StepOutcome {
            observations: self.last_obs.clone(),
            reward,
            done: self.done,
        }
    }
}

pub fn build_small_box_pushing(m: usize, n_agents: usize) -> Result<SmallBoxPushing> {
    SmallBoxPushing::new(m, n_agents, 100)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn forward_into_box_pushes_it() {
        let mut env = build_small_box_pushing(6, 2).unwrap();
        let mut r = rng();
        env.reset(&mut r);
        env.set_layout(
            vec![((1, 4), Heading::North), ((4, 5), Heading::North)],
            vec![(1, 3), (4, 3)],
        );
        assert_eq!(env.observe()[0], OBS_BOX);
        env.step(&[FORWARD, STAY], &mut r);
        assert_eq!(env.boxes()[0], (1, 2));
        assert_eq!(env.agents()[0].0, (1, 3));
    }

    #[test]
    fn box_into_goal_row_ends_episode() {
        let mut env = build_small_box_pushing(5, 2).unwrap();
        let mut r = rng();
        env.reset(&mut r);
        env.set_layout(
            vec![((1, 2), Heading::North), ((3, 4), Heading::North)],
            vec![(1, 1), (3, 2)],
        );
        let out = env.step(&[FORWARD, STAY], &mut r);
        assert_eq!(out.reward, 100.0);
        assert!(out.done);
    }

    #[test]
    fn facing_boundary_observes_boundary() {
        let mut env = build_small_box_pushing(4, 3).unwrap();
        let mut r = rng();
        let obs = env.reset(&mut r).unwrap();
        assert_eq!(obs.len(), 3);
        env.step(&[TURN_RIGHT, TURN_RIGHT, TURN_RIGHT], &mut r);
        let out = env.step(&[TURN_RIGHT, STAY, TURN_RIGHT], &mut r);
        // agents 0 and 2 now face south, off the bottom edge
        assert_eq!(out.observations[0], OBS_BOUNDARY);
        assert_eq!(out.observations[2], OBS_BOUNDARY);
    }

    #[test]
    fn turning_and_teammate_observation() {
        let mut env = build_small_box_pushing(4, 2).unwrap();
        let mut r = rng();
        env.reset(&mut r);
        env.set_layout(
            vec![((1, 3), Heading::East), ((2, 3), Heading::North)],
            vec![(1, 1), (2, 1)],
        );
        assert_eq!(env.observe()[0], OBS_TEAMMATE);
        env.step(&[TURN_LEFT, STAY], &mut r);
        assert_eq!(env.agents()[0].1, Heading::North);
    }

    #[test]
    fn simultaneous_moves_into_one_cell_cancel() {
        let mut env = build_small_box_pushing(5, 2).unwrap();
        let mut r = rng();
        env.reset(&mut r);
        env.set_layout(
            vec![((1, 4), Heading::East), ((3, 4), Heading::West)],
            vec![(1, 1), (3, 1)],
        );
        env.step(&[FORWARD, FORWARD], &mut r);
        assert_eq!(env.agents()[0].0, (1, 4));
        assert_eq!(env.agents()[1].0, (3, 4));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_small_box_pushing(3, 2).is_err());
        assert!(build_small_box_pushing(6, 4).is_err());
    }
}
