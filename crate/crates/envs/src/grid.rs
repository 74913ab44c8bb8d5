//! Two-agent grid worlds built from tile maps: Go Together, Find Treasure,
//! Cleaner and Move Box.
//!
//! Actions are `0 up, 1 down, 2 left, 3 right, 4 stay`. Moves into walls,
//! closed doors or the box are cancelled. When two agents would end up in
//! the same cell, or swap cells, both stay put.

use std::str::FromStr;

use maac_core::{EnvInfo, GenerativeEnv, StepOutcome};
use rand::RngCore;

use crate::error::{EnvError, Result};
use crate::tilemap::{Dir, Tile, TileMap};

pub const NUM_GRID_ACTIONS: usize = 5;
pub const STAY: usize = 4;

pub fn action_dir(action: usize) -> Option<Dir> {
    match action {
        0 => Some(Dir::Up),
        1 => Some(Dir::Down),
        2 => Some(Dir::Left),
        3 => Some(Dir::Right),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridWorldKind {
    GoTogether,
    FindTreasure,
    Cleaner,
    MoveBox,
}

impl GridWorldKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::GoTogether => "go_together",
            Self::FindTreasure => "find_treasure",
            Self::Cleaner => "cleaner",
            Self::MoveBox => "move_box",
        }
    }

    pub fn default_map(self) -> &'static str {
        match self {
            Self::GoTogether => include_str!("../data/go_together.map"),
            Self::FindTreasure => include_str!("../data/find_treasure.map"),
            Self::Cleaner => include_str!("../data/cleaner.map"),
            Self::MoveBox => include_str!("../data/move_box.map"),
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            Self::GoTogether => 30,
            Self::FindTreasure => 40,
            Self::Cleaner => 30,
            Self::MoveBox => 20,
        }
    }
}

impl FromStr for GridWorldKind {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "go_together" => Self::GoTogether,
            "find_treasure" => Self::FindTreasure,
            "cleaner" => Self::Cleaner,
            "move_box" => Self::MoveBox,
            other => return Err(EnvError::UnknownEnv(other.to_string())),
        })
    }
}

/// Tunable magnitudes. Defaults follow the documented domain rewards; the
/// Go Together distance penalty is a free parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRewards {
    pub goal: f64,
    pub near_goal: f64,
    pub clean: f64,
    pub distance_penalty: f64,
    pub max_distance: usize,
}

impl GridRewards {
    fn for_kind(kind: GridWorldKind) -> Self {
        Self {
            goal: match kind {
                GridWorldKind::GoTogether => 10.0,
                _ => 100.0,
            },
            near_goal: 10.0,
            clean: 1.0,
            distance_penalty: -0.1,
            max_distance: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridWorld {
    kind: GridWorldKind,
    map: TileMap,
    info: EnvInfo,
    pub rewards: GridRewards,
    spawns: Vec<usize>,
    box_start: Option<usize>,
    agents: Vec<usize>,
    box_cell: Option<usize>,
    cleaned: Vec<bool>,
    t: usize,
    done: bool,
    last_obs: Vec<usize>,
}

impl GridWorld {
    pub fn new(kind: GridWorldKind, map: TileMap, horizon: usize, gamma: f64) -> Result<Self> {
        let spawns = map.find(Tile::Spawn);
        if spawns.len() != 2 {
            return Err(EnvError::InvalidParam {
                name: "map".into(),
                reason: format!("expected 2 spawn tiles, found {}", spawns.len()),
            });
        }
        let box_start = map.find(Tile::Box).first().copied();
        let require = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(EnvError::InvalidParam {
                    name: "map".into(),
                    reason: format!("{} map needs {what}", kind.name()),
                })
            }
        };
        match kind {
            GridWorldKind::GoTogether => require(!map.find(Tile::Goal).is_empty(), "a goal")?,
            GridWorldKind::FindTreasure => require(
                !map.find(Tile::Goal).is_empty()
                    && !map.find(Tile::Switch).is_empty()
                    && !map.find(Tile::Door).is_empty(),
                "a goal, a switch and a door",
            )?,
            GridWorldKind::Cleaner => {}
            GridWorldKind::MoveBox => require(
                box_start.is_some()
                    && !map.find(Tile::Goal).is_empty()
                    && !map.find(Tile::NearGoal).is_empty(),
                "a box and both destinations",
            )?,
        }
        let n = map.len();
        let num_obs = match kind {
            GridWorldKind::GoTogether | GridWorldKind::MoveBox => n * n,
            GridWorldKind::FindTreasure => n * 2,
            GridWorldKind::Cleaner => n,
        };
        let info = EnvInfo {
            name: kind.name().into(),
            num_agents: 2,
            num_actions: vec![NUM_GRID_ACTIONS; 2],
            num_observations: vec![num_obs; 2],
            horizon,
            gamma,
        };
        Ok(Self {
            kind,
            rewards: GridRewards::for_kind(kind),
            cleaned: vec![false; n],
            agents: spawns.clone(),
            spawns,
            box_start,
            box_cell: box_start,
            map,
            info,
            t: 0,
            done: true,
            last_obs: vec![0; 2],
        })
    }

    pub fn kind(&self) -> GridWorldKind {
        self.kind
    }

    pub fn map(&self) -> &TileMap {
        &self.map
    }

    pub fn agents(&self) -> &[usize] {
        &self.agents
    }

    pub fn box_cell(&self) -> Option<usize> {
        self.box_cell
    }

    pub fn is_cleaned(&self, cell: usize) -> bool {
        self.cleaned[cell]
    }

    /// Place agents (and the box) directly; used by tests and scripted runs.
    pub fn set_positions(&mut self, agents: [usize; 2], box_cell: Option<usize>) {
        self.agents = agents.to_vec();
        if box_cell.is_some() {
            self.box_cell = box_cell;
        }
        self.last_obs = self.observe();
    }

    fn door_open(&self) -> bool {
        self.agents
            .iter()
            .any(|&c| self.map.tile(c) == Tile::Switch)
    }

    fn passable(&self, cell: usize, door_open: bool) -> bool {
        match self.map.tile(cell) {
            Tile::Wall => false,
            Tile::Door => door_open,
            _ => Some(cell) != self.box_cell,
        }
    }

    fn observe(&self) -> Vec<usize> {
        let n = self.map.len();
        let door = self.door_open() as usize;
        (0..2)
            .map(|i| {
                let own = self.agents[i];
                match self.kind {
                    GridWorldKind::GoTogether => own * n + self.agents[1 - i],
                    GridWorldKind::FindTreasure => own * 2 + door,
                    GridWorldKind::Cleaner => own,
                    GridWorldKind::MoveBox => own * n + self.box_cell.unwrap_or(0),
                }
            })
            .collect()
    }

    fn adjacent_to_box(&self, agent: usize) -> bool {
        let Some(b) = self.box_cell else { return false };
        Dir::ALL
            .iter()
            .any(|&d| self.map.neighbor(b, d) == Some(self.agents[agent]))
    }

    fn try_push(&mut self, actions: &[usize]) -> bool {
        if self.kind != GridWorldKind::MoveBox || actions[0] != actions[1] {
            return false;
        }
        let Some(dir) = action_dir(actions[0]) else { return false };
        if !(self.adjacent_to_box(0) && self.adjacent_to_box(1)) {
            return false;
        }
        let b = self.box_cell.expect("move box has a box");
        match self.map.neighbor(b, dir) {
            Some(target) if !self.agents.contains(&target) => {
                self.box_cell = Some(target);
                true
            }
            _ => false,
        }
    }

    fn move_agents(&mut self, actions: &[usize]) {
        let door = self.door_open();
        let proposed: Vec<usize> = (0..2)
            .map(|i| {
                let here = self.agents[i];
                action_dir(actions[i])
                    .and_then(|d| self.map.neighbor(here, d))
                    .filter(|&c| self.passable(c, door))
                    .unwrap_or(here)
            })
            .collect();
        self.agents = resolve_collisions(&self.agents, &proposed);
    }
}

/// Cancel moves that would put two agents in one cell or swap them.
pub fn resolve_collisions(current: &[usize], proposed: &[usize]) -> Vec<usize> {
    let mut next = proposed.to_vec();
    loop {
        let mut changed = false;
        for i in 0..next.len() {
            for j in 0..next.len() {
                if i == j || next[i] == current[i] {
                    continue;
                }
                let same_target = next[i] == next[j];
                let swap = next[i] == current[j] && next[j] == current[i];
                if same_target || swap {
                    next[i] = current[i];
                    if next[j] != current[j] {
                        next[j] = current[j];
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            return next;
        }
    }
}

impl GenerativeEnv for GridWorld {
    fn info(&self) -> &EnvInfo {
        &self.info
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Option<Vec<usize>> {
        self.agents = self.spawns.clone();
        self.box_cell = self.box_start;
        self.cleaned.iter_mut().for_each(|c| *c = false);
        for &a in &self.agents {
            self.cleaned[a] = true;
        }
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
        let pushed = self.try_push(actions);
        self.move_agents(actions);
        self.t += 1;

        let mut reward = 0.0;
        let mut finished = false;
        match self.kind {
            GridWorldKind::GoTogether => {
                if self.agents.iter().all(|&c| self.map.tile(c) == Tile::Goal) {
                    reward = self.rewards.goal;
                    finished = true;
                } else {
                    let d = self.map.chebyshev(self.agents[0], self.agents[1]);
                    if d == 0 || d > self.rewards.max_distance {
                        reward = self.rewards.distance_penalty;
                    }
                }
            }
            GridWorldKind::FindTreasure => {
                if self.agents.iter().any(|&c| self.map.tile(c) == Tile::Goal) {
                    reward = self.rewards.goal;
                    finished = true;
                }
            }
            GridWorldKind::Cleaner => {
                for i in 0..2 {
                    let c = self.agents[i];
                    if !self.cleaned[c] {
                        self.cleaned[c] = true;
                        reward += self.rewards.clean;
                    }
                }
                finished = (0..self.map.len())
                    .all(|c| self.map.tile(c) == Tile::Wall || self.cleaned[c]);
            }
            GridWorldKind::MoveBox => {
                if pushed {
                    match self.box_cell.map(|b| self.map.tile(b)) {
                        Some(Tile::NearGoal) => {
                            reward = self.rewards.near_goal;
                            finished = true;
                        }
                        Some(Tile::Goal) => {
                            reward = self.rewards.goal;
                            finished = true;
                        }
                        _ => {}
                    }
                }
            }
        }
        self.done = finished || self.t >= self.info.horizon;
        self.last_obs = self.observe();
        StepOutcome {
            observations: self.last_obs.clone(),
            reward,
            done: self.done,
        }
    }
}

/// Build a grid world by name with its shipped map. `map_text` overrides
/// the layout; `horizon` and `gamma` fall back to per-domain defaults.
pub fn build_gridworld(
    name: &str,
    map_text: Option<&str>,
    horizon: Option<usize>,
    gamma: Option<f64>,
) -> Result<GridWorld> {
    let kind: GridWorldKind = name.parse()?;
    let map = TileMap::parse(map_text.unwrap_or(kind.default_map()))?;
    GridWorld::new(
        kind,
        map,
        horizon.unwrap_or(kind.default_horizon()),
        gamma.unwrap_or(0.95),
    )
}
