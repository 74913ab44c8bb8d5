//! Explicit tabular Dec-POMDP.
//!
//! Tables are flat and row-major:
//! - `transition[(s * |A| + a) * |S| + s']  = Pr(s' | s, a)`
//! - `observation[(s * |A| + a) * |Ω| + o]  = Pr(o | s, a)` where `s` is the
//!   state the joint action was taken in
//! - `reward[(s * |A| + a) * |S| + s']      = R(s, a, s')`
//! - `initial_observation[s * |Ω| + o]      = Pr(o | s0 = s)` (optional)
//!
//! Joint actions and observations are encoded by [`JointSpace`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::joint::JointSpace;

/// Row-sum tolerance applied to models built in code.
pub const BUILD_TOLERANCE: f64 = 1e-12;
/// Row-sum tolerance applied to models loaded from JSON.
pub const LOAD_TOLERANCE: f64 = 1e-9;

/// Serialized form of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    #[serde(default)]
    pub name: String,
    pub num_states: usize,
    pub num_actions: Vec<usize>,
    pub num_observations: Vec<usize>,
    pub initial: Vec<f64>,
    pub transition: Vec<f64>,
    pub observation: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_observation: Option<Vec<f64>>,
    pub reward: Vec<f64>,
    #[serde(default)]
    pub terminal: Vec<bool>,
    pub gamma: f64,
    #[serde(default)]
    pub horizon: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DecPomdpModel {
    doc: ModelDocument,
    actions: JointSpace,
    observations: JointSpace,
}

impl DecPomdpModel {
    pub fn new(doc: ModelDocument) -> Result<Self> {
        Self::with_tolerance(doc, BUILD_TOLERANCE)
    }

    pub fn with_tolerance(mut doc: ModelDocument, tol: f64) -> Result<Self> {
        if doc.terminal.is_empty() {
            doc.terminal = vec![false; doc.num_states];
        }
        let actions = JointSpace::new(&doc.num_actions);
        let observations = JointSpace::new(&doc.num_observations);
        let model = Self {
            doc,
            actions,
            observations,
        };
        model.validate(tol)?;
        Ok(model)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        Self::with_tolerance(doc, LOAD_TOLERANCE)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.doc)?)
    }

    pub fn document(&self) -> &ModelDocument {
        &self.doc
    }

    fn validate(&self, tol: f64) -> Result<()> {
        let d = &self.doc;
        let bad = |m: String| Err(CoreError::InvalidModel(m));
        if d.num_actions.is_empty() {
            return bad("at least one agent is required".into());
        }
        if d.num_actions.len() != d.num_observations.len() {
            return bad("action and observation lists differ in agent count".into());
        }
        if d.num_states == 0
            || d.num_actions.contains(&0)
            || d.num_observations.contains(&0)
        {
            return bad("every state, action and observation set must be non-empty".into());
        }
        if !(0.0..1.0).contains(&d.gamma) {
            return bad(format!("gamma must lie in [0, 1), got {}", d.gamma));
        }
        if d.horizon == Some(0) {
            return bad("horizon must be positive".into());
        }
        let (ns, na, no) = (d.num_states, self.actions.len(), self.observations.len());
        let expect = |name: &str, got: usize, want: usize| {
            if got != want {
                Err(CoreError::InvalidModel(format!(
                    "{name} has {got} entries, expected {want}"
                )))
            } else {
                Ok(())
            }
        };
        expect("initial", d.initial.len(), ns)?;
        expect("transition", d.transition.len(), ns * na * ns)?;
        expect("observation", d.observation.len(), ns * na * no)?;
        expect("reward", d.reward.len(), ns * na * ns)?;
        expect("terminal", d.terminal.len(), ns)?;
        if let Some(o0) = &d.initial_observation {
            expect("initial_observation", o0.len(), ns * no)?;
        }
        if d.reward.iter().any(|r| !r.is_finite()) {
            return bad("reward table contains non-finite entries".into());
        }

        check_rows("initial", &d.initial, ns, tol)?;
        check_rows("transition", &d.transition, ns, tol)?;
        check_rows("observation", &d.observation, no, tol)?;
        if let Some(o0) = &d.initial_observation {
            check_rows("initial_observation", o0, no, tol)?;
        }
        for s in 0..ns {
            if d.terminal[s] && d.initial[s] > 0.0 {
                return bad(format!("terminal state {s} has initial probability"));
            }
            if !d.terminal[s] {
                continue;
            }
            for a in 0..na {
                if (self.transition(s, a, s) - 1.0).abs() > tol {
                    return bad(format!("terminal state {s} is not absorbing"));
                }
                if self.reward(s, a, s) != 0.0 {
                    return bad(format!("terminal state {s} has non-zero reward"));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.doc.name
    }

    pub fn num_agents(&self) -> usize {
        self.doc.num_actions.len()
    }

    pub fn num_states(&self) -> usize {
        self.doc.num_states
    }

    pub fn num_actions(&self, agent: usize) -> usize {
        self.doc.num_actions[agent]
    }

    pub fn num_observations(&self, agent: usize) -> usize {
        self.doc.num_observations[agent]
    }

    pub fn joint_actions(&self) -> &JointSpace {
        &self.actions
    }

    pub fn joint_observations(&self) -> &JointSpace {
        &self.observations
    }

    pub fn gamma(&self) -> f64 {
        self.doc.gamma
    }

    pub fn horizon(&self) -> Option<usize> {
        self.doc.horizon
    }

    pub fn initial(&self) -> &[f64] {
        &self.doc.initial
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.doc.terminal[s]
    }

    pub fn has_initial_observation(&self) -> bool {
        self.doc.initial_observation.is_some()
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let ns = self.doc.num_states;
        let base = (s * self.actions.len() + a) * ns;
        &self.doc.transition[base..base + ns]
    }

    pub fn transition(&self, s: usize, a: usize, next: usize) -> f64 {
        self.transition_row(s, a)[next]
    }

    pub fn observation_row(&self, s: usize, a: usize) -> &[f64] {
        let no = self.observations.len();
        let base = (s * self.actions.len() + a) * no;
        &self.doc.observation[base..base + no]
    }

    pub fn initial_observation_row(&self, s: usize) -> Option<&[f64]> {
        let no = self.observations.len();
        self.doc
            .initial_observation
            .as_ref()
            .map(|t| &t[s * no..(s + 1) * no])
    }

    pub fn reward(&self, s: usize, a: usize, next: usize) -> f64 {
        let ns = self.doc.num_states;
        self.doc.reward[(s * self.actions.len() + a) * ns + next]
    }

    /// Copy of this model with a different discount.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut doc = self.doc.clone();
        doc.gamma = gamma;
        Self::new(doc)
    }
}

fn check_rows(table: &'static str, data: &[f64], width: usize, tol: f64) -> Result<()> {
    for (row, chunk) in data.chunks(width).enumerate() {
        if chunk.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(CoreError::InvalidModel(format!(
                "{table} row {row} has a negative or non-finite probability"
            )));
        }
        let sum: f64 = chunk.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(CoreError::NonStochasticRow { table, row, sum });
        }
    }
    Ok(())
}
