//! Cooperative two-player matrix games.
//!
//! Payoffs are stored as printed in the usual tables: `payoff[row][col]`
//! with rows indexed by agent 2's action and columns by agent 1's action.

use maac_core::DecPomdpModel;

use crate::error::{EnvError, Result};
use crate::oneshot::OneShot;

/// Discount attached to one-step games. It never enters a return since
/// episodes last a single step, but the exact engine needs `gamma < 1`.
pub const MATRIX_GAMMA: f64 = 0.98;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGameSpec {
    pub name: String,
    pub payoff: Vec<Vec<f64>>,
    pub agent1_actions: Vec<String>,
    pub agent2_actions: Vec<String>,
}

impl MatrixGameSpec {
    /// Team reward when agent 1 plays `a1` and agent 2 plays `a2`.
    pub fn reward(&self, a1: usize, a2: usize) -> f64 {
        self.payoff[a2][a1]
    }

    pub fn climb() -> Self {
        Self {
            name: "climb".into(),
            payoff: vec![
                vec![11.0, -30.0, 0.0],
                vec![-30.0, 7.0, 6.0],
                vec![0.0, 0.0, 5.0],
            ],
            agent1_actions: vec!["u1".into(), "u2".into(), "u3".into()],
            agent2_actions: vec!["u1".into(), "u2".into(), "u3".into()],
        }
    }

    pub fn morning() -> Self {
        Self {
            name: "morning".into(),
            // rows: vodka, milk; cols: pickles, cereal
            payoff: vec![vec![1.0, 0.0], vec![0.0, 3.0]],
            agent1_actions: vec!["pickles".into(), "cereal".into()],
            agent2_actions: vec!["vodka".into(), "milk".into()],
        }
    }

    fn validate(&self) -> Result<()> {
        let rows = self.agent2_actions.len();
        let cols = self.agent1_actions.len();
        if self.payoff.len() != rows || self.payoff.iter().any(|r| r.len() != cols) {
            return Err(EnvError::InvalidParam {
                name: "payoff".into(),
                reason: format!("expected a {rows}x{cols} matrix"),
            });
        }
        Ok(())
    }
}

pub fn build_matrix_game(spec: &MatrixGameSpec) -> Result<DecPomdpModel> {
    spec.validate()?;
    OneShot {
        name: &spec.name,
        num_actions: vec![spec.agent1_actions.len(), spec.agent2_actions.len()],
        num_observations: vec![1, 1],
        initial: vec![1.0],
        initial_obs: None,
        reward: Box::new(|_, a: &[usize]| spec.reward(a[0], a[1])),
        gamma: MATRIX_GAMMA,
    }
    .build()
}

pub fn build_climb_game() -> DecPomdpModel {
    build_matrix_game(&MatrixGameSpec::climb()).expect("climb game is well formed")
}

pub fn build_morning_game() -> DecPomdpModel {
    build_matrix_game(&MatrixGameSpec::morning()).expect("morning game is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payoff(m: &DecPomdpModel, a1: usize, a2: usize) -> f64 {
        let a = m.joint_actions().encode(&[a1, a2]);
        m.reward(0, a, 1)
    }

    #[test]
    fn climb_table_cell_for_cell() {
        let m = build_climb_game();
        let table = [[11.0, -30.0, 0.0], [-30.0, 7.0, 6.0], [0.0, 0.0, 5.0]];
        for (a2, row) in table.iter().enumerate() {
            for (a1, v) in row.iter().enumerate() {
                assert_eq!(payoff(&m, a1, a2), *v);
            }
        }
        assert_eq!(payoff(&m, 0, 0), 11.0);
        // agent 1 takes u3, agent 2 takes u2
        assert_eq!(payoff(&m, 2, 1), 6.0);
        assert_eq!(payoff(&m, 2, 2), 5.0);
        assert!(m.is_terminal(1));
        assert_eq!(m.horizon(), Some(1));
    }

    #[test]
    fn morning_table_cell_for_cell() {
        let m = build_morning_game();
        let (pickles, cereal, vodka, milk) = (0, 1, 0, 1);
        assert_eq!(payoff(&m, cereal, milk), 3.0);
        assert_eq!(payoff(&m, pickles, vodka), 1.0);
        assert_eq!(payoff(&m, cereal, vodka), 0.0);
        assert_eq!(payoff(&m, pickles, milk), 0.0);
    }

    #[test]
    fn rejects_mismatched_payoff() {
        let mut spec = MatrixGameSpec::morning();
        spec.payoff.pop();
        assert!(build_matrix_game(&spec).is_err());
    }
}
