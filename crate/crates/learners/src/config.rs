//! Training configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrainError};

/// Critic/actor pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Independent actors, each with a decentralized critic `Q_i(h_i, a_i)`.
    Iac,
    /// Independent actors sharing a centralized critic `Q(h, a)`.
    Iacc,
    /// One joint actor over joint actions with a centralized critic.
    Jac,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Iac, Algorithm::Iacc, Algorithm::Jac];

    pub fn name(self) -> &'static str {
        match self {
            Self::Iac => "IAC",
            Self::Iacc => "IACC",
            Self::Jac => "JAC",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iac" => Ok(Self::Iac),
            "iacc" => Ok(Self::Iacc),
            "jac" => Ok(Self::Jac),
            _ => Err(TrainError::UnknownAlgorithm(s.to_string())),
        }
    }
}

/// Critic step-size schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    Constant(f64),
    /// `1 / n` where `n` counts updates of the entry, including this one.
    InverseVisits,
}

impl StepSize {
    pub fn alpha(self, visits: u64) -> f64 {
        match self {
            Self::Constant(a) => a,
            Self::InverseVisits => 1.0 / visits.max(1) as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub actor_step: f64,
    pub critic_step: StepSize,
    /// Value of critic entries before their first update.
    pub critic_init: f64,
    /// Rollouts per actor update.
    pub batch_size: usize,
    /// History memory length.
    pub k: usize,
    /// Training budget in environment steps.
    pub total_steps: u64,
    /// Actor updates between evaluations.
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Weight the step-`t` gradient term by `gamma^t`.
    pub discounted_gradient: bool,
    /// Keep actors fixed; only critics learn.
    pub freeze_actors: bool,
    pub log_gradients: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Iac,
            actor_step: 0.01,
            critic_step: StepSize::InverseVisits,
            critic_init: 0.0,
            batch_size: 64,
            k: 1,
            total_steps: 100_000,
            eval_interval: 10,
            eval_episodes: 32,
            discounted_gradient: true,
            freeze_actors: false,
            log_gradients: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if !(self.actor_step.is_finite() && self.actor_step > 0.0) {
            return bad("actor_step must be positive");
        }
        if let StepSize::Constant(a) = self.critic_step {
            if !(a.is_finite() && a > 0.0 && a <= 1.0) {
                return bad("constant critic step must lie in (0, 1]");
            }
        }
        if !self.critic_init.is_finite() {
            return bad("critic_init must be finite");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.eval_interval == 0 {
            return bad("eval_interval must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_algorithms() {
        assert_eq!("IACC".parse::<Algorithm>().unwrap(), Algorithm::Iacc);
        assert!("coma".parse::<Algorithm>().is_err());
    }

    #[test]
    fn json_overrides_defaults() {
        let cfg: TrainConfig =
            serde_json::from_str(r#"{"algorithm":"jac","critic_step":{"constant":0.5}}"#).unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Jac);
        assert_eq!(cfg.critic_step, StepSize::Constant(0.5));
        assert_eq!(cfg.batch_size, 64);
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = TrainConfig::default();
        cfg.batch_size = 0;
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            actor_step: -1.0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn inverse_visit_schedule() {
        assert_eq!(StepSize::InverseVisits.alpha(4), 0.25);
        assert_eq!(StepSize::Constant(0.3).alpha(9), 0.3);
    }
}
