//! Tabular actor-critic learners.
//!
//! [`Trainer`] runs batched rollouts through any
//! [`maac_core::GenerativeEnv`], updates TD(0) [`CriticTable`]s on every
//! transition and steps softmax actors along the per-rollout policy
//! gradient. The critic/actor pairing is chosen by [`Algorithm`]:
//! decentralized critics (IAC), one centralized critic for independent
//! actors (IACC), or a joint actor with a centralized critic (JAC).

pub mod config;
pub mod critic;
pub mod error;
pub mod output;
pub mod rollout;
pub mod train;
pub mod variance;

pub use config::{Algorithm, StepSize, TrainConfig};
pub use critic::{critic_update, CriticTable, Transition};
pub use error::{Result, TrainError};
pub use output::{write_curve_csv, write_gradient_csv};
pub use rollout::{evaluate, run_episode, Actors, EnvStep, Episode};
pub use train::{
    train, train_run, Critics, CurvePoint, GradientRecord, TrainResult, Trainer,
    UpdateOutcome,
};
pub use variance::{per_action_gradient_variance, per_rollout_gradient_variance};
