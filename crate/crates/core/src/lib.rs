//! Core data model for tabular multi-agent actor-critic experiments.
//!
//! A [`DecPomdpModel`] stores an explicit Dec-POMDP as flat row-major tables.
//! Agents act on [`History`] keys (the last `k` action/observation pairs),
//! through anything implementing [`Policy`]. [`sim`] generates transitions and
//! trajectories; [`env`] exposes the step-function interface shared with the
//! generative grid worlds.

pub mod env;
pub mod error;
pub mod history;
pub mod joint;
pub mod model;
pub mod policy;
pub mod sim;

pub use env::{EnvInfo, GenerativeEnv, ModelEnv, StepOutcome};
pub use error::{CoreError, Result};
pub use history::{initial_histories, Entry, History, JointHistory};
pub use joint::JointSpace;
pub use model::{DecPomdpModel, ModelDocument};
pub use policy::{FnPolicy, Policy, SoftmaxPolicy, LOGIT_CLIP};
pub use sim::{discounted_return, rollout, step, Step, Trajectory};
