//! Exact analysis of tabular Dec-POMDPs under fixed policies.
//!
//! [`ChainStructure`] enumerates the reachable `(history, state)` chain for a
//! memory length `k`. Given a [`PolicyTable`], [`steady_state`] solves for the
//! stationary history distribution, [`BellmanOperator`] builds the
//! centralized and decentralized critic operators and [`fixed_point`] solves
//! them. [`gradient_moments`], [`mav`] and [`mov`] compare the policy
//! gradients the two critic types induce. [`Analysis`] bundles the whole
//! pipeline and renders an [`ExactReport`].

pub mod analysis;
pub mod bellman;
pub mod chain;
pub mod error;
pub mod gradient;
pub mod policy_table;
pub mod random;
pub mod steady;

pub use analysis::{AgentCheck, Analysis, ExactReport};
pub use bellman::{
    contraction_check, default_max_iter, fixed_point, marginalize_central, solve,
    BellmanOperator, ContractionReport, CriticMode, ExactCriticTable, DEFAULT_TOLERANCE,
};
pub use chain::{ChainStructure, Node, Outcome};
pub use error::{ExactError, Result};
pub use gradient::{exact_policy_gradient, gradient_moments, mav, mov, GradientMoments};
pub use policy_table::{random_softmax_policies, PolicyTable};
pub use random::{random_model, RandomModelConfig};
pub use steady::{steady_state, SolveMethod, SteadyState};
