//! Environments: explicit tabular models that the exact engine can analyse,
//! and generative grid worlds that only expose a step function.

pub mod binary_match;
pub mod box_pushing;
pub mod capture_target;
pub mod dectiger;
pub mod error;
pub mod grid;
pub mod guess;
pub mod matrix;
mod oneshot;
pub mod registry;
pub mod tilemap;

pub use binary_match::build_binary_match_game;
pub use box_pushing::{build_small_box_pushing, SmallBoxPushing};
pub use capture_target::{build_capture_target, CaptureTarget};
pub use dectiger::{build_dectiger, build_dectiger_with, DecTigerParams};
pub use error::{EnvError, Result};
pub use grid::{build_gridworld, GridWorld, GridWorldKind};
pub use guess::build_guess_game;
pub use matrix::{build_climb_game, build_matrix_game, build_morning_game, MatrixGameSpec};
pub use registry::{build_env, build_model, is_explicit, EnvParams, ENV_NAMES};
pub use tilemap::{Tile, TileMap};
