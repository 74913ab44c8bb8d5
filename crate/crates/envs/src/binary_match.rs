//! One-step binary matching game: each agent observes a private random bit
//! and earns `+r` when its action equals the teammate's bit, `-r` otherwise.
//! The team reward is the sum of both agents' terms.

use maac_core::DecPomdpModel;

use crate::error::{EnvError, Result};
use crate::matrix::MATRIX_GAMMA;
use crate::oneshot::OneShot;

/// Agent `i`'s term given the teammate's bit.
pub fn match_term(teammate_bit: usize, action: usize, r: f64) -> f64 {
    if teammate_bit == action {
        r
    } else {
        -r
    }
}

pub fn build_binary_match_game(r: f64) -> Result<DecPomdpModel> {
    if !(r > 0.0) {
        return Err(EnvError::InvalidParam {
            name: "r".into(),
            reason: format!("must be positive, got {r}"),
        });
    }
    OneShot {
        name: "binary_match",
        num_actions: vec![2, 2],
        num_observations: vec![2, 2],
        initial: vec![0.25; 4],
        initial_obs: Some(Box::new(|s| vec![s / 2, s % 2])),
        reward: Box::new(move |s, a: &[usize]| {
            let bits = [s / 2, s % 2];
            match_term(bits[1], a[0], r) + match_term(bits[0], a[1], r)
        }),
        gamma: MATRIX_GAMMA,
    }
    .build()
}
