//! Guess Game: each agent observes its own bit of a uniformly drawn state
//! and tries to name its teammate's bit. Actions `a1`, `a2` guess bit 0 or 1;
//! `a3` opts out. Each right guess adds `r/2` and each wrong guess
//! subtracts `r/2`, so two right gives `+r`, one of each gives 0 and two
//! wrong gives `-r`. An opt-out is neither right nor wrong; both opting out
//! gives the safe reward.

use maac_core::DecPomdpModel;

use crate::error::Result;
use crate::matrix::MATRIX_GAMMA;
use crate::oneshot::OneShot;

pub const OPT_OUT: usize = 2;

/// Play states are `(s1, s2)` encoded as `2 * s1 + s2`.
pub fn guess_reward(state: usize, actions: &[usize], r_match: f64, safe_reward: f64) -> f64 {
    if actions[0] == OPT_OUT && actions[1] == OPT_OUT {
        return safe_reward;
    }
    let bits = [state / 2, state % 2];
    (0..2)
        .filter(|&i| actions[i] != OPT_OUT)
        .map(|i| if actions[i] == bits[1 - i] { 0.5 * r_match } else { -0.5 * r_match })
        .sum()
}

pub fn build_guess_game(r_match: f64, safe_reward: f64) -> Result<DecPomdpModel> {
    OneShot {
        name: "guess",
        num_actions: vec![3, 3],
        num_observations: vec![2, 2],
        initial: vec![0.25; 4],
        initial_obs: Some(Box::new(|s| vec![s / 2, s % 2])),
        reward: Box::new(move |s, a: &[usize]| guess_reward(s, a, r_match, safe_reward)),
        gamma: MATRIX_GAMMA,
    }
    .build()
}
