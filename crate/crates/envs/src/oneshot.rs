//! Builder for one-step games: a set of play states followed by a single
//! absorbing terminal state.

use maac_core::{DecPomdpModel, JointSpace, ModelDocument};

use crate::error::Result;

pub(crate) struct OneShot<'a> {
    pub name: &'a str,
    pub num_actions: Vec<usize>,
    pub num_observations: Vec<usize>,
    /// Distribution over play states.
    pub initial: Vec<f64>,
    /// Joint observation received at episode start in each play state.
    pub initial_obs: Option<Box<dyn Fn(usize) -> Vec<usize> + 'a>>,
    pub reward: Box<dyn Fn(usize, &[usize]) -> f64 + 'a>,
    pub gamma: f64,
}

impl OneShot<'_> {
    pub fn build(self) -> Result<DecPomdpModel> {
        let plays = self.initial.len();
        let ns = plays + 1;
        let terminal = plays;
        let actions = JointSpace::new(&self.num_actions);
        let obs = JointSpace::new(&self.num_observations);
        let (na, no) = (actions.len(), obs.len());

        let mut transition = vec![0.0; ns * na * ns];
        let mut observation = vec![0.0; ns * na * no];
        let mut reward = vec![0.0; ns * na * ns];
        for s in 0..ns {
            for a in 0..na {
                let row = s * na + a;
                transition[row * ns + terminal] = 1.0;
                // post-play observation carries no information
                observation[row * no] = 1.0;
                if s < plays {
                    reward[row * ns + terminal] = (self.reward)(s, &actions.decode(a));
                }
            }
        }
        let mut initial = self.initial.clone();
        initial.push(0.0);
        let initial_observation = self.initial_obs.as_ref().map(|f| {
            let mut t = vec![0.0; ns * no];
            for s in 0..ns {
                let o = if s < plays { obs.encode(&f(s)) } else { 0 };
                t[s * no + o] = 1.0;
            }
            t
        });
        let mut is_terminal = vec![false; ns];
        is_terminal[terminal] = true;

        Ok(DecPomdpModel::new(ModelDocument {
            name: self.name.to_string(),
            num_states: ns,
            num_actions: self.num_actions,
            num_observations: self.num_observations,
            initial,
            transition,
            observation,
            initial_observation,
            reward,
            terminal: is_terminal,
            gamma: self.gamma,
            horizon: Some(1),
        })?)
    }
}
