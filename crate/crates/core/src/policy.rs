//! Policies over fixed-memory histories.

use std::hash::Hash;

use indexmap::IndexMap;
use rand::{Rng, RngCore};

use crate::history::History;

/// Logits are clamped to this magnitude after every update.
pub const LOGIT_CLIP: f64 = 50.0;

pub trait Policy {
    fn num_actions(&self) -> usize;

    fn action_probs(&self, history: &History) -> Vec<f64>;

    fn sample(&self, history: &History, rng: &mut dyn RngCore) -> usize {
        sample_categorical(&self.action_probs(history), rng)
    }
}

/// Draw an index from a probability vector. Falls back to the last index
/// when rounding leaves the cumulative sum just below the draw.
pub fn sample_categorical(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= z);
    out
}

/// Tabular softmax actor with temperature 1. Rows are created lazily with
/// zero logits; row order is insertion order, which fixes parameter indices.
#[derive(Clone, Debug)]
pub struct SoftmaxPolicy<K: Hash + Eq = History> {
    num_actions: usize,
    rows: IndexMap<K, Vec<f64>>,
}

impl<K: Hash + Eq + Clone> SoftmaxPolicy<K> {
    pub fn new(num_actions: usize) -> Self {
        Self {
            num_actions,
            rows: IndexMap::new(),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn probs(&self, key: &K) -> Vec<f64> {
        match self.rows.get(key) {
            Some(l) => softmax(l),
            None => vec![1.0 / self.num_actions as f64; self.num_actions],
        }
    }

    pub fn logits(&self, key: &K) -> Option<&[f64]> {
        self.rows.get(key).map(Vec::as_slice)
    }

    pub fn row(&self, key: &K) -> Option<usize> {
        self.rows.get_index_of(key)
    }

    /// Row index of `key`, inserting a zero-logit row if needed.
    pub fn row_or_insert(&mut self, key: &K) -> usize {
        if let Some(i) = self.rows.get_index_of(key) {
            return i;
        }
        self.rows.insert(key.clone(), vec![0.0; self.num_actions]);
        self.rows.len() - 1
    }

    pub fn key_of_row(&self, row: usize) -> Option<&K> {
        self.rows.get_index(row).map(|(k, _)| k)
    }

    pub fn param_index(&self, row: usize, action: usize) -> usize {
        row * self.num_actions + action
    }

    pub fn set_logits(&mut self, key: &K, logits: Vec<f64>) {
        assert_eq!(logits.len(), self.num_actions);
        let row = self.row_or_insert(key);
        self.rows[row] = logits.into_iter().map(clip).collect();
    }

    /// Gradient of `log pi(action | key)` with respect to the logits of that
    /// row: `1[a' = action] - pi(a' | key)`.
    pub fn grad_log_prob(&self, key: &K, action: usize) -> Vec<f64> {
        let mut g = self.probs(key);
        g.iter_mut().for_each(|p| *p = -*p);
        g[action] += 1.0;
        g
    }

    /// `theta[row] += step * delta`, then clip.
    pub fn add_to_row(&mut self, row: usize, delta: &[f64], step: f64) {
        let logits = &mut self.rows[row];
        for (l, d) in logits.iter_mut().zip(delta) {
            *l = clip(*l + step * d);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.rows.values().flatten().all(|l| l.is_finite())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &[f64])> {
        self.rows.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn sample_key(&self, key: &K, rng: &mut dyn RngCore) -> usize {
        sample_categorical(&self.probs(key), rng)
    }
}

fn clip(l: f64) -> f64 {
    if l.is_nan() {
        l
    } else {
        l.clamp(-LOGIT_CLIP, LOGIT_CLIP)
    }
}

impl Policy for SoftmaxPolicy<History> {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn action_probs(&self, history: &History) -> Vec<f64> {
        self.probs(history)
    }
}

/// Policy defined by a closure; handy for fixed or deterministic policies.
pub struct FnPolicy<F> {
    num_actions: usize,
    f: F,
}

impl<F: Fn(&History) -> Vec<f64>> FnPolicy<F> {
    pub fn new(num_actions: usize, f: F) -> Self {
        Self { num_actions, f }
    }
}

impl<F: Fn(&History) -> Vec<f64>> Policy for FnPolicy<F> {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn action_probs(&self, history: &History) -> Vec<f64> {
        (self.f)(history)
    }
}

/// Deterministic policy that always plays `action`.
pub fn constant_policy(num_actions: usize, action: usize) -> impl Policy {
    FnPolicy::new(num_actions, move |_: &History| {
        let mut p = vec![0.0; num_actions];
        p[action] = 1.0;
        p
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn unseen_rows_are_uniform() {
        let p: SoftmaxPolicy = SoftmaxPolicy::new(4);
        assert_eq!(p.probs(&History::empty()), vec![0.25; 4]);
    }

    #[test]
    fn grad_log_prob_is_indicator_minus_probs() {
        let mut p: SoftmaxPolicy = SoftmaxPolicy::new(2);
        p.set_logits(&History::empty(), vec![0.0, 0.0]);
        assert_eq!(p.grad_log_prob(&History::empty(), 1), vec![-0.5, 0.5]);
    }

    #[test]
    fn logits_are_clipped() {
        let mut p: SoftmaxPolicy = SoftmaxPolicy::new(2);
        let row = p.row_or_insert(&History::empty());
        p.add_to_row(row, &[1e6, -1e6], 1.0);
        assert_eq!(p.logits(&History::empty()).unwrap(), &[LOGIT_CLIP, -LOGIT_CLIP]);
        let probs = p.probs(&History::empty());
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_follows_probs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let probs = [0.2, 0.0, 0.8];
        let mut counts = [0usize; 3];
        for _ in 0..20_000 {
            counts[sample_categorical(&probs, &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 20_000.0 - 0.2).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn softmax_normalizes(logits in proptest::collection::vec(-50.0f64..50.0, 1..8)) {
            let p = softmax(&logits);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
        }
    }
}
