//! Tabular TD(0) critics.

use std::hash::Hash;

use indexmap::IndexMap;

use crate::config::StepSize;

#[derive(Clone, Debug)]
struct Entry {
    values: Vec<f64>,
    visits: Vec<u64>,
}

/// `Q(key, action)` table with per-entry visit counts. Unvisited entries read
/// as the configured initial value.
#[derive(Clone, Debug)]
pub struct CriticTable<K: Hash + Eq> {
    num_actions: usize,
    init: f64,
    step: StepSize,
    rows: IndexMap<K, Entry>,
}

/// One observed transition in the critic's key space. `next` is the key and
/// action actually taken at the following step, or `None` at episode end.
#[derive(Clone, Copy, Debug)]
pub struct Transition<'a, K> {
    pub key: &'a K,
    pub action: usize,
    pub reward: f64,
    pub next: Option<(&'a K, usize)>,
}

impl<K: Hash + Eq + Clone> CriticTable<K> {
    pub fn new(num_actions: usize, init: f64, step: StepSize) -> Self {
        Self {
            num_actions,
            init,
            step,
            rows: IndexMap::new(),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, key: &K, action: usize) -> f64 {
        self.rows.get(key).map_or(self.init, |e| e.values[action])
    }

    pub fn visits(&self, key: &K, action: usize) -> u64 {
        self.rows.get(key).map_or(0, |e| e.visits[action])
    }

    fn entry(&mut self, key: &K) -> &mut Entry {
        let (na, init) = (self.num_actions, self.init);
        self.rows.entry(key.clone()).or_insert_with(|| Entry {
            values: vec![init; na],
            visits: vec![0; na],
        })
    }

    pub fn set(&mut self, key: &K, action: usize, value: f64) {
        self.entry(key).values[action] = value;
    }

    /// Move `Q(key, action)` toward `target` by `alpha`, or by the schedule's
    /// step when `alpha` is `None`. Returns the new value.
    pub fn update(&mut self, key: &K, action: usize, target: f64, alpha: Option<f64>) -> f64 {
        let step = self.step;
        let e = self.entry(key);
        e.visits[action] += 1;
        let a = alpha.unwrap_or_else(|| step.alpha(e.visits[action]));
        let v = &mut e.values[action];
        *v += a * (target - *v);
        *v
    }

    pub fn all_finite(&self) -> bool {
        self.rows.values().all(|e| e.values.iter().all(|v| v.is_finite()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &[f64])> {
        self.rows.iter().map(|(k, e)| (k, e.values.as_slice()))
    }
}

/// TD(0) update on one transition: target `r + gamma Q(next)`, or `r` at
/// episode end.
pub fn critic_update<K: Hash + Eq + Clone>(
    critic: &mut CriticTable<K>,
    tr: Transition<'_, K>,
    alpha: Option<f64>,
    gamma: f64,
) -> f64 {
    let boot = tr.next.map_or(0.0, |(k, a)| critic.get(k, a));
    critic.update(tr.key, tr.action, tr.reward + gamma * boot, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_update_moves_halfway() {
        let mut c: CriticTable<u8> = CriticTable::new(4, 0.0, StepSize::InverseVisits);
        let tr = Transition {
            key: &0,
            action: 3,
            reward: 3.0,
            next: None,
        };
        assert_eq!(critic_update(&mut c, tr, Some(0.5), 0.98), 1.5);
        for _ in 0..60 {
            critic_update(&mut c, tr, Some(0.5), 0.98);
        }
        assert!((c.get(&0, 3) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_step_leaves_value() {
        let mut c: CriticTable<u8> = CriticTable::new(2, 7.0, StepSize::InverseVisits);
        let tr = Transition {
            key: &1,
            action: 0,
            reward: -4.0,
            next: None,
        };
        assert_eq!(critic_update(&mut c, tr, Some(0.0), 0.9), 7.0);
        assert_eq!(c.get(&2, 1), 7.0);
    }

    #[test]
    fn inverse_visits_average_targets() {
        let mut c: CriticTable<u8> = CriticTable::new(1, 0.0, StepSize::InverseVisits);
        for r in [1.0, 2.0, 6.0] {
            c.update(&0, 0, r, None);
        }
        assert!((c.get(&0, 0) - 3.0).abs() < 1e-12);
        assert_eq!(c.visits(&0, 0), 3);
    }

    #[test]
    fn bootstraps_on_next_entry() {
        let mut c: CriticTable<u8> = CriticTable::new(1, 0.0, StepSize::Constant(1.0));
        c.set(&1, 0, 10.0);
        let tr = Transition {
            key: &0,
            action: 0,
            reward: 1.0,
            next: Some((&1, 0)),
        };
        assert_eq!(critic_update(&mut c, tr, None, 0.5), 6.0);
    }
}
