//! Fixed-memory action-observation histories.
//!
//! A history keeps at most `k` `(action, observation)` entries. The entry
//! created by the observation received at episode start has no action.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entry {
    pub action: Option<u32>,
    pub obs: u32,
}

impl Entry {
    pub fn new(action: Option<usize>, obs: usize) -> Self {
        Self {
            action: action.map(|a| a as u32),
            obs: obs as u32,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct History {
    entries: SmallVec<[Entry; 4]>,
}

/// One history per agent.
pub type JointHistory = Vec<History>;

impl History {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = Entry>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append `(action, obs)`, keeping only the newest `k` entries.
    pub fn push(&mut self, action: Option<usize>, obs: usize, k: usize) {
        if k == 0 {
            self.entries.clear();
            return;
        }
        self.entries.push(Entry::new(action, obs));
        if self.entries.len() > k {
            let excess = self.entries.len() - k;
            self.entries.drain(..excess);
        }
    }

    pub fn append_step(&self, action: usize, obs: usize, k: usize) -> Self {
        let mut next = self.clone();
        next.push(Some(action), obs, k);
        next
    }

    /// History at episode start: empty, or holding the initial observation.
    pub fn start(initial_obs: Option<usize>, k: usize) -> Self {
        let mut h = Self::empty();
        if let Some(o) = initial_obs {
            h.push(None, o, k);
        }
        h
    }
}

impl std::fmt::Display for History {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match e.action {
                Some(a) => write!(f, "a{}o{}", a, e.obs)?,
                None => write!(f, "o{}", e.obs)?,
            }
        }
        write!(f, ">")
    }
}

pub fn initial_histories(num_agents: usize) -> JointHistory {
    vec![History::empty(); num_agents]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(pairs: &[(usize, usize)]) -> History {
        History::from_entries(pairs.iter().map(|&(a, o)| Entry::new(Some(a), o)))
    }

    #[test]
    fn append_to_empty() {
        assert_eq!(History::empty().append_step(1, 2, 2), h(&[(1, 2)]));
    }

    #[test]
    fn memory_one_keeps_latest() {
        assert_eq!(h(&[(1, 2)]).append_step(0, 1, 1), h(&[(0, 1)]));
    }

    #[test]
    fn full_history_evicts_oldest() {
        assert_eq!(
            h(&[(1, 2), (0, 1)]).append_step(2, 0, 2),
            h(&[(0, 1), (2, 0)])
        );
    }

    #[test]
    fn zero_memory_stays_empty() {
        let mut x = History::start(Some(1), 0);
        assert!(x.is_empty());
        for t in 0..5 {
            x = x.append_step(t % 3, t % 2, 0);
            assert!(x.is_empty());
        }
    }

    #[test]
    fn two_steps_fill_memory_two() {
        let hs = initial_histories(2);
        assert!(hs.iter().all(History::is_empty));
        let after: Vec<History> = hs
            .iter()
            .map(|x| x.append_step(2, 0, 2).append_step(2, 1, 2))
            .collect();
        for x in &after {
            assert_eq!(x, &h(&[(2, 0), (2, 1)]));
        }
    }

    proptest! {
        #[test]
        fn history_is_suffix_of_stream(
            k in 0usize..5,
            stream in proptest::collection::vec((0usize..4, 0usize..3), 0..20),
        ) {
            let mut x = History::empty();
            for &(a, o) in &stream {
                x = x.append_step(a, o, k);
            }
            let keep = k.min(stream.len());
            let expected = h(&stream[stream.len() - keep..]);
            prop_assert_eq!(x, expected);
        }
    }
}
