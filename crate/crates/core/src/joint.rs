//! Mixed-radix encoding of joint actions and joint observations.
//!
//! Agent 0 is the most significant digit, so iterating joint indices in
//! order visits tuples in lexicographic order.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointSpace {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl JointSpace {
    pub fn new(sizes: &[usize]) -> Self {
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let total = sizes.iter().product();
        Self {
            sizes: sizes.to_vec(),
            strides,
            total,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn encode(&self, parts: &[usize]) -> usize {
        debug_assert_eq!(parts.len(), self.sizes.len());
        parts
            .iter()
            .zip(&self.strides)
            .map(|(p, s)| p * s)
            .sum()
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.sizes.len());
        self.decode_into(index, &mut out);
        out
    }

    pub fn decode_into(&self, index: usize, out: &mut Vec<usize>) {
        out.clear();
        for (s, n) in self.strides.iter().zip(&self.sizes) {
            out.push((index / s) % n);
        }
    }

    /// Component `agent` of joint index `index`.
    pub fn component(&self, index: usize, agent: usize) -> usize {
        (index / self.strides[agent]) % self.sizes[agent]
    }

    /// Replace one component of a joint index.
    pub fn with_component(&self, index: usize, agent: usize, value: usize) -> usize {
        let old = self.component(index, agent);
        index - old * self.strides[agent] + value * self.strides[agent]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_lexicographic() {
        let js = JointSpace::new(&[2, 3]);
        assert_eq!(js.len(), 6);
        assert_eq!(js.encode(&[0, 0]), 0);
        assert_eq!(js.encode(&[0, 2]), 2);
        assert_eq!(js.encode(&[1, 0]), 3);
        for i in 0..6 {
            assert_eq!(js.encode(&js.decode(i)), i);
        }
        assert_eq!(js.component(5, 0), 1);
        assert_eq!(js.component(5, 1), 2);
        assert_eq!(js.with_component(5, 1, 0), 3);
    }
}
