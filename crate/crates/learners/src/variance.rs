//! Windowed per-rollout gradient variance.

use crate::train::GradientRecord;

/// Unbiased sample variance of each parameter over the trailing `window`
/// records ending at every position. Entries are `None` while the window
/// holds fewer than two records.
pub fn per_rollout_gradient_variance(
    records: &[GradientRecord],
    dim: usize,
    window: usize,
) -> Vec<Vec<Option<f64>>> {
    let dense: Vec<Vec<f64>> = records
        .iter()
        .map(|r| {
            let mut v = vec![0.0; dim];
            for &(p, g) in &r.entries {
                if p < dim {
                    v[p] = g;
                }
            }
            v
        })
        .collect();
    (0..dense.len())
        .map(|end| {
            let start = (end + 1).saturating_sub(window.max(1));
            let win = &dense[start..=end];
            let n = win.len();
            (0..dim)
                .map(|d| {
                    if n < 2 {
                        return None;
                    }
                    let mean = win.iter().map(|v| v[d]).sum::<f64>() / n as f64;
                    let ss: f64 = win.iter().map(|v| (v[d] - mean) * (v[d] - mean)).sum();
                    Some(ss / (n - 1) as f64)
                })
                .collect()
        })
        .collect()
}

/// As [`per_rollout_gradient_variance`], restricted to records whose
/// rollout took the parameter `taken` (a `(history, action)` index).
pub fn per_action_gradient_variance(
    records: &[GradientRecord],
    dim: usize,
    window: usize,
    taken: usize,
) -> Vec<Vec<Option<f64>>> {
    let filtered: Vec<GradientRecord> = records
        .iter()
        .filter(|r| r.taken.contains(&taken))
        .cloned()
        .collect();
    per_rollout_gradient_variance(&filtered, dim, window)
}
