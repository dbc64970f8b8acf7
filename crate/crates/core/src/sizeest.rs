//! Distributed network-size estimation.
//!
//! With `C = (I - A)^T`, the constant vector is the nullspace of `C` on a
//! strongly connected graph, so the vector `s = (1/n) 1` is the unique
//! nullspace element whose entries sum to 1. Starting from `s_0 = e_0`,
//! each iteration projects the iterate off a uniformly random row of `C`:
//!
//! ```text
//! s <- s - (<c_k, s> / ||c_k||^2) c_k
//! ```
//!
//! Row `k` is supported on `{k} ∪ out(k)`, so like the PageRank solver the
//! update only needs page `k` and its out-neighbors. The rows annihilate
//! the all-ones vector, which keeps the entry sum of `s` pinned at 1; once
//! `s` has converged, every page reads the network size as `1 / s[i]`.

use crate::graph::HyperlinkGraph;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SizeError {
    /// The nullspace of `C` is one-dimensional only on strongly connected
    /// graphs; size estimation is undefined otherwise.
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("entry {index} is {value}, not positive; the iterate has not converged")]
    NonPositiveEntry { index: usize, value: f64 },
}

/// Nullspace iterate with unit entry sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeState {
    s: Vec<f64>,
    t: u64,
}

impl SizeState {
    /// Initial iterate `s_0 = e_0 = [1, 0, ..., 0]`.
    pub fn init(n: usize) -> Self {
        assert!(n >= 1, "need at least one page");
        let mut s = vec![0.0; n];
        s[0] = 1.0;
        Self { s, t: 0 }
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// `||s - (1/n) 1||^2`, the distance to the fixed point.
    pub fn distance_sq(&self) -> f64 {
        let target = 1.0 / self.s.len() as f64;
        self.s.iter().map(|&v| (v - target) * (v - target)).sum()
    }
}

/// Row `k` of `C = (I - A)^T` as sorted `(index, value)` pairs with zero
/// entries omitted: `1 - A[k][k]` at `k` and `-1/N_k` at each out-neighbor
/// other than `k`. The support never leaves `{k} ∪ out(k)`.
pub fn size_row(g: &HyperlinkGraph, k: usize) -> Vec<(usize, f64)> {
    let off = -1.0 / g.out_degree(k) as f64;
    let diag = 1.0 - g.self_loop_weight(k);
    let mut row = Vec::with_capacity(g.out_degree(k) + 1);
    for &j in g.out_links(k) {
        if j < k {
            row.push((j, off));
        }
    }
    if diag != 0.0 {
        row.push((k, diag));
    }
    for &j in g.out_links(k) {
        if j > k {
            row.push((j, off));
        }
    }
    row
}

/// One projection step against row `k`. A zero row (a page whose only
/// out-link is itself) leaves the iterate unchanged. Touches only entries
/// in `{k} ∪ out(k)` and preserves the entry sum.
pub fn size_step(state: &mut SizeState, g: &HyperlinkGraph, k: usize) {
    state.t += 1;
    let neighbors = g.out_links(k);
    let off = -1.0 / neighbors.len() as f64;
    let diag = 1.0 - g.self_loop_weight(k);
    let off_count = neighbors.len() - usize::from(g.has_self_loop(k));
    let norm_sq = diag * diag + off_count as f64 * off * off;
    if norm_sq == 0.0 {
        return;
    }
    let mut dot = diag * state.s[k];
    for &j in neighbors {
        if j != k {
            dot += off * state.s[j];
        }
    }
    let coef = dot / norm_sq;
    state.s[k] -= coef * diag;
    for &j in neighbors {
        if j != k {
            state.s[j] -= coef * off;
        }
    }
}

/// Runs `t_max` uniform-random projection steps from `s_0 = e_0`.
/// Fails on graphs that are not strongly connected.
pub fn run_size(g: &HyperlinkGraph, t_max: u64, seed: u64) -> Result<SizeState, SizeError> {
    run_size_with_observer(g, t_max, seed, |_, _| {})
}

/// [`run_size`] with a sink receiving `(t, ||s_t - (1/n) 1||^2)` after
/// each step.
pub fn run_size_with_observer<F: FnMut(u64, f64)>(
    g: &HyperlinkGraph,
    t_max: u64,
    seed: u64,
    mut observer: F,
) -> Result<SizeState, SizeError> {
    if !g.is_strongly_connected() {
        return Err(SizeError::NotStronglyConnected);
    }
    let n = g.page_count();
    let mut state = SizeState::init(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..t_max {
        let k = rng.random_range(0..n);
        size_step(&mut state, g, k);
        observer(state.t, state.distance_sq());
    }
    Ok(state)
}

/// Page `i`'s network-size estimate `1 / s[i]`.
pub fn estimate_size(state: &SizeState, i: usize) -> Result<f64, SizeError> {
    let value = state.s()[i];
    if value <= 0.0 {
        return Err(SizeError::NonPositiveEntry { index: i, value });
    }
    Ok(1.0 / value)
}

/// Second-smallest eigenvalue of `C_hat = sum_k c_k c_k' / ||c_k||^2`,
/// which governs the expected decay of `||s_t - (1/n) 1||^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeSpectral {
    pub sigma2: f64,
    /// Set when the matrix has no second eigenvalue (`n = 1`); `sigma2`
    /// is reported as 0.
    pub degenerate: bool,
}

/// Materializes `C_hat` densely (skipping zero rows) and returns its
/// second-smallest eigenvalue. `C_hat` is symmetric positive semidefinite,
/// so eigenvalues and singular values coincide. Contracted to `n <= 2000`
/// and strongly connected inputs.
pub fn size_spectral(g: &HyperlinkGraph) -> SizeSpectral {
    let n = g.page_count();
    if n < 2 {
        return SizeSpectral {
            sigma2: 0.0,
            degenerate: true,
        };
    }
    let mut c_hat = nalgebra::DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let row = size_row(g, k);
        let norm_sq: f64 = row.iter().map(|&(_, v)| v * v).sum();
        if norm_sq == 0.0 {
            continue;
        }
        for &(i, vi) in &row {
            for &(j, vj) in &row {
                c_hat[(i, j)] += vi * vj / norm_sq;
            }
        }
    }
    let mut eigenvalues: Vec<f64> = c_hat.symmetric_eigenvalues().iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SizeSpectral {
        sigma2: eigenvalues[1],
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::HyperlinkGraph;
    use proptest::prelude::*;

    fn g1() -> HyperlinkGraph {
        HyperlinkGraph::parse("1\n0 0\n").unwrap()
    }

    fn g2() -> HyperlinkGraph {
        HyperlinkGraph::parse("2\n0 1\n1 0\n").unwrap()
    }

    fn g3() -> HyperlinkGraph {
        HyperlinkGraph::parse("3\n0 1\n1 0\n1 2\n2 0\n").unwrap()
    }

    fn row_norm_sq(row: &[(usize, f64)]) -> f64 {
        row.iter().map(|&(_, v)| v * v).sum()
    }

    #[test]
    fn rows_match_transpose_by_hand() {
        let row = size_row(&g2(), 0);
        assert_eq!(row, vec![(0, 1.0), (1, -1.0)]);
        assert_eq!(row_norm_sq(&row), 2.0);

        // single self-loop page: 1 - 1 = 0, the row vanishes
        let row = size_row(&g1(), 0);
        assert!(row.is_empty());
        assert_eq!(row_norm_sq(&row), 0.0);

        let row = size_row(&g3(), 1);
        assert_eq!(row, vec![(0, -0.5), (1, 1.0), (2, -0.5)]);
        assert_eq!(row_norm_sq(&row), 1.5);
    }

    #[test]
    fn two_cycle_converges_in_one_step() {
        let g = g2();
        let mut s = SizeState::init(2);
        size_step(&mut s, &g, 0);
        assert_eq!(s.s(), &[0.5, 0.5]);
        assert_eq!(estimate_size(&s, 0).unwrap(), 2.0);
        // already at the fixed point: the next step is a no-op
        size_step(&mut s, &g, 1);
        assert_eq!(s.s(), &[0.5, 0.5]);
        assert_eq!(s.t(), 2);
    }

    #[test]
    fn zero_row_skip_keeps_fixed_point() {
        let mut s = SizeState::init(1);
        size_step(&mut s, &g1(), 0);
        assert_eq!(s.s(), &[1.0]);
        assert_eq!(s.t(), 1);
        assert_eq!(estimate_size(&s, 0).unwrap(), 1.0);
    }

    #[test]
    fn three_page_step_preserves_entry_sum() {
        let g = g3();
        let mut s = SizeState::init(3);
        // c_0 = {0: 1, 1: -1}, norm 2, <c_0, s_0> = 1
        size_step(&mut s, &g, 0);
        assert_eq!(s.s(), &[0.5, 0.5, 0.0]);
        let sum: f64 = s.s().iter().sum();
        assert_eq!(sum, 1.0);
    }

    #[test]
    fn run_size_examples() {
        let s = run_size(&g2(), 0, 1).unwrap();
        assert_eq!(s.s(), &[1.0, 0.0]);

        // any first draw projects onto one of the two equivalent rows
        let s = run_size(&g2(), 1, 1).unwrap();
        assert_eq!(s.s(), &[0.5, 0.5]);
    }

    #[test]
    fn run_size_requires_strong_connectivity() {
        let g = HyperlinkGraph::parse("3\n0 1\n1 0\n2 0\n").unwrap();
        assert_eq!(
            run_size(&g, 10, 1).unwrap_err(),
            SizeError::NotStronglyConnected
        );
    }

    #[test]
    fn estimate_rejects_non_positive_entries() {
        let s = SizeState::init(2);
        assert_eq!(
            estimate_size(&s, 1).unwrap_err(),
            SizeError::NonPositiveEntry {
                index: 1,
                value: 0.0
            }
        );
    }

    #[test]
    fn spectral_values() {
        // C_hat for the 2-cycle is [[1, -1], [-1, 1]]: eigenvalues {0, 2}
        let spec = size_spectral(&g2());
        assert!(!spec.degenerate);
        assert!((spec.sigma2 - 2.0).abs() < 1e-12);

        let spec = size_spectral(&g1());
        assert!(spec.degenerate);
        assert_eq!(spec.sigma2, 0.0);

        let spec = size_spectral(&g3());
        assert!(spec.sigma2 > 0.0);
    }

    #[test]
    fn entry_sum_conserved_over_long_runs() {
        let g = HyperlinkGraph::synthetic(100, 0.5, 42);
        assert!(g.is_strongly_connected());
        let s = run_size(&g, 10_000, 3).unwrap();
        let sum: f64 = s.s().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-10, "entry sum drifted to {sum}");
    }

    #[test]
    fn observer_reports_monotone_distance() {
        let g = HyperlinkGraph::synthetic(30, 0.5, 8);
        let mut last = f64::INFINITY;
        run_size_with_observer(&g, 500, 5, |_, d| {
            assert!(d <= last * (1.0 + 1e-13) + 1e-300);
            last = d;
        })
        .unwrap();
        assert!(last < 1e-3);
    }

    #[test]
    fn step_touches_only_row_support() {
        let g = g3();
        for k in 0..3 {
            let mut s = SizeState::init(3);
            // move off the initial point so every entry is distinctive
            size_step(&mut s, &g, 0);
            let before = s.s().to_vec();
            size_step(&mut s, &g, k);
            for (i, &prev) in before.iter().enumerate() {
                if i != k && !g.out_links(k).contains(&i) {
                    assert_eq!(s.s()[i], prev, "entry {i} moved on step {k}");
                }
            }
        }
    }

    // Dense reference for Eq.-style row projection, independent of the
    // sparse path.
    fn dense_size_step(g: &HyperlinkGraph, s: &[f64], k: usize) -> Vec<f64> {
        let n = g.page_count();
        let mut c = vec![0.0; n]; // row k of (I - A)^T
        c[k] += 1.0;
        for &i in g.out_links(k) {
            c[i] -= 1.0 / g.out_degree(k) as f64;
        }
        let norm_sq: f64 = c.iter().map(|v| v * v).sum();
        if norm_sq == 0.0 {
            return s.to_vec();
        }
        let dot: f64 = c.iter().zip(s).map(|(a, b)| a * b).sum();
        s.iter()
            .zip(&c)
            .map(|(v, ck)| v - dot / norm_sq * ck)
            .collect()
    }

    proptest! {
        #[test]
        fn step_matches_dense_projection(n in 1usize..9, seed: u64, warmup in 0usize..6) {
            let g = HyperlinkGraph::synthetic(n, 0.5, seed);
            let mut state = SizeState::init(n);
            let mut lcg = seed;
            for _ in 0..warmup {
                lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1);
                size_step(&mut state, &g, (lcg >> 33) as usize % n);
            }
            for k in 0..n {
                let expected = dense_size_step(&g, state.s(), k);
                let mut probe = state.clone();
                size_step(&mut probe, &g, k);
                for (value, want) in probe.s().iter().zip(&expected) {
                    prop_assert!((value - want).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn entry_sum_stays_one(n in 1usize..12, seed: u64) {
            let g = HyperlinkGraph::synthetic(n, 0.5, seed);
            let mut state = SizeState::init(n);
            let mut lcg = seed;
            for _ in 0..80 {
                lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1);
                size_step(&mut state, &g, (lcg >> 33) as usize % n);
                let sum: f64 = state.s().iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }
}
