//! Dense ground truth and convergence-rate analysis.
//!
//! Everything here exists to verify the sparse solver, not to rank at
//! scale: the dense routines are contracted to `n <= 2000`.
//!
//! [`solve_dense`] computes the scaled PageRank vector as the solution of
//! `(I - alpha A) x = (1 - alpha) 1` by LU elimination with partial
//! pivoting. [`power_iteration_pagerank`] derives the same vector
//! independently from the fixed point of the perturbed matrix
//! `M = alpha A + (1 - alpha) S`. [`spectral_rate`] measures the smallest
//! singular value of the column-normalized dictionary, which controls the
//! solver's expected geometric decay.

use crate::graph::HyperlinkGraph;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    /// The dense system could not be solved or produced an invalid
    /// solution. Cannot occur for a valid graph (the eigenvalues of `A`
    /// lie in the unit disk, so `I - alpha A` is invertible); it signals
    /// corrupted input.
    #[error("dense PageRank system is singular or produced an invalid solution")]
    SingularSystem,
    #[error("power iteration did not converge within {max_iters} iterations")]
    NoConvergence { max_iters: u64 },
}

/// Ground-truth scaled PageRank vector. Entries are strictly positive and
/// sum to the page count.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub x_star: Vec<f64>,
}

/// Spectral quantities behind the expected decay of `||r_t||^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralReport {
    /// Smallest singular value of `B_hat`, the column-normalized `B`.
    pub sigma_min: f64,
    /// Per-step rate `1 - sigma_min^2 / n`, in `[0, 1)`.
    pub rate: f64,
    /// `||r_0||^2 = n (1 - alpha)^2`.
    pub r0_norm_sq: f64,
}

impl SpectralReport {
    /// Bound on `E ||r_t||^2`: `rate^t * ||r_0||^2`.
    pub fn residual_bound(&self, t: u64) -> f64 {
        self.rate.powi(t as i32) * self.r0_norm_sq
    }

    /// Bound on `E ||x_t - x*||^2`: `sigma^-2 * rate^t * ||r_0||^2`.
    pub fn error_bound(&self, t: u64) -> f64 {
        self.residual_bound(t) / (self.sigma_min * self.sigma_min)
    }
}

/// Dense `B = I - alpha A` built from the out-link lists.
fn dense_b(g: &HyperlinkGraph, alpha: f64) -> DMatrix<f64> {
    let n = g.page_count();
    let mut b = DMatrix::identity(n, n);
    for j in 0..n {
        let w = alpha / g.out_degree(j) as f64;
        for &i in g.out_links(j) {
            b[(i, j)] -= w;
        }
    }
    b
}

/// Solves `(I - alpha A) x = (1 - alpha) 1` by LU with partial pivoting
/// and validates the solution (entry sum `n` within `1e-8 * n`, strict
/// positivity). Contracted to `n <= 2000`.
pub fn solve_dense(g: &HyperlinkGraph, alpha: f64) -> Result<OracleSolution, OracleError> {
    let n = g.page_count();
    let b = dense_b(g, alpha);
    let rhs = DVector::from_element(n, 1.0 - alpha);
    let x = b.lu().solve(&rhs).ok_or(OracleError::SingularSystem)?;
    let sum: f64 = x.iter().sum();
    if (sum - n as f64).abs() > 1e-8 * n as f64 || x.iter().any(|&v| v <= 0.0) {
        return Err(OracleError::SingularSystem);
    }
    Ok(OracleSolution {
        x_star: x.as_slice().to_vec(),
    })
}

/// Scaled PageRank from the perturbed matrix `M = alpha A + (1 - alpha) S`:
/// iterates `v <- M v` on a probability vector (where `S v = 1/n * 1`)
/// until the l1 change drops to `tol`, then rescales by `n`.
pub fn power_iteration_pagerank(
    g: &HyperlinkGraph,
    alpha: f64,
    tol: f64,
    max_iters: u64,
) -> Result<OracleSolution, OracleError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = g.page_count();
    let teleport = (1.0 - alpha) / n as f64;
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iters {
        next.fill(teleport);
        for (j, &vj) in v.iter().enumerate() {
            let w = alpha * vj / g.out_degree(j) as f64;
            for &i in g.out_links(j) {
                next[i] += w;
            }
        }
        // renormalize to the simplex to suppress drift
        let sum: f64 = next.iter().sum();
        for value in next.iter_mut() {
            *value /= sum;
        }
        let diff: f64 = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut v, &mut next);
        if diff <= tol {
            return Ok(OracleSolution {
                x_star: v.iter().map(|&p| p * n as f64).collect(),
            });
        }
    }
    Err(OracleError::NoConvergence { max_iters })
}

/// Smallest singular value of the column-normalized dictionary `B_hat`,
/// computed from the symmetric eigendecomposition of `B_hat' B_hat`.
/// Contracted to `n <= 2000`.
pub fn spectral_rate(g: &HyperlinkGraph, alpha: f64) -> SpectralReport {
    let n = g.page_count();
    let mut b = dense_b(g, alpha);
    for mut col in b.column_iter_mut() {
        let norm = col.norm();
        for v in col.iter_mut() {
            *v /= norm;
        }
    }
    let gram = b.transpose() * &b;
    let eigenvalues = gram.symmetric_eigenvalues();
    let lambda_min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let sigma_min = lambda_min.max(0.0).sqrt();
    let r0 = 1.0 - alpha;
    SpectralReport {
        sigma_min,
        rate: (1.0 - lambda_min / n as f64).clamp(0.0, 1.0),
        r0_norm_sq: n as f64 * r0 * r0,
    }
}
