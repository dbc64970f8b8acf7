//! Randomized matching-pursuit iteration for the scaled PageRank system.
//!
//! With `B = I - alpha * A` and `y = (1 - alpha) * 1`, the solver keeps a
//! PageRank estimate `x` and a residual `r = y - B x`. One iteration picks
//! a page `k` uniformly at random and projects the residual onto the atom
//! `B(:,k)`:
//!
//! ```text
//! delta    = B(:,k)' r / ||B(:,k)||^2
//! x[k]    += delta
//! r       -= delta * B(:,k)
//! ```
//!
//! Written out against the out-link lists, the update reads the residuals
//! of page `k`'s out-neighbors and writes back to the same set:
//!
//! ```text
//! num      = r[k] - (alpha / N_k) * sum(r[j] for j in out(k))
//! delta    = num / colnorm_sq[k]
//! r[j]    += delta * alpha / N_k      for j in out(k), j != k
//! r[k]    -= delta * (1 - alpha * A[k][k])
//! ```
//!
//! so every piece of information lives on page `k` or its out-neighbors.
//! The column norms `colnorm_sq[k] = 1 - 2 alpha A[k][k] + alpha^2 / N_k`
//! are precomputed once at initialization.
//!
//! Two exact invariants drive the tests: `B x + r` stays equal to `y`
//! at every iteration (each update moves mass between `x` and `r` along
//! the same atom), and `||r||` never increases (the update is an
//! orthogonal projection).

use crate::graph::HyperlinkGraph;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Damping factor, in (0, 1). 0.85 is the customary choice.
    pub alpha: f64,
    /// Seed for the page-sampling stream.
    pub seed: u64,
    /// Number of iterations `T`.
    pub max_iters: u64,
    /// Optional early-stop threshold on `||r||^2`. The distributed-faithful
    /// mode is fixed-`T`; this is a simulation convenience.
    pub stop_tol: Option<f64>,
}

impl SolverConfig {
    pub fn new(alpha: f64, seed: u64, max_iters: u64) -> Self {
        assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
        Self {
            alpha,
            seed,
            max_iters,
            stop_tol: None,
        }
    }

    pub fn with_stop_tol(mut self, tol: f64) -> Self {
        assert!(tol >= 0.0, "stop_tol must be nonnegative");
        self.stop_tol = Some(tol);
        self
    }
}

/// Per-page solver state: estimates `x`, residuals `r`, the precomputed
/// column norms of `B`, and the iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    x: Vec<f64>,
    r: Vec<f64>,
    colnorm_sq: Vec<f64>,
    t: u64,
    /// Incrementally tracked `||r||^2`; each projection subtracts
    /// `delta^2 * colnorm_sq[k]`. [`run`] recomputes it densely every `n`
    /// steps to cap drift.
    res_norm_sq: f64,
}

impl SolverState {
    /// Initial state: `x = 0`, `r = (1 - alpha) * 1`, column norms
    /// precomputed for every page.
    pub fn init(g: &HyperlinkGraph, cfg: &SolverConfig) -> Self {
        let n = g.page_count();
        let r0 = 1.0 - cfg.alpha;
        Self {
            x: vec![0.0; n],
            r: vec![r0; n],
            colnorm_sq: (0..n).map(|k| column_norm_sq(g, cfg.alpha, k)).collect(),
            t: 0,
            res_norm_sq: n as f64 * r0 * r0,
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn residual(&self) -> &[f64] {
        &self.r
    }

    pub fn colnorm_sq(&self) -> &[f64] {
        &self.colnorm_sq
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Tracked `||r||^2` (see the field note about drift).
    pub fn residual_norm_sq(&self) -> f64 {
        self.res_norm_sq
    }

    /// Replaces the tracked `||r||^2` with a dense recomputation.
    pub fn refresh_residual_norm(&mut self) {
        self.res_norm_sq = self.r.iter().map(|v| v * v).sum();
    }
}

/// `||B(:,k)||^2 = 1 - 2 alpha A[k][k] + alpha^2 / N_k`. Strictly positive,
/// and computable from page `k`'s local information alone.
pub fn column_norm_sq(g: &HyperlinkGraph, alpha: f64, k: usize) -> f64 {
    1.0 - 2.0 * alpha * g.self_loop_weight(k) + alpha * alpha / g.out_degree(k) as f64
}

/// Records which residual entries a step touched; used to verify that the
/// update is strictly local.
#[derive(Debug, Clone, Default)]
pub struct AccessCounter {
    pub residual_reads: Vec<usize>,
    pub residual_writes: Vec<usize>,
    pub x_writes: Vec<usize>,
}

trait AccessRecorder {
    fn read_r(&mut self, i: usize);
    fn write_r(&mut self, i: usize);
    fn write_x(&mut self, i: usize);
}

struct NoRecord;

impl AccessRecorder for NoRecord {
    #[inline]
    fn read_r(&mut self, _: usize) {}
    #[inline]
    fn write_r(&mut self, _: usize) {}
    #[inline]
    fn write_x(&mut self, _: usize) {}
}

impl AccessRecorder for AccessCounter {
    fn read_r(&mut self, i: usize) {
        self.residual_reads.push(i);
    }
    fn write_r(&mut self, i: usize) {
        self.residual_writes.push(i);
    }
    fn write_x(&mut self, i: usize) {
        self.x_writes.push(i);
    }
}

/// One projection step on page `k`. Touches only entries in
/// `{k} ∪ out(k)`.
pub fn step(state: &mut SolverState, g: &HyperlinkGraph, alpha: f64, k: usize) {
    step_inner(state, g, alpha, k, &mut NoRecord);
}

/// [`step`] with access instrumentation. The recorded counts mirror the
/// communication pattern: one read and one write per out-neighbor, plus
/// page `k`'s own residual (already among the neighbors when `k` links to
/// itself).
pub fn step_recorded(
    state: &mut SolverState,
    g: &HyperlinkGraph,
    alpha: f64,
    k: usize,
    counter: &mut AccessCounter,
) {
    step_inner(state, g, alpha, k, counter);
}

fn step_inner<R: AccessRecorder>(
    state: &mut SolverState,
    g: &HyperlinkGraph,
    alpha: f64,
    k: usize,
    rec: &mut R,
) {
    let neighbors = g.out_links(k);
    let nk = neighbors.len() as f64;
    let self_weight = g.self_loop_weight(k);

    let mut sum = 0.0;
    let mut r_k = 0.0;
    let mut saw_self = false;
    for &j in neighbors {
        rec.read_r(j);
        let v = state.r[j];
        sum += v;
        if j == k {
            r_k = v;
            saw_self = true;
        }
    }
    if !saw_self {
        rec.read_r(k);
        r_k = state.r[k];
    }

    let num = r_k - (alpha / nk) * sum;
    let delta = num / state.colnorm_sq[k];

    rec.write_x(k);
    state.x[k] += delta;
    let spread = delta * alpha / nk;
    for &j in neighbors {
        if j != k {
            rec.write_r(j);
            state.r[j] += spread;
        }
    }
    rec.write_r(k);
    state.r[k] -= delta * (1.0 - alpha * self_weight);

    // Orthogonal projection: the squared norm drops by exactly
    // delta^2 * ||B(:,k)||^2 in exact arithmetic.
    state.res_norm_sq -= delta * delta * state.colnorm_sq[k];
    state.t += 1;
}

/// Runs `cfg.max_iters` steps with pages drawn uniformly from the seeded
/// stream, stopping early once `||r||^2 <= stop_tol` when a tolerance is
/// set.
pub fn run(g: &HyperlinkGraph, cfg: &SolverConfig) -> SolverState {
    run_with_observer(g, cfg, |_, _| {})
}

/// [`run`] with a trajectory sink receiving `(t, ||r_t||^2)` after each
/// step.
pub fn run_with_observer<F: FnMut(u64, f64)>(
    g: &HyperlinkGraph,
    cfg: &SolverConfig,
    mut observer: F,
) -> SolverState {
    let n = g.page_count();
    let mut state = SolverState::init(g, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.max_iters {
        if let Some(tol) = cfg.stop_tol {
            if state.res_norm_sq <= tol {
                break;
            }
        }
        let k = rng.random_range(0..n);
        step(&mut state, g, cfg.alpha, k);
        if state.t.is_multiple_of(n as u64) {
            state.refresh_residual_norm();
        }
        observer(state.t, state.res_norm_sq);
    }
    state
}

/// `max_i |(B x + r - (1 - alpha) 1)_i|`, evaluated densely from the
/// out-link lists. Zero at initialization and conserved by every step up
/// to floating-point drift.
pub fn conservation_defect(state: &SolverState, g: &HyperlinkGraph, alpha: f64) -> f64 {
    let n = g.page_count();
    let x = state.x();
    let r = state.residual();
    // a[i] = (A x)_i accumulated column by column
    let mut ax = vec![0.0; n];
    for (j, &xj) in x.iter().enumerate() {
        let w = xj / g.out_degree(j) as f64;
        for &i in g.out_links(j) {
            ax[i] += w;
        }
    }
    let y = 1.0 - alpha;
    (0..n)
        .map(|i| (x[i] - alpha * ax[i] + r[i] - y).abs())
        .fold(0.0, f64::max)
}
