//! PageRank by randomized matching pursuit.
//!
//! The scaled PageRank vector (entries summing to the page count `N`
//! instead of 1) is the unique solution of the linear system
//!
//! ```text
//! (I - alpha * A) x = (1 - alpha) * 1
//! ```
//!
//! where `A` is the column-stochastic hyperlink matrix. This crate treats
//! the columns of `B = I - alpha * A` as dictionary atoms and solves the
//! system by projecting the residual onto a uniformly random atom per
//! iteration. Each iteration touches only the selected page and its
//! out-links, so the update runs with strictly local information.
//!
//! Modules:
//! - [`graph`] — the out-link graph model, text format, and the synthetic
//!   generator used by the experiments;
//! - [`solver`] — the randomized matching-pursuit iteration;
//! - [`oracle`] — dense ground truth and spectral convergence-rate bounds;
//! - [`sizeest`] — distributed network-size estimation by randomized row
//!   projections onto the nullspace of `(I - A)^T`;
//! - [`experiment`] — multi-round averaged trajectory harness with CSV
//!   export.

pub mod experiment;
pub mod graph;
pub mod oracle;
pub mod sizeest;
pub mod solver;

pub use experiment::{default_checkpoints, export_csv, round_seed, run_rounds, TrajectoryTable};
pub use graph::{GraphError, HyperlinkGraph};
pub use oracle::{
    power_iteration_pagerank, solve_dense, spectral_rate, OracleError, OracleSolution,
    SpectralReport,
};
pub use sizeest::{
    estimate_size, run_size, run_size_with_observer, size_row, size_spectral, size_step, SizeError,
    SizeSpectral, SizeState,
};
pub use solver::{
    column_norm_sq, conservation_defect, run, run_with_observer, step, step_recorded,
    AccessCounter, SolverConfig, SolverState,
};
