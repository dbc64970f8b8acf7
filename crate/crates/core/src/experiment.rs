//! Multi-round averaged trajectory harness.
//!
//! Runs many independent solver rounds on one graph, averages the error
//! metrics at fixed checkpoints, and attaches the spectral bound curves so
//! the empirical decay can be compared against the expected one. Rounds
//! execute in parallel; per-round seeds derive from the base seed and the
//! round index, so the table is identical regardless of scheduling.

use crate::graph::HyperlinkGraph;
use crate::oracle::{self, OracleError};
use crate::solver::{self, SolverConfig, SolverState};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Averaged trajectories at fixed checkpoints, with matching bound
/// columns. `mean_err` is the mean of `(1/n) ||x_t - x*||^2`, `mean_res`
/// the mean of `||r_t||^2`; `error_bound` is divided by `n` to share the
/// `mean_err` scale.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub checkpoints: Vec<u64>,
    pub mean_err: Vec<f64>,
    pub mean_res: Vec<f64>,
    pub residual_bound: Vec<f64>,
    pub error_bound: Vec<f64>,
}

/// Deterministic per-round seed: a SplitMix64 finalizer over the base seed
/// and the round index. Fixed so that rounds are independent streams yet
/// reproducible and order-free.
pub fn round_seed(base_seed: u64, round: u64) -> u64 {
    let mut z = base_seed ^ round.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 21 evenly spaced checkpoints spanning `0..=max_iters` (fewer when
/// `max_iters < 20`). On the reference configuration (`n = 100`,
/// `max_iters = 2000`) this is `t = m * n` for `m = 0..=20`.
pub fn default_checkpoints(max_iters: u64) -> Vec<u64> {
    let step = (max_iters / 20).max(1);
    (0..=20)
        .map(|m| m * step)
        .filter(|&t| t <= max_iters)
        .collect()
}

/// Runs `rounds` independent solver runs and averages both error metrics
/// at each checkpoint. Checkpoints must be strictly increasing and lie
/// within `cfg.max_iters`. Rounds are fixed-length: `stop_tol` is ignored
/// so that every round contributes at every checkpoint.
pub fn run_rounds(
    g: &HyperlinkGraph,
    cfg: &SolverConfig,
    rounds: u64,
    checkpoints: &[u64],
) -> Result<TrajectoryTable, OracleError> {
    assert!(rounds >= 1, "need at least one round");
    assert!(
        checkpoints.windows(2).all(|w| w[0] < w[1]),
        "checkpoints must be strictly increasing"
    );
    if let Some(&last) = checkpoints.last() {
        assert!(last <= cfg.max_iters, "checkpoints exceed max_iters");
    }

    let report = oracle::spectral_rate(g, cfg.alpha);
    let residual_bound: Vec<f64> = checkpoints
        .iter()
        .map(|&t| report.residual_bound(t))
        .collect();
    let n = g.page_count() as f64;
    let error_bound: Vec<f64> = checkpoints
        .iter()
        .map(|&t| report.error_bound(t) / n)
        .collect();

    if checkpoints.is_empty() {
        return Ok(TrajectoryTable {
            checkpoints: Vec::new(),
            mean_err: Vec::new(),
            mean_res: Vec::new(),
            residual_bound,
            error_bound,
        });
    }

    let x_star = oracle::solve_dense(g, cfg.alpha)?.x_star;
    let per_round: Vec<Vec<(f64, f64)>> = (0..rounds)
        .into_par_iter()
        .map(|round| single_round(g, cfg, round_seed(cfg.seed, round), checkpoints, &x_star))
        .collect();

    // Sum in round order so the aggregate is independent of scheduling.
    let mut mean_err = vec![0.0; checkpoints.len()];
    let mut mean_res = vec![0.0; checkpoints.len()];
    for row in &per_round {
        for (i, &(err, res)) in row.iter().enumerate() {
            mean_err[i] += err;
            mean_res[i] += res;
        }
    }
    for v in mean_err.iter_mut().chain(mean_res.iter_mut()) {
        *v /= rounds as f64;
    }

    Ok(TrajectoryTable {
        checkpoints: checkpoints.to_vec(),
        mean_err,
        mean_res,
        residual_bound,
        error_bound,
    })
}

fn single_round(
    g: &HyperlinkGraph,
    cfg: &SolverConfig,
    seed: u64,
    checkpoints: &[u64],
    x_star: &[f64],
) -> Vec<(f64, f64)> {
    let n = g.page_count();
    let mut state = SolverState::init(g, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().copied().peekable();
    if next.peek() == Some(&0) {
        next.next();
        out.push(metrics(&state, x_star, n));
    }
    let last = *checkpoints.last().unwrap();
    for _ in 0..last {
        let k = rng.random_range(0..n);
        solver::step(&mut state, g, cfg.alpha, k);
        if state.t().is_multiple_of(n as u64) {
            state.refresh_residual_norm();
        }
        if next.peek() == Some(&state.t()) {
            next.next();
            out.push(metrics(&state, x_star, n));
        }
    }
    out
}

fn metrics(state: &SolverState, x_star: &[f64], n: usize) -> (f64, f64) {
    let err: f64 = state
        .x()
        .iter()
        .zip(x_star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    (err / n as f64, state.residual_norm_sq())
}

/// CSV serialization: a header line, then one row per checkpoint with
/// floats printed to 17 significant digits so parsing reproduces them
/// bit-for-bit.
pub fn export_csv(table: &TrajectoryTable) -> String {
    let mut out = String::from("t,mean_err,mean_res,residual_bound,error_bound\n");
    for (i, &t) in table.checkpoints.iter().enumerate() {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            t, table.mean_err[i], table.mean_res[i], table.residual_bound[i], table.error_bound[i],
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::HyperlinkGraph;

    fn cfg(alpha: f64, seed: u64, iters: u64) -> SolverConfig {
        SolverConfig::new(alpha, seed, iters)
    }

    #[test]
    fn single_page_trajectory_is_exact() {
        let g = HyperlinkGraph::parse("1\n0 0\n").unwrap();
        let table = run_rounds(&g, &cfg(0.85, 5, 1), 3, &[0, 1]).unwrap();
        assert_eq!(table.mean_err[0], 1.0);
        assert!(table.mean_err[1] <= 1e-26);
        assert!((table.mean_res[0] - (1.0 - 0.85f64) * (1.0 - 0.85)).abs() < 1e-17);

        let csv = export_csv(&table);
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert!(rows[0].starts_with("0,1.0000000000000000e0,"));
        assert!(rows[1].starts_with("1,"));
    }

    #[test]
    fn initial_checkpoint_matches_forced_values() {
        let g = HyperlinkGraph::synthetic(100, 0.5, 42);
        let table = run_rounds(&g, &cfg(0.85, 9, 10), 4, &[0]).unwrap();
        let expected_res = 100.0 * (1.0 - 0.85f64) * (1.0 - 0.85);
        assert!(
            (table.mean_res[0] - expected_res).abs() <= 1e-14 * expected_res,
            "mean_res[0] = {}",
            table.mean_res[0]
        );
        let x_star = crate::oracle::solve_dense(&g, 0.85).unwrap().x_star;
        let expected_err: f64 = x_star.iter().map(|v| v * v).sum::<f64>() / 100.0;
        assert!((table.mean_err[0] - expected_err).abs() <= 1e-12 * expected_err);
    }

    #[test]
    fn table_is_deterministic_under_parallel_rounds() {
        let g = HyperlinkGraph::synthetic(40, 0.5, 7);
        let checkpoints: Vec<u64> = (0..=10).map(|m| m * 40).collect();
        let a = run_rounds(&g, &cfg(0.85, 123, 400), 16, &checkpoints).unwrap();
        let b = run_rounds(&g, &cfg(0.85, 123, 400), 16, &checkpoints).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_residual_tracks_the_bound() {
        let g = HyperlinkGraph::synthetic(40, 0.5, 11);
        let checkpoints: Vec<u64> = (0..=10).map(|m| m * 40).collect();
        let table = run_rounds(&g, &cfg(0.85, 2, 400), 30, &checkpoints).unwrap();
        for (i, &t) in checkpoints.iter().enumerate() {
            assert!(
                table.mean_res[i] <= 1.5 * table.residual_bound[i],
                "checkpoint {}: {} vs bound {}",
                t,
                table.mean_res[i],
                table.residual_bound[i]
            );
        }
    }

    #[test]
    fn default_checkpoint_grid() {
        assert_eq!(default_checkpoints(2000).len(), 21);
        assert_eq!(default_checkpoints(2000)[1], 100);
        assert_eq!(default_checkpoints(2000).last(), Some(&2000));
        assert_eq!(default_checkpoints(5), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(default_checkpoints(0), vec![0]);
    }

    #[test]
    fn csv_round_trips() {
        let g = HyperlinkGraph::synthetic(13, 0.5, 3);
        let checkpoints = [0, 7, 50];
        let table = run_rounds(&g, &cfg(0.85, 4, 50), 5, &checkpoints).unwrap();
        let csv = export_csv(&table);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,mean_err,mean_res,residual_bound,error_bound"
        );
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 5);
            assert_eq!(fields[0].parse::<u64>().unwrap(), table.checkpoints[i]);
            assert_eq!(fields[1].parse::<f64>().unwrap(), table.mean_err[i]);
            assert_eq!(fields[2].parse::<f64>().unwrap(), table.mean_res[i]);
            assert_eq!(fields[3].parse::<f64>().unwrap(), table.residual_bound[i]);
            assert_eq!(fields[4].parse::<f64>().unwrap(), table.error_bound[i]);
        }
    }

    #[test]
    fn empty_checkpoints_yield_header_only_csv() {
        let g = HyperlinkGraph::parse("1\n0 0\n").unwrap();
        let table = run_rounds(&g, &cfg(0.85, 1, 5), 2, &[]).unwrap();
        assert_eq!(
            export_csv(&table),
            "t,mean_err,mean_res,residual_bound,error_bound\n"
        );
    }
}
