//! Command-line front end: graph generation, the randomized solver, the
//! dense oracle, spectral reports, the averaged experiment harness, and
//! network-size estimation.
//!
//! Exit codes: 0 on success, 1 for input or format errors (bad flags,
//! malformed graph files), 2 for precondition failures (size estimation
//! on a graph that is not strongly connected, dense oracle work beyond
//! the supported size).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mp_pagerank::{
    default_checkpoints, export_csv, power_iteration_pagerank, run_rounds, run_size_with_observer,
    run_with_observer, solve_dense, spectral_rate, HyperlinkGraph, SolverConfig,
};

/// Dense oracle and spectral analysis are meant for verification-sized
/// graphs only.
const MAX_DENSE_PAGES: usize = 2000;

#[derive(Parser)]
#[command(
    name = "mp-pagerank",
    version,
    about = "Randomized matching-pursuit PageRank toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic hyperlink graph
    Gen {
        /// Number of pages
        #[arg(long)]
        n: usize,
        /// Edge-drop threshold in [0, 1]; edge density is 1 - threshold
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized solver; prints one "index value" line per page
    Solve {
        /// Graph file
        #[arg(long)]
        graph: PathBuf,
        /// Damping factor in (0, 1)
        #[arg(long, default_value_t = 0.85)]
        alpha: f64,
        /// Iteration budget
        #[arg(long)]
        iters: u64,
        /// Optional early stop on ||r||^2; whichever of --iters/--tol
        /// triggers first ends the run
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional CSV trajectory of (t, ||r_t||^2)
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground-truth scaled PageRank; prints one "index value" line per page
    Oracle {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.85)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = OracleMethod::Dense)]
        method: OracleMethod,
        /// Convergence tolerance (power method only)
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral convergence-rate report as labeled lines
    Spectral {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.85)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Averaged multi-round error trajectories as CSV
    Experiment {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.85)]
        alpha: f64,
        #[arg(long, default_value_t = 100)]
        rounds: u64,
        /// Iteration budget per round; checkpoints span it evenly
        #[arg(long)]
        iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Network-size estimation; prints one "index estimate" line per page
    Size {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional CSV trajectory of (t, ||s_t - 1/n||^2)
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMethod {
    Dense,
    Power,
}

enum CliError {
    Input(String),
    Precondition(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Precondition(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Precondition(_) => 2,
        }
    }
}

fn input_err(message: impl Into<String>) -> CliError {
    CliError::Input(message.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version go to stdout with success; usage errors to
            // stderr with the input-error code
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mp-pagerank: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen {
            n,
            threshold,
            seed,
            out,
        } => {
            if n < 1 {
                return Err(input_err("--n must be at least 1"));
            }
            if !(0.0..=1.0).contains(&threshold) {
                return Err(input_err("--threshold must lie in [0, 1]"));
            }
            let g = HyperlinkGraph::synthetic(n, threshold, seed);
            emit(out.as_deref(), &g.to_text())
        }
        Command::Solve {
            graph,
            alpha,
            iters,
            tol,
            seed,
            traj,
            out,
        } => {
            check_alpha(alpha)?;
            if let Some(tol) = tol {
                if tol < 0.0 {
                    return Err(input_err("--tol must be nonnegative"));
                }
            }
            let g = load_graph(&graph)?;
            let mut cfg = SolverConfig::new(alpha, seed, iters);
            if let Some(tol) = tol {
                cfg = cfg.with_stop_tol(tol);
            }
            let mut traj_csv = traj.as_ref().map(|_| String::from("t,res_norm_sq\n"));
            let state = run_with_observer(&g, &cfg, |t, res| {
                if let Some(csv) = traj_csv.as_mut() {
                    let _ = writeln!(csv, "{t},{res:.16e}");
                }
            });
            if let (Some(path), Some(csv)) = (traj.as_deref(), traj_csv) {
                write_file(path, &csv)?;
            }
            emit(out.as_deref(), &vector_lines(state.x()))
        }
        Command::Oracle {
            graph,
            alpha,
            method,
            tol,
            out,
        } => {
            check_alpha(alpha)?;
            let g = load_graph(&graph)?;
            check_dense_size(&g)?;
            let solution = match method {
                OracleMethod::Dense => solve_dense(&g, alpha),
                OracleMethod::Power => {
                    if tol <= 0.0 {
                        return Err(input_err("--tol must be positive"));
                    }
                    power_iteration_pagerank(&g, alpha, tol, 1_000_000)
                }
            }
            .map_err(|e| input_err(e.to_string()))?;
            emit(out.as_deref(), &vector_lines(&solution.x_star))
        }
        Command::Spectral { graph, alpha, out } => {
            check_alpha(alpha)?;
            let g = load_graph(&graph)?;
            check_dense_size(&g)?;
            let report = spectral_rate(&g, alpha);
            let text = format!(
                "sigma_min {:?}\nrate {:?}\nr0_norm_sq {:?}\n",
                report.sigma_min, report.rate, report.r0_norm_sq
            );
            emit(out.as_deref(), &text)
        }
        Command::Experiment {
            graph,
            alpha,
            rounds,
            iters,
            seed,
            out,
        } => {
            check_alpha(alpha)?;
            if rounds < 1 {
                return Err(input_err("--rounds must be at least 1"));
            }
            let g = load_graph(&graph)?;
            check_dense_size(&g)?;
            let cfg = SolverConfig::new(alpha, seed, iters);
            let checkpoints = default_checkpoints(iters);
            let table =
                run_rounds(&g, &cfg, rounds, &checkpoints).map_err(|e| input_err(e.to_string()))?;
            emit(out.as_deref(), &export_csv(&table))
        }
        Command::Size {
            graph,
            iters,
            seed,
            traj,
            out,
        } => {
            let g = load_graph(&graph)?;
            let mut traj_csv = traj.as_ref().map(|_| String::from("t,dist_sq\n"));
            let state = run_size_with_observer(&g, iters, seed, |t, dist| {
                if let Some(csv) = traj_csv.as_mut() {
                    let _ = writeln!(csv, "{t},{dist:.16e}");
                }
            })
            .map_err(|e| CliError::Precondition(e.to_string()))?;
            if let (Some(path), Some(csv)) = (traj.as_deref(), traj_csv) {
                write_file(path, &csv)?;
            }
            // raw reciprocals: entries that have not converged show up as
            // non-finite or negative estimates
            let estimates: Vec<f64> = state.s().iter().map(|&v| 1.0 / v).collect();
            emit(out.as_deref(), &vector_lines(&estimates))
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(input_err("--alpha must lie strictly between 0 and 1"))
    }
}

fn check_dense_size(g: &HyperlinkGraph) -> Result<(), CliError> {
    if g.page_count() > MAX_DENSE_PAGES {
        return Err(CliError::Precondition(format!(
            "dense oracle work supports at most {MAX_DENSE_PAGES} pages, got {}",
            g.page_count()
        )));
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<HyperlinkGraph, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    HyperlinkGraph::parse(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn vector_lines(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{i} {v:?}");
    }
    out
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| input_err(format!("cannot write to stdout: {e}")))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))
}
