//! `dcqo` — command-line runner for the counterdiabatic quantum-optimization
//! toolkit. Builds problems, synthesizes and optionally trains circuits,
//! simulates them exactly or with shot sampling, and persists results as
//! JSON (single runs) or CSV (scans).
//!
//! Exit codes: 0 success, 1 domain/runtime error, 2 usage error.

mod pipeline;
mod scans;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "dcqo",
    version,
    about = "Synthesize, compress, train, and simulate digitized annealing and \
             counterdiabatic optimization circuits for quadratic binary problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one algorithm on one problem and write a JSON result.
    Solve(SolveArgs),
    /// Sweep total evolution time and tabulate success probabilities of the
    /// annealing, full, and impulse-regime circuits (CSV).
    RegimeScan(RegimeScanArgs),
    /// Run several algorithms over seeded instances and tabulate per-instance
    /// metrics (CSV and JSON).
    Compare(CompareArgs),
    /// Solve a quadratic binary program classically with decomposition-based
    /// large-neighborhood search.
    Lns(LnsArgs),
}

/// Where the problem comes from (exactly one).
#[derive(Args, Debug, Clone, Serialize)]
#[group(required = true, multiple = false)]
pub struct ProblemSource {
    /// JSON tour instance: {"cities": n, "distances": [[...]]} or
    /// {"coordinates": [[x, y], ...]}, optional "penalty".
    #[arg(long, value_name = "FILE")]
    pub tsp: Option<PathBuf>,
    /// Text quadratic program: first line `n`, then `i j value` monomial
    /// coefficients (i ≤ j), `#` comments.
    #[arg(long, value_name = "FILE")]
    pub qubo: Option<PathBuf>,
    /// Fully connected random spin glass with this many spins.
    #[arg(long, value_name = "N")]
    pub random_spin_glass: Option<usize>,
    /// Random dense quadratic binary program with this many variables.
    #[arg(long, value_name = "N")]
    pub dense_qubo: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Digitized quantum annealing.
    Dqa,
    /// Digitized counterdiabatic evolution, impulse regime (gauge term only).
    Dcqo,
    /// Digitized counterdiabatic evolution with the annealing term included.
    DcqoFull,
    /// Alternating-operator ansatz, classically optimized.
    Qaoa,
    /// Parameterized counterdiabatic ansatz, classically optimized.
    Hdcqo,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// One field angle and one coupling angle per layer.
    TwoParam,
    /// Per-site field angles plus one coupling angle per layer.
    PerSite,
    /// Per-site field angles and z-y coupling words only.
    #[value(name = "per-site-zy")]
    PerSiteZy,
}

impl Variant {
    pub fn to_core(self) -> dcqo_core::circuit::AnsatzVariant {
        match self {
            Variant::TwoParam => dcqo_core::circuit::AnsatzVariant::TwoParam,
            Variant::PerSite => dcqo_core::circuit::AnsatzVariant::PerSite,
            Variant::PerSiteZy => dcqo_core::circuit::AnsatzVariant::PerSiteZyOnly,
        }
    }
}

/// Knobs for the classical optimizer behind `qaoa` and `hdcqo`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct OptimizerArgs {
    /// Independent optimizer starts; the best final cost wins.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Iteration budget per start.
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Relative convergence tolerance on the cost.
    #[arg(long, default_value_t = 1e-7)]
    pub tolerance: f64,
    /// Seed for random parameter initialization.
    #[arg(long, default_value_t = 0)]
    pub opt_seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Seed for generated problems.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Circuit family to run.
    #[arg(long, value_enum)]
    pub alg: Algorithm,
    /// Digitization steps (dqa, dcqo, dcqo-full) [default: 6].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Total evolution time (dqa, dcqo-full; ignored by dcqo's gate angles)
    /// [default: 1.0].
    #[arg(long)]
    pub time: Option<f64>,
    /// Ansatz layers (qaoa, hdcqo) [default: 1].
    #[arg(long)]
    pub layers: Option<usize>,
    /// Parameter layout of the hdcqo ansatz.
    #[arg(long, value_enum, default_value_t = Variant::TwoParam)]
    pub variant: Variant,
    /// Initialize hdcqo from the digitized schedule instead of randomly.
    #[arg(long)]
    pub warm: bool,
    /// Digitization steps backing the warm start (defaults to --layers).
    #[arg(long)]
    pub warm_steps: Option<usize>,
    /// Drop rotation gates with folded |angle| below this threshold.
    #[arg(long, default_value_t = 0.0)]
    pub cutoff: f64,
    /// Measurement shots; 0 reports the exact distribution.
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    /// Seed for shot sampling.
    #[arg(long, default_value_t = 0)]
    pub shot_seed: u64,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Outcomes listed in the result table.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
    /// Output JSON path (stdout when omitted). Not part of the run config,
    /// so it is left out of the result's command echo.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RegimeScanArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Seed for generated problems.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Digitization steps for every circuit in the scan.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Smallest total evolution time.
    #[arg(long, default_value_t = 0.005)]
    pub t_min: f64,
    /// Largest total evolution time.
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    /// Number of log-spaced times (1 uses t-min alone).
    #[arg(long, default_value_t = 7)]
    pub points: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Instance seeds, e.g. `--seeds 0,1,2`.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub seeds: Vec<u64>,
    /// Algorithms to compare, e.g. `--algorithms dqa,dcqo,qaoa`.
    #[arg(long, value_enum, value_delimiter = ',', num_args = 1.., required = true)]
    pub algorithms: Vec<Algorithm>,
    /// Digitization steps (dqa, dcqo, dcqo-full).
    #[arg(long, default_value_t = 6)]
    pub steps: usize,
    /// Total evolution time (dqa, dcqo-full).
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    /// Ansatz layers (qaoa, hdcqo).
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    /// Parameter layout of the hdcqo ansatz.
    #[arg(long, value_enum, default_value_t = Variant::TwoParam)]
    pub variant: Variant,
    /// Initialize hdcqo from metadata of the digitized schedule.
    #[arg(long)]
    pub warm: bool,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Output CSV path (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing)]
    pub out_csv: Option<PathBuf>,
    /// Optional JSON copy of the table.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing)]
    pub out_json: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LnsArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Seed for generated problems.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Variables per subproblem (each solved exhaustively).
    #[arg(long, default_value_t = 8)]
    pub group_size: usize,
    /// How variables are grouped.
    #[arg(long, value_enum, default_value_t = Strategy::GreedyCoupling)]
    pub strategy: Strategy,
    /// Sweep budget.
    #[arg(long, default_value_t = 20)]
    pub max_sweeps: usize,
    /// Output JSON path (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    GreedyCoupling,
    Sequential,
}

impl Strategy {
    pub fn to_core(self) -> dcqo_core::problems::DecomposeStrategy {
        match self {
            Strategy::GreedyCoupling => dcqo_core::problems::DecomposeStrategy::GreedyCoupling,
            Strategy::Sequential => dcqo_core::problems::DecomposeStrategy::Sequential,
        }
    }
}

/// Reports a post-parse validation problem in clap style and exits with the
/// usage-error code.
pub fn usage_error(message: &str) -> ! {
    let mut cmd = Cli::command();
    cmd.error(clap::error::ErrorKind::InvalidValue, message).exit()
}

fn configure_workers() {
    if let Ok(raw) = std::env::var("DCQO_WORKERS") {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => {
                // Ignore failure: the global pool can only be set once.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => usage_error(&format!(
                "DCQO_WORKERS must be a positive integer, got {raw:?}"
            )),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_workers();
    let outcome = match cli.command {
        Command::Solve(args) => pipeline::cmd_solve(&args),
        Command::RegimeScan(args) => scans::cmd_regime_scan(&args),
        Command::Compare(args) => scans::cmd_compare(&args),
        Command::Lns(args) => scans::cmd_lns(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let detail = serde_json::json!({ "error": format!("{e:#}") });
            eprintln!("{detail}");
            ExitCode::from(1)
        }
    }
}
