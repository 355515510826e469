//! Problem loading, single-run execution, and JSON result assembly.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use dcqo_core::ising::BRUTE_FORCE_LIMIT;
use dcqo_core::{
    apply_gate_cutoff, approximation_ratio_with_ground, brute_force_solve, build_dcqo_circuit,
    build_dqa_circuit, count_gates, format_bitstring, lower_to_cx, lower_to_ms, optimize_cd_ansatz,
    optimize_qaoa, qubo_to_ising, random_spin_glass, read_qubo_text, run_circuit,
    success_probability, tsp_to_qubo, AnsatzSpec, Circuit, DcqoVariant, GateCounts,
    GateCutoffStats, GroundStateSet, InitStrategy, IsingModel, OptMethod, OptimizationResult,
    OptimizerConfig, OutcomeDistribution, QuboProblem, TspInstance, VariationalOutcome,
};

use crate::{Algorithm, OptimizerArgs, ProblemSource, SolveArgs};

/// A problem ready to run: the spin model plus enough source context to
/// decode outcomes.
pub struct LoadedProblem {
    /// Echo of where the problem came from, for the result header.
    pub source: serde_json::Value,
    pub model: IsingModel,
    /// Present when the problem started life as a quadratic binary program.
    pub qubo: Option<QuboProblem>,
    /// Present for tour problems: the instance, for decoding outcomes.
    pub tsp: Option<TspInstance>,
}

/// Builds the spin model from whichever source flag was given.
pub fn load_problem(source: &ProblemSource, seed: u64) -> Result<LoadedProblem> {
    if let Some(path) = &source.tsp {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading tour instance {}", path.display()))?;
        let inst: TspInstance = serde_json::from_str(&text)
            .with_context(|| format!("parsing tour instance {}", path.display()))?;
        let qubo = tsp_to_qubo(&inst);
        let model = qubo_to_ising(&qubo);
        Ok(LoadedProblem {
            source: serde_json::json!({
                "kind": "tsp",
                "path": path.display().to_string(),
                "cities": inst.n(),
                "variables": model.n(),
                "penalty": inst.penalty(),
            }),
            model,
            qubo: Some(qubo),
            tsp: Some(inst),
        })
    } else if let Some(path) = &source.qubo {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading quadratic program {}", path.display()))?;
        let qubo = read_qubo_text(&text)
            .with_context(|| format!("parsing quadratic program {}", path.display()))?;
        let model = qubo_to_ising(&qubo);
        Ok(LoadedProblem {
            source: serde_json::json!({
                "kind": "qubo",
                "path": path.display().to_string(),
                "variables": model.n(),
            }),
            model,
            qubo: Some(qubo),
            tsp: None,
        })
    } else if let Some(n) = source.random_spin_glass {
        let model = random_spin_glass(n, seed)?;
        Ok(LoadedProblem {
            source: serde_json::json!({
                "kind": "random-spin-glass",
                "variables": n,
                "seed": seed,
            }),
            model,
            qubo: None,
            tsp: None,
        })
    } else if let Some(n) = source.dense_qubo {
        let qubo = dcqo_core::dense_qubo_instance(n, seed);
        let model = qubo_to_ising(&qubo);
        Ok(LoadedProblem {
            source: serde_json::json!({
                "kind": "dense-qubo",
                "variables": n,
                "seed": seed,
            }),
            model,
            qubo: Some(qubo),
            tsp: None,
        })
    } else {
        // clap's group(required = true) prevents this.
        unreachable!("no problem source")
    }
}

fn optimizer_config(args: &OptimizerArgs) -> OptimizerConfig {
    OptimizerConfig {
        method: OptMethod::NelderMead,
        max_iterations: args.max_iters,
        tolerance: args.tolerance,
        restarts: args.restarts,
        seed: args.opt_seed,
    }
}

/// Best parameters and optimization record of a variational run, echoed into
/// the result so a run is auditable.
#[derive(Serialize)]
pub struct OptimizerReport {
    pub restarts: usize,
    pub best_restart: usize,
    pub per_restart_costs: Vec<f64>,
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub cost_trace: Vec<f64>,
}

impl OptimizerReport {
    fn new(outcome: &VariationalOutcome) -> Self {
        let OptimizationResult {
            best_params,
            best_cost,
            iterations,
            evaluations,
            converged,
            cost_trace,
        } = outcome.result.clone();
        OptimizerReport {
            restarts: outcome.per_restart_costs.len(),
            best_restart: outcome.best_restart,
            per_restart_costs: outcome.per_restart_costs.clone(),
            best_params,
            best_cost,
            iterations,
            evaluations,
            converged,
            cost_trace,
        }
    }
}

/// One row of the outcome table.
#[derive(Serialize)]
pub struct OutcomeRow {
    pub bitstring: String,
    pub index: u64,
    pub probability: f64,
    pub energy: f64,
    /// Decoded city order, for tour problems whose assignment is feasible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tour: Option<Vec<usize>>,
    /// Length of that tour.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tour_length: Option<f64>,
}

/// Gate totals for the abstract circuit and both lowered forms.
#[derive(Serialize)]
pub struct GateReport {
    pub abstract_gates: GateCounts,
    pub cx_lowered: GateCounts,
    pub ms_lowered: GateCounts,
}

impl GateReport {
    pub fn new(c: &Circuit) -> Result<Self> {
        Ok(GateReport {
            abstract_gates: count_gates(c),
            cx_lowered: count_gates(&lower_to_cx(c)?),
            ms_lowered: count_gates(&lower_to_ms(c)?),
        })
    }
}

/// Everything a single run produces. Success probability and approximation
/// ratio are recomputable from `model` + `distribution`, which are persisted
/// in full.
#[derive(Serialize)]
pub struct RunResult {
    pub command: serde_json::Value,
    pub source: serde_json::Value,
    pub model: IsingModel,
    pub gate_counts: GateReport,
    pub cutoff: GateCutoffStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_degeneracy: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximation_ratio: Option<f64>,
    pub mean_energy: f64,
    pub shots: u64,
    pub top_outcomes: Vec<OutcomeRow>,
    pub distribution: OutcomeDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerReport>,
    pub wall_time_s: f64,
}

/// Builds (and for the variational families, trains) the circuit requested
/// by `args` on `model`. Returns the raw circuit plus the optimizer record
/// when one ran.
pub fn synthesize(
    model: &IsingModel,
    args: &SolveArgs,
) -> Result<(Circuit, Option<OptimizerReport>)> {
    let steps = args.steps.unwrap_or(6);
    let time = args.time.unwrap_or(1.0);
    let layers = args.layers.unwrap_or(1);
    match args.alg {
        Algorithm::Dqa => Ok((build_dqa_circuit(model, steps, time)?, None)),
        Algorithm::Dcqo => Ok((
            build_dcqo_circuit(model, steps, time, DcqoVariant::CdOnly)?,
            None,
        )),
        Algorithm::DcqoFull => Ok((
            build_dcqo_circuit(model, steps, time, DcqoVariant::Full)?,
            None,
        )),
        Algorithm::Qaoa => {
            let outcome = optimize_qaoa(model, layers, &optimizer_config(&args.optimizer))?;
            let report = OptimizerReport::new(&outcome);
            Ok((outcome.circuit, Some(report)))
        }
        Algorithm::Hdcqo => {
            let spec = AnsatzSpec {
                variant: args.variant.to_core(),
                layers,
            };
            let init = if args.warm {
                InitStrategy::WarmStart {
                    n_steps: args.warm_steps.unwrap_or(layers),
                }
            } else {
                InitStrategy::Random
            };
            let outcome =
                optimize_cd_ansatz(model, &spec, &init, &optimizer_config(&args.optimizer))?;
            let report = OptimizerReport::new(&outcome);
            Ok((outcome.circuit, Some(report)))
        }
    }
}

/// Solves the model exhaustively when small enough for it.
pub fn ground_truth(model: &IsingModel) -> Option<GroundStateSet> {
    if model.n() <= BRUTE_FORCE_LIMIT {
        brute_force_solve(model).ok()
    } else {
        None
    }
}

/// Scores a distribution against the model: success probability and, when
/// the ground energy is nonzero, approximation ratio.
pub fn score(
    model: &IsingModel,
    ground: Option<&GroundStateSet>,
    dist: &OutcomeDistribution,
) -> (Option<f64>, Option<f64>) {
    match ground {
        Some(g) => {
            let sp = success_probability(dist, g);
            let ar = approximation_ratio_with_ground(dist, model, g.energy).ok();
            (Some(sp), ar)
        }
        None => (None, None),
    }
}

/// Tabulates the `k` most likely outcomes with their energies and, for tour
/// problems, decoded city orders.
pub fn outcome_table(
    model: &IsingModel,
    tsp: Option<&TspInstance>,
    dist: &OutcomeDistribution,
    k: usize,
) -> Vec<OutcomeRow> {
    dist.top(k)
        .into_iter()
        .map(|(index, probability)| {
            let tour = tsp.and_then(|inst| dcqo_core::decode_tsp(index, inst.n()));
            let tour_length = tour
                .as_ref()
                .and_then(|order| tsp.expect("tour implies instance").tour_length(order).ok());
            OutcomeRow {
                bitstring: format_bitstring(index, model.n()),
                index,
                probability,
                energy: model.energy_of_index(index),
                tour,
                tour_length,
            }
        })
        .collect()
}

/// Runs the `solve` subcommand end to end.
pub fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let start = Instant::now();
    let problem = load_problem(&args.source, args.seed)?;
    let (raw, optimizer) = synthesize(&problem.model, args)?;
    let (circuit, cutoff) = apply_gate_cutoff(&raw, args.cutoff)?;
    let gate_counts = GateReport::new(&circuit)?;

    let state = run_circuit(&circuit)?;
    let dist = if args.shots == 0 {
        state.probabilities()
    } else {
        state.sample(args.shots, args.shot_seed)?
    };

    let ground = ground_truth(&problem.model);
    let (sp, ar) = score(&problem.model, ground.as_ref(), &dist);
    let mean_energy = dist.mean_energy(&problem.model)?;
    let top_outcomes = outcome_table(&problem.model, problem.tsp.as_ref(), &dist, args.top);

    let result = RunResult {
        command: serde_json::to_value(args)?,
        source: problem.source,
        model: problem.model,
        gate_counts,
        cutoff,
        ground_energy: ground.as_ref().map(|g| g.energy),
        ground_degeneracy: ground.as_ref().map(|g| g.degeneracy()),
        success_probability: sp,
        approximation_ratio: ar,
        mean_energy,
        shots: args.shots,
        top_outcomes,
        distribution: dist,
        optimizer,
        wall_time_s: start.elapsed().as_secs_f64(),
    };

    emit_json(args.out.as_deref(), &result)
}

/// Serializes `value` as pretty JSON to `path`, or to stdout when no path
/// was given. File writes are atomic: a temp file in the same directory is
/// renamed over the target, so readers never observe a half-written run.
pub fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit_text(path, &format!("{text}\n"))
}

/// Writes `text` to `path` atomically, or to stdout when no path was given.
pub fn emit_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
            let tmp = match dir {
                Some(d) => d.join(format!(
                    ".{}.tmp-{}",
                    path.file_name().unwrap_or_default().to_string_lossy(),
                    std::process::id()
                )),
                None => Path::new(&format!(
                    ".{}.tmp-{}",
                    path.display(),
                    std::process::id()
                ))
                .to_path_buf(),
            };
            let mut f = fs::File::create(&tmp)
                .with_context(|| format!("creating temp file {}", tmp.display()))?;
            f.write_all(text.as_bytes())
                .with_context(|| format!("writing {}", tmp.display()))?;
            f.sync_all().ok();
            fs::rename(&tmp, path)
                .with_context(|| format!("moving result into place at {}", path.display()))?;
            Ok(())
        }
    }
}
