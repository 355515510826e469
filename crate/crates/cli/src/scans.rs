//! Multi-run subcommands: evolution-time sweeps, algorithm comparisons, and
//! the classical decomposition solver.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use dcqo_core::{
    build_dcqo_circuit, build_dqa_circuit, count_gates, format_bitstring, lns_solve, lower_to_cx,
    optimize_cd_ansatz, optimize_qaoa, run_circuit, success_probability, AnsatzSpec, Circuit,
    DcqoVariant, GroundStateSet, InitStrategy, IsingModel, OptMethod, OptimizerConfig,
    OutcomeDistribution,
};

use crate::pipeline::{emit_json, emit_text, ground_truth, load_problem, score};
use crate::{usage_error, Algorithm, CompareArgs, LnsArgs, RegimeScanArgs};

/// `points` log-spaced values from `lo` to `hi` inclusive; a single point
/// collapses to `lo`.
fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            // Pin the endpoints so they survive the ln/exp round trip.
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

fn exact_distribution(c: &Circuit) -> Result<OutcomeDistribution> {
    Ok(run_circuit(c)?.probabilities())
}

/// `regime-scan`: tabulate success probability of the plain annealing
/// circuit, the full counterdiabatic circuit, and its gauge-only form over a
/// grid of total evolution times.
pub fn cmd_regime_scan(args: &RegimeScanArgs) -> Result<()> {
    if !(args.t_min.is_finite() && args.t_min > 0.0) {
        usage_error("--t-min must be a positive number");
    }
    if !(args.t_max.is_finite() && args.t_max >= args.t_min) {
        usage_error("--t-max must be at least --t-min");
    }
    if args.points == 0 {
        usage_error("--points must be at least 1");
    }
    if args.steps == 0 {
        usage_error("--steps must be at least 1");
    }

    let problem = load_problem(&args.source, args.seed)?;
    let m = &problem.model;
    let ground = ground_truth(m).context("time sweeps need an exhaustively solvable model")?;

    let times = log_spaced(args.t_min, args.t_max, args.points);
    let rows: Vec<(f64, &str, f64)> = times
        .par_iter()
        .map(|&t| -> Result<Vec<(f64, &str, f64)>> {
            let sp = |c: &Circuit| -> Result<f64> {
                Ok(success_probability(&exact_distribution(c)?, &ground))
            };
            Ok(vec![
                (t, "anneal", sp(&build_dqa_circuit(m, args.steps, t)?)?),
                (
                    t,
                    "full",
                    sp(&build_dcqo_circuit(m, args.steps, t, DcqoVariant::Full)?)?,
                ),
                (
                    t,
                    "cd-only",
                    sp(&build_dcqo_circuit(m, args.steps, t, DcqoVariant::CdOnly)?)?,
                ),
            ])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut csv = String::from("time,variant,success_probability\n");
    for (t, variant, sp) in &rows {
        let _ = writeln!(csv, "{t},{variant},{sp}");
    }
    emit_text(args.out.as_deref(), &csv)
}

/// One `compare` table row.
#[derive(Serialize, Clone)]
struct CompareRow {
    seed: u64,
    algorithm: String,
    two_qubit_cx: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    approximation_ratio: Option<f64>,
    mean_energy: f64,
}

fn algorithm_name(alg: Algorithm) -> &'static str {
    match alg {
        Algorithm::Dqa => "dqa",
        Algorithm::Dcqo => "dcqo",
        Algorithm::DcqoFull => "dcqo-full",
        Algorithm::Qaoa => "qaoa",
        Algorithm::Hdcqo => "hdcqo",
    }
}

fn compare_circuit(m: &IsingModel, alg: Algorithm, seed: u64, args: &CompareArgs) -> Result<Circuit> {
    let opt = |seed: u64| OptimizerConfig {
        method: OptMethod::NelderMead,
        max_iterations: args.optimizer.max_iters,
        tolerance: args.optimizer.tolerance,
        restarts: args.optimizer.restarts,
        seed,
    };
    match alg {
        Algorithm::Dqa => build_dqa_circuit(m, args.steps, args.time),
        Algorithm::Dcqo => build_dcqo_circuit(m, args.steps, args.time, DcqoVariant::CdOnly),
        Algorithm::DcqoFull => build_dcqo_circuit(m, args.steps, args.time, DcqoVariant::Full),
        Algorithm::Qaoa => Ok(optimize_qaoa(
            m,
            args.layers,
            &opt(args.optimizer.opt_seed.wrapping_add(seed)),
        )?
        .circuit),
        Algorithm::Hdcqo => {
            let spec = AnsatzSpec {
                variant: args.variant.to_core(),
                layers: args.layers,
            };
            let init = if args.warm {
                InitStrategy::WarmStart {
                    n_steps: args.layers,
                }
            } else {
                InitStrategy::Random
            };
            Ok(optimize_cd_ansatz(m, &spec, &init, &opt(args.optimizer.opt_seed.wrapping_add(seed)))?.circuit)
        }
    }
    .map_err(Into::into)
}

/// `compare`: per-instance quality metrics for several algorithms, as CSV
/// and optionally JSON.
pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    if args.steps == 0 {
        usage_error("--steps must be at least 1");
    }
    if args.layers == 0 {
        usage_error("--layers must be at least 1");
    }
    let start = Instant::now();

    // Ground truth once per seed, then fan the (seed, algorithm) grid out.
    let instances: Vec<(u64, IsingModel, Option<GroundStateSet>)> = args
        .seeds
        .iter()
        .map(|&seed| -> Result<_> {
            let problem = load_problem(&args.source, seed)?;
            let ground = ground_truth(&problem.model);
            Ok((seed, problem.model, ground))
        })
        .collect::<Result<Vec<_>>>()?;

    let grid: Vec<(usize, Algorithm)> = (0..instances.len())
        .flat_map(|i| args.algorithms.iter().map(move |&a| (i, a)))
        .collect();

    let rows: Vec<CompareRow> = grid
        .par_iter()
        .map(|&(i, alg)| -> Result<CompareRow> {
            let (seed, model, ground) = &instances[i];
            let circuit = compare_circuit(model, alg, *seed, args)?;
            let dist = exact_distribution(&circuit)?;
            let (sp, ar) = score(model, ground.as_ref(), &dist);
            Ok(CompareRow {
                seed: *seed,
                algorithm: algorithm_name(alg).to_string(),
                two_qubit_cx: count_gates(&lower_to_cx(&circuit)?).two_qubit,
                success_probability: sp,
                approximation_ratio: ar,
                mean_energy: dist.mean_energy(model)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv =
        String::from("seed,algorithm,two_qubit_cx,success_probability,approximation_ratio,mean_energy\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.seed,
            r.algorithm,
            r.two_qubit_cx,
            r.success_probability.map_or(String::new(), |v| v.to_string()),
            r.approximation_ratio.map_or(String::new(), |v| v.to_string()),
            r.mean_energy,
        );
    }
    emit_text(args.out_csv.as_deref(), &csv)?;

    if args.out_json.is_some() {
        let doc = serde_json::json!({
            "command": serde_json::to_value(args)?,
            "rows": rows,
            "wall_time_s": start.elapsed().as_secs_f64(),
        });
        emit_json(args.out_json.as_deref(), &doc)?;
    }
    Ok(())
}

/// `lns`: classical large-neighborhood search over a quadratic binary
/// program.
pub fn cmd_lns(args: &LnsArgs) -> Result<()> {
    let start = Instant::now();
    let problem = load_problem(&args.source, args.seed)?;
    let Some(qubo) = problem.qubo else {
        usage_error("lns needs a quadratic binary program (--tsp, --qubo, or --dense-qubo)");
    };

    let outcome = lns_solve(&qubo, args.group_size, args.strategy.to_core(), args.max_sweeps)?;
    let tour = problem
        .tsp
        .as_ref()
        .and_then(|inst| dcqo_core::decode_tsp(outcome.bits, inst.n()));

    let doc = serde_json::json!({
        "command": serde_json::to_value(args)?,
        "source": problem.source,
        "bitstring": format_bitstring(outcome.bits, qubo.n()),
        "index": outcome.bits,
        "value": outcome.value,
        "sweeps": outcome.sweeps,
        "trace": outcome.trace,
        "tour": tour,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    emit_json(args.out.as_deref(), &doc)
}
