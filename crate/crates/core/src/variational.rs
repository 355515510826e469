//! Derivative-free parameter optimization for the variational circuit
//! families: a Nelder–Mead simplex, a golden-section coordinate descent as
//! an independent cross-check, and seeded multi-restart drivers that
//! evaluate circuits on the exact simulator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_hdcqo_circuit, build_qaoa_circuit, warm_start_params, AnsatzSpec, Circuit};
use crate::error::{Error, Result};
use crate::ising::{IsingModel, OutcomeDistribution};
use crate::sim::{energy_table, run_circuit};

/// Which local optimizer drives a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptMethod {
    /// Nelder–Mead simplex with the standard reflection/expansion/
    /// contraction/shrink coefficients (1, 2, ½, ½).
    NelderMead,
    /// Cyclic golden-section line search over each coordinate.
    CoordinateDescent,
}

/// Optimizer settings shared by all drivers.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: OptMethod,
    /// Iteration budget per restart (simplex iterations or coordinate
    /// sweeps).
    pub max_iterations: usize,
    /// Relative convergence tolerance on the cost.
    pub tolerance: f64,
    /// Number of independent starts; the best final cost wins.
    pub restarts: usize,
    /// Seed for random parameter initialization (restart `r` derives its
    /// own generator from `seed + r`).
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: OptMethod::NelderMead,
            max_iterations: 600,
            tolerance: 1e-8,
            restarts: 1,
            seed: 0,
        }
    }
}

/// Outcome of one local optimization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    /// Iterations actually executed.
    pub iterations: usize,
    /// Cost-function evaluations.
    pub evaluations: usize,
    /// Whether the tolerance test triggered before the budget ran out.
    pub converged: bool,
    /// Best cost seen after each iteration (nonincreasing).
    pub cost_trace: Vec<f64>,
}

fn spread_converged(best: f64, worst: f64, tolerance: f64) -> bool {
    (worst - best).abs() <= tolerance * (1.0 + best.abs())
}

/// Minimizes `f` from `x0` with a Nelder–Mead simplex. The initial simplex
/// offsets each coordinate by 0.25 (an angle-sized step); iteration stops
/// when the simplex cost spread falls below the relative tolerance.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    max_iterations: usize,
    tolerance: f64,
) -> OptimizationResult {
    let n = x0.len();
    assert!(n > 0, "optimization needs at least one parameter");
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| -> f64 {
        *count += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += 0.25;
        simplex.push(p);
    }
    let mut costs: Vec<f64> = simplex
        .iter()
        .map(|p| eval(p, &mut evaluations))
        .collect();

    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    for _ in 0..max_iterations {
        // Order the simplex by cost (stable: equal costs keep insertion
        // order, so runs are deterministic).
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let recosts: Vec<f64> = order.iter().map(|&i| costs[i]).collect();
        simplex = reordered;
        costs = recosts;

        if spread_converged(costs[0], costs[n], tolerance) {
            converged = true;
            break;
        }
        iterations += 1;

        // Centroid of all but the worst point.
        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (c, &v) in centroid.iter_mut().zip(p) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }

        let worst = simplex[n].clone();
        let combine = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let reflected = combine(1.0);
        let f_r = eval(&reflected, &mut evaluations);

        if f_r < costs[0] {
            let expanded = combine(2.0);
            let f_e = eval(&expanded, &mut evaluations);
            if f_e < f_r {
                simplex[n] = expanded;
                costs[n] = f_e;
            } else {
                simplex[n] = reflected;
                costs[n] = f_r;
            }
        } else if f_r < costs[n - 1] {
            simplex[n] = reflected;
            costs[n] = f_r;
        } else {
            // Contract toward the centroid, outside or inside depending on
            // whether reflection beat the worst point.
            let (point, bound) = if f_r < costs[n] {
                (combine(0.5), f_r)
            } else {
                (combine(-0.5), costs[n])
            };
            let f_c = eval(&point, &mut evaluations);
            if f_c <= bound {
                simplex[n] = point;
                costs[n] = f_c;
            } else {
                // Shrink everything toward the best vertex.
                let best = simplex[0].clone();
                for k in 1..=n {
                    for (x, &b) in simplex[k].iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    costs[k] = eval(&simplex[k].clone(), &mut evaluations);
                }
            }
        }

        let best_now = costs.iter().cloned().fold(f64::INFINITY, f64::min);
        trace.push(trace.last().map_or(best_now, |&p: &f64| p.min(best_now)));
    }

    let mut best_idx = 0;
    for k in 1..=n {
        if costs[k] < costs[best_idx] {
            best_idx = k;
        }
    }
    OptimizationResult {
        best_params: simplex[best_idx].clone(),
        best_cost: costs[best_idx],
        iterations,
        evaluations,
        converged,
        cost_trace: trace,
    }
}

/// Golden-section search for the minimum of `g` on `[lo, hi]`.
fn golden_section(g: &mut dyn FnMut(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..iters {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = g(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes `f` by cyclic golden-section line searches, one coordinate at
/// a time over a `±π` window around the current value. An iteration is one
/// full sweep; convergence is relative improvement below tolerance.
pub fn coordinate_descent(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    max_iterations: usize,
    tolerance: f64,
) -> OptimizationResult {
    let n = x0.len();
    assert!(n > 0, "optimization needs at least one parameter");
    let mut evaluations = 0usize;
    let mut x = x0.to_vec();
    let mut best = f(&x);
    evaluations += 1;
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    for _ in 0..max_iterations {
        iterations += 1;
        let before = best;
        for i in 0..n {
            let center = x[i];
            let mut probe = x.clone();
            let mut g = |v: f64| -> f64 {
                probe[i] = v;
                evaluations += 1;
                f(&probe)
            };
            let v = golden_section(
                &mut g,
                center - std::f64::consts::PI,
                center + std::f64::consts::PI,
                40,
            );
            probe[i] = v;
            evaluations += 1;
            let fv = f(&probe);
            if fv < best {
                best = fv;
                x[i] = v;
            }
        }
        trace.push(best);
        if spread_converged(best, before, tolerance) {
            converged = true;
            break;
        }
    }

    OptimizationResult {
        best_params: x,
        best_cost: best,
        iterations,
        evaluations,
        converged,
        cost_trace: trace,
    }
}

/// Runs the configured method once from `x0`.
pub fn minimize(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    config: &OptimizerConfig,
) -> OptimizationResult {
    match config.method {
        OptMethod::NelderMead => nelder_mead(f, x0, config.max_iterations, config.tolerance),
        OptMethod::CoordinateDescent => {
            coordinate_descent(f, x0, config.max_iterations, config.tolerance)
        }
    }
}

// ---------------------------------------------------------------------------
// Circuit-level drivers
// ---------------------------------------------------------------------------

/// How restart 0 of a variational run is initialized. All later restarts
/// draw uniform angles in `(-π, π)` from the seeded generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitStrategy {
    /// Draw restart 0 randomly like every other restart.
    Random,
    /// Start restart 0 from the schedule-derived parameters of an `n_steps`
    /// digitization.
    WarmStart { n_steps: usize },
}

/// Result of a multi-restart variational run.
#[derive(Clone, Debug)]
pub struct VariationalOutcome {
    /// Local-optimization record of the winning restart.
    pub result: OptimizationResult,
    /// Final cost of every restart, in restart order.
    pub per_restart_costs: Vec<f64>,
    /// Index of the winning restart.
    pub best_restart: usize,
    /// Circuit at the winning parameters.
    pub circuit: Circuit,
    /// Exact outcome distribution of that circuit.
    pub distribution: OutcomeDistribution,
}

fn random_params(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

/// Multi-restart minimization of a circuit-valued objective. Restarts run
/// in parallel and the winner is chosen deterministically (lowest cost,
/// ties by restart index).
fn optimize_circuit<F>(
    m: &IsingModel,
    param_count: usize,
    build: F,
    init: &InitStrategy,
    warm: Option<Vec<f64>>,
    config: &OptimizerConfig,
) -> Result<VariationalOutcome>
where
    F: Fn(&[f64]) -> Result<Circuit> + Sync,
{
    if config.restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    if param_count == 0 {
        return Err(Error::InvalidArgument("ansatz has no parameters".into()));
    }
    let energies = energy_table(m)?;

    let runs: Vec<OptimizationResult> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let x0 = match (restart, init) {
                (0, InitStrategy::WarmStart { .. }) => {
                    warm.clone().expect("warm parameters prepared by caller")
                }
                _ => random_params(param_count, config.seed.wrapping_add(restart as u64)),
            };
            let mut cost = |params: &[f64]| -> f64 {
                let circuit = build(params).expect("parameter count fixed by driver");
                let state = run_circuit(&circuit).expect("width fixed by driver");
                state.expectation_with_table(&energies)
            };
            minimize(&mut cost, &x0, config)
        })
        .collect();

    let mut best_restart = 0usize;
    for (k, run) in runs.iter().enumerate() {
        if run.best_cost < runs[best_restart].best_cost {
            best_restart = k;
        }
    }
    let per_restart_costs = runs.iter().map(|r| r.best_cost).collect();
    let result = runs.into_iter().nth(best_restart).expect("nonempty runs");
    let circuit = build(&result.best_params)?;
    let distribution = run_circuit(&circuit)?.probabilities();
    Ok(VariationalOutcome {
        result,
        per_restart_costs,
        best_restart,
        circuit,
        distribution,
    })
}

/// Optimizes the parameterized counterdiabatic ansatz for a model.
pub fn optimize_cd_ansatz(
    m: &IsingModel,
    spec: &AnsatzSpec,
    init: &InitStrategy,
    config: &OptimizerConfig,
) -> Result<VariationalOutcome> {
    let warm = match *init {
        InitStrategy::WarmStart { n_steps } => Some(warm_start_params(m, spec, n_steps)?),
        InitStrategy::Random => None,
    };
    let count = spec.param_count(m.n());
    optimize_circuit(m, count, |p| build_hdcqo_circuit(m, spec, p), init, warm, config)
}

/// Optimizes the alternating-operator ansatz for a model. Initialization is
/// always random.
pub fn optimize_qaoa(
    m: &IsingModel,
    layers: usize,
    config: &OptimizerConfig,
) -> Result<VariationalOutcome> {
    if layers == 0 {
        return Err(Error::InvalidArgument("layer count must be positive".into()));
    }
    optimize_circuit(
        m,
        2 * layers,
        |p| build_qaoa_circuit(m, layers, p),
        &InitStrategy::Random,
        None,
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::AnsatzVariant;
    use crate::ising::{brute_force_solve, random_spin_glass, success_probability};

    fn sphere(center: &[f64]) -> impl FnMut(&[f64]) -> f64 + '_ {
        move |x: &[f64]| {
            x.iter()
                .zip(center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        }
    }

    #[test]
    fn nelder_mead_minimizes_a_quadratic() {
        let center = vec![0.3, -1.2, 2.0];
        let mut f = sphere(&center);
        let r = nelder_mead(&mut f, &[0.0, 0.0, 0.0], 500, 1e-12);
        assert!(r.converged);
        assert!(r.best_cost < 1e-9, "cost {}", r.best_cost);
        for (a, b) in r.best_params.iter().zip(&center) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn nelder_mead_handles_a_curved_valley() {
        // Classic banana valley from the standard starting point.
        let mut f = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        };
        let r = nelder_mead(&mut f, &[-1.2, 1.0], 2000, 1e-14);
        assert!(r.best_cost < 1e-8, "cost {}", r.best_cost);
        assert!((r.best_params[0] - 1.0).abs() < 1e-3);
        assert!((r.best_params[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn trace_is_nonincreasing_and_counts_are_consistent() {
        let mut f = sphere(&[1.0, 1.0]);
        let r = nelder_mead(&mut f, &[3.0, -3.0], 200, 1e-10);
        assert!(r.cost_trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(r.evaluations >= r.iterations);
        assert_eq!(r.cost_trace.len(), r.iterations);
    }

    #[test]
    fn coordinate_descent_solves_separable_problems() {
        let center = vec![0.5, -0.25, 1.5, 2.5];
        let mut f = sphere(&center);
        let r = coordinate_descent(&mut f, &[0.0; 4], 50, 1e-12);
        assert!(r.converged);
        assert!(r.best_cost < 1e-10, "cost {}", r.best_cost);
    }

    #[test]
    fn both_methods_agree_on_a_smooth_bowl() {
        let center = vec![-0.7, 0.9];
        let mut f1 = sphere(&center);
        let mut f2 = sphere(&center);
        let a = nelder_mead(&mut f1, &[2.0, 2.0], 400, 1e-12);
        let b = coordinate_descent(&mut f2, &[2.0, 2.0], 60, 1e-12);
        for (x, y) in a.best_params.iter().zip(&b.best_params) {
            assert!((x - y).abs() < 1e-3, "methods disagree: {x} vs {y}");
        }
    }

    #[test]
    fn optimization_is_deterministic() {
        let m = random_spin_glass(4, 3).unwrap();
        let spec = AnsatzSpec { variant: AnsatzVariant::TwoParam, layers: 1 };
        let config = OptimizerConfig {
            max_iterations: 80,
            restarts: 3,
            seed: 17,
            ..OptimizerConfig::default()
        };
        let a = optimize_cd_ansatz(&m, &spec, &InitStrategy::Random, &config).unwrap();
        let b = optimize_cd_ansatz(&m, &spec, &InitStrategy::Random, &config).unwrap();
        assert_eq!(a.result.best_cost, b.result.best_cost);
        assert_eq!(a.result.best_params, b.result.best_params);
        assert_eq!(a.best_restart, b.best_restart);
        assert_eq!(a.per_restart_costs, b.per_restart_costs);
    }

    #[test]
    fn more_restarts_never_hurt() {
        let m = random_spin_glass(4, 8).unwrap();
        let one = OptimizerConfig {
            max_iterations: 60,
            restarts: 1,
            seed: 5,
            ..OptimizerConfig::default()
        };
        let four = OptimizerConfig { restarts: 4, ..one };
        let a = optimize_qaoa(&m, 1, &one).unwrap();
        let b = optimize_qaoa(&m, 1, &four).unwrap();
        assert!(b.result.best_cost <= a.result.best_cost + 1e-12);
        assert_eq!(b.per_restart_costs.len(), 4);
        assert_eq!(b.per_restart_costs[0], a.per_restart_costs[0]);
    }

    #[test]
    fn warm_start_beats_its_own_initialization() {
        let m = random_spin_glass(5, 21).unwrap();
        let spec = AnsatzSpec { variant: AnsatzVariant::TwoParam, layers: 2 };
        let warm = warm_start_params(&m, &spec, 3).unwrap();
        let energies = energy_table(&m).unwrap();
        let warm_cost = {
            let c = build_hdcqo_circuit(&m, &spec, &warm).unwrap();
            run_circuit(&c).unwrap().expectation_with_table(&energies)
        };
        let config = OptimizerConfig {
            max_iterations: 150,
            ..OptimizerConfig::default()
        };
        let out =
            optimize_cd_ansatz(&m, &spec, &InitStrategy::WarmStart { n_steps: 3 }, &config)
                .unwrap();
        assert!(out.result.best_cost <= warm_cost + 1e-12);
        let g = brute_force_solve(&m).unwrap();
        // The optimized state should retain meaningful ground support.
        assert!(success_probability(&out.distribution, &g) > 0.05);
    }

    #[test]
    fn driver_rejects_degenerate_setups() {
        let m = random_spin_glass(3, 0).unwrap();
        let bad = OptimizerConfig { restarts: 0, ..OptimizerConfig::default() };
        assert!(optimize_qaoa(&m, 1, &bad).is_err());
        assert!(optimize_qaoa(&m, 0, &OptimizerConfig::default()).is_err());
        let spec = AnsatzSpec { variant: AnsatzVariant::TwoParam, layers: 4 };
        assert!(optimize_cd_ansatz(
            &m,
            &spec,
            &InitStrategy::WarmStart { n_steps: 2 },
            &OptimizerConfig::default()
        )
        .is_err());
    }
}
