//! Synthesis, compression, and exact simulation of digitized-annealing and
//! counterdiabatic quantum-optimization circuits for quadratic binary
//! problems.
//!
//! The crate is organized as a pipeline:
//!
//! 1. [`ising`] — problem representations: quadratic binary programs
//!    ([`QuboProblem`]), their spin form ([`IsingModel`]), exhaustive
//!    solvers, outcome distributions, and quality metrics.
//! 2. [`cd`] — the evolution schedule, its step weights, and the
//!    first-order counterdiabatic coefficient and operator pool.
//! 3. [`circuit`] — gate-level synthesis of the four circuit families
//!    (digitized annealing, digitized counterdiabatic evolution, the
//!    alternating-operator ansatz, and the parameterized counterdiabatic
//!    ansatz), plus angle-threshold compression and a text format.
//! 4. [`lower`] — compilation of the abstract two-body rotations into a
//!    CX-based or trapped-ion-native (Mølmer–Sørensen) gate set.
//! 5. [`sim`] — a dense statevector simulator with fast paths for the
//!    diagonal and signed-Y rotations, plus exact continuous-time
//!    reference evolution.
//! 6. [`variational`] — derivative-free optimizers and multi-restart
//!    drivers for the parameterized families.
//! 7. [`problems`] — traveling-salesperson encoding, reproducible random
//!    instances, and a decomposition-based large-neighborhood-search
//!    solver.
//!
//! Bit conventions used throughout: binary variable `k` of an outcome index
//! lives at bit `k` (`x_k = (index >> k) & 1`), bit value `0` maps to spin
//! `+1`, and a bitstring's `k`-th character is variable `k`.

pub mod cd;
pub mod circuit;
pub mod error;
pub mod ising;
pub mod lower;
pub mod problems;
pub mod sim;
pub mod variational;

pub use error::{Error, Result};

pub use ising::{
    approximation_ratio, approximation_ratio_with_ground, brute_force_solve, energy_spectrum,
    format_bitstring, parse_bitstring, qubo_to_ising, random_spin_glass, read_qubo_text,
    success_probability, write_qubo_text, GroundStateSet, IsingModel, OutcomeDistribution,
    QuboProblem,
};

pub use cd::{
    alpha1_at, apply_step_cutoff, cd_step_angles, cd_step_table, gauge_terms, lambda, lambda_at,
    lambda_dot_at, lambda_slope, step_lambda, step_weight, CdStepAngles, GaugeTerm, GaugeWord,
    StepAngleTable, StepCutoffStats,
};

pub use circuit::{
    apply_gate_cutoff, build_dcqo_circuit, build_dcqo_from_table, build_dqa_circuit,
    build_hdcqo_circuit, build_qaoa_circuit, circuit_from_text, circuit_to_text, count_gates,
    fold_angle, warm_start_params, AnsatzSpec, AnsatzVariant, Circuit, CircuitMetadata,
    DcqoVariant, Gate, GateCounts, GateCutoffStats,
};

pub use lower::{lower_to_cx, lower_to_ms};

pub use sim::{
    dense_unitary, energy_table, exact_evolve, run_circuit, unitaries_equal_up_to_phase,
    EvolveVariant, StateVector,
};

pub use variational::{
    coordinate_descent, minimize, nelder_mead, optimize_cd_ansatz, optimize_qaoa, InitStrategy,
    OptMethod, OptimizationResult, OptimizerConfig, VariationalOutcome,
};

pub use problems::{
    brute_force_qubo, decode_tsp, decompose_qubo, dense_qubo_instance, encode_tour,
    greedy_descent, lns_solve, tsp_to_qubo, DecomposeStrategy, LnsOutcome, SubProblem,
    TspInstance,
};
