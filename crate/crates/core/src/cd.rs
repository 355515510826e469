//! Annealing schedule, first-order counterdiabatic coefficient, and the
//! per-step rotation-angle table that circuit synthesis consumes.
//!
//! The interpolation schedule is the smooth ramp
//! `λ(u) = sin²((π/2)·sin²(π·u/2))` with `u = t/T ∈ [0, 1]`; its derivative
//! vanishes at both endpoints. Digitizing into `N` equal steps gives each
//! step `m ∈ 1..=N` the dimensionless weight
//! `w_m = λ̇(m·Δt)·Δt = (π²/(4N))·sin(π·m/N)·sin(π·sin²(π·m/(2N)))`,
//! which does not depend on the total time `T` — counterdiabatic-only
//! circuits are therefore identical for every `T`.
//!
//! The first-order counterdiabatic term acts through the operator pool
//! `Σ_i h_i·Y_i + Σ_{i<j} J_ij·(Y_i Z_j + Z_i Y_j)` scaled by a
//! model-dependent coefficient `α₁(λ) ≤ 0` obtained from a least-squares
//! condition; `α₁` is the ratio of two strictly positive model moments and
//! is undefined only for the all-zero model.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;

/// Schedule value `λ(u) = sin²((π/2)·sin²(π·u/2))` for `u ∈ [0, 1]`.
pub fn lambda(u: f64) -> f64 {
    let inner = (PI * u / 2.0).sin().powi(2);
    ((PI / 2.0) * inner).sin().powi(2)
}

/// Schedule derivative `dλ/du` at dimensionless time `u ∈ [0, 1]`.
pub fn lambda_slope(u: f64) -> f64 {
    let inner = (PI * u / 2.0).sin().powi(2);
    (PI * PI / 4.0) * (PI * u).sin() * (PI * inner).sin()
}

fn check_time(t: f64, total_time: f64) -> Result<()> {
    if total_time.is_nan() || total_time <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "total time must be positive, got {total_time}"
        )));
    }
    if !(0.0..=total_time).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside [0, {total_time}]"
        )));
    }
    Ok(())
}

/// Schedule value at physical time `t ∈ [0, T]`.
pub fn lambda_at(t: f64, total_time: f64) -> Result<f64> {
    check_time(t, total_time)?;
    Ok(lambda(t / total_time))
}

/// Schedule rate `dλ/dt` at physical time `t ∈ [0, T]`.
pub fn lambda_dot_at(t: f64, total_time: f64) -> Result<f64> {
    check_time(t, total_time)?;
    Ok(lambda_slope(t / total_time) / total_time)
}

fn check_step(step: usize, n_steps: usize) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("step count must be positive".into()));
    }
    if step == 0 || step > n_steps {
        return Err(Error::InvalidArgument(format!(
            "step {step} outside 1..={n_steps}"
        )));
    }
    Ok(())
}

/// Schedule value at the end of step `m` of `N`: `λ(m/N)`.
pub fn step_lambda(step: usize, n_steps: usize) -> f64 {
    lambda(step as f64 / n_steps as f64)
}

/// Dimensionless digitized step weight `w_m = λ̇(m·Δt)·Δt`. Independent of
/// the total evolution time; `w_N = 0` because the schedule flattens out.
pub fn step_weight(step: usize, n_steps: usize) -> f64 {
    let m = step as f64;
    let n = n_steps as f64;
    let inner = (PI * m / (2.0 * n)).sin().powi(2);
    (PI * PI / (4.0 * n)) * (PI * m / n).sin() * (PI * inner).sin()
}

/// Normalization moment for the first-order coefficient. Strictly positive
/// for any model with at least one nonzero field or coupling.
fn gamma(m: &IsingModel, lam: f64) -> f64 {
    let h = m.h();
    let sum_h2: f64 = h.iter().map(|v| v * v).sum();
    let sum_h4: f64 = h.iter().map(|v| v.powi(4)).sum();
    let sum_j2: f64 = m.couplings().map(|(_, v)| v * v).sum();
    let sum_j4: f64 = m.couplings().map(|(_, v)| v.powi(4)).sum();
    let cross_hj: f64 = m
        .couplings()
        .map(|((i, j), v)| (h[i] * h[i] + h[j] * h[j]) * v * v)
        .sum();

    // Pairs of distinct couplings sharing exactly one site, Σ J²·J'².
    // Accumulated per site: distinct couplings overlap in at most one site,
    // so summing (S_v² - Σ J⁴) / 2 over sites counts each pair once.
    let mut site_j2 = vec![0.0; m.n()];
    let mut site_j4 = vec![0.0; m.n()];
    for ((i, j), v) in m.couplings() {
        let v2 = v * v;
        site_j2[i] += v2;
        site_j2[j] += v2;
        site_j4[i] += v2 * v2;
        site_j4[j] += v2 * v2;
    }
    let shared_pairs: f64 = (0..m.n())
        .map(|v| 0.5 * (site_j2[v] * site_j2[v] - site_j4[v]))
        .sum();

    let mixing = (1.0 - lam).powi(2) * (sum_h2 + 8.0 * sum_j2);
    let problem = lam * lam * (sum_h4 + 2.0 * sum_j4 + 6.0 * cross_hj + 6.0 * shared_pairs);
    mixing + problem
}

/// First-order counterdiabatic coefficient
/// `α₁(λ) = -¼·(Σ h² + Σ J²) / γ(λ)`; always `≤ 0`, and an error for the
/// all-zero model where the normalization vanishes.
pub fn alpha1_at(m: &IsingModel, lam: f64) -> Result<f64> {
    if m.is_degenerate() {
        return Err(Error::DegenerateModel);
    }
    let h2: f64 = m.h().iter().map(|v| v * v).sum();
    let j2: f64 = m.couplings().map(|(_, v)| v * v).sum();
    let g = gamma(m, lam);
    debug_assert!(g > 0.0, "normalization must be positive for nonzero models");
    Ok(-0.25 * (h2 + j2) / g)
}

/// One Pauli word in the first-order counterdiabatic operator pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeWord {
    /// `Y` on one site.
    Y(usize),
    /// `Y ⊗ Z` on an ordered pair `(i, j)`, `i < j`.
    Yz(usize, usize),
    /// `Z ⊗ Y` on an ordered pair `(i, j)`, `i < j`.
    Zy(usize, usize),
}

/// A pool word together with its model weight (`h_i` or `J_ij`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeTerm {
    pub word: GaugeWord,
    pub weight: f64,
}

/// The first-order operator pool in emission order: `Y` terms by site,
/// then `YZ` and `ZY` for each coupling in lexicographic pair order.
/// Terms with exactly zero weight are omitted.
pub fn gauge_terms(m: &IsingModel) -> Vec<GaugeTerm> {
    let mut terms = Vec::new();
    for (i, &hi) in m.h().iter().enumerate() {
        if hi != 0.0 {
            terms.push(GaugeTerm {
                word: GaugeWord::Y(i),
                weight: hi,
            });
        }
    }
    for ((i, j), v) in m.couplings() {
        terms.push(GaugeTerm {
            word: GaugeWord::Yz(i, j),
            weight: v,
        });
        terms.push(GaugeTerm {
            word: GaugeWord::Zy(i, j),
            weight: v,
        });
    }
    terms
}

/// Rotation angles for one digitized counterdiabatic step.
///
/// With step weight `w_m` and coefficient `α₁(λ_m)`, every pool word `P`
/// with weight `c` is applied as `exp(-i·(w_m·(-2·α₁))·c·P)`, i.e. a
/// rotation gate with angle `2·prefactor·c` under the
/// `R(θ) = exp(-i·θ·P/2)` convention.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CdStepAngles {
    /// Step index, `1..=n_steps`.
    pub step: usize,
    /// Total step count of the digitization.
    pub n_steps: usize,
    /// Schedule value `λ(m/N)` the step is evaluated at.
    pub lambda: f64,
    /// Dimensionless step weight `w_m`.
    pub weight: f64,
    /// Coefficient `α₁(λ_m)`.
    pub alpha1: f64,
    /// `w_m · (-2·α₁)`; nonnegative, and the quantity step truncation
    /// thresholds against.
    pub prefactor: f64,
    /// `(site, gate angle)` for each nonzero field, in site order.
    pub one_body: Vec<(usize, f64)>,
    /// `((i, j), gate angle)` for each coupling, lexicographic, `i < j`.
    /// The same angle drives both the `YZ` and the `ZY` word of the pair.
    pub two_body: Vec<((usize, usize), f64)>,
}

/// Computes the rotation angles of one counterdiabatic Trotter step.
pub fn cd_step_angles(m: &IsingModel, step: usize, n_steps: usize) -> Result<CdStepAngles> {
    check_step(step, n_steps)?;
    let lam = step_lambda(step, n_steps);
    let weight = step_weight(step, n_steps);
    let alpha1 = alpha1_at(m, lam)?;
    let prefactor = weight * (-2.0 * alpha1);
    let one_body = m
        .h()
        .iter()
        .enumerate()
        .filter(|(_, &hi)| hi != 0.0)
        .map(|(i, &hi)| (i, 2.0 * prefactor * hi))
        .collect();
    let two_body = m
        .couplings()
        .map(|(pair, v)| (pair, 2.0 * prefactor * v))
        .collect();
    Ok(CdStepAngles {
        step,
        n_steps,
        lambda: lam,
        weight,
        alpha1,
        prefactor,
        one_body,
        two_body,
    })
}

/// Angle table for a full `N`-step digitization. Steps appear in order but
/// may be a subset of `1..=N` after truncation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepAngleTable {
    pub n_steps: usize,
    pub steps: Vec<CdStepAngles>,
}

/// Builds the step-angle table for all `N` steps of a digitization.
pub fn cd_step_table(m: &IsingModel, n_steps: usize) -> Result<StepAngleTable> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("step count must be positive".into()));
    }
    let steps = (1..=n_steps)
        .map(|s| cd_step_angles(m, s, n_steps))
        .collect::<Result<Vec<_>>>()?;
    Ok(StepAngleTable { n_steps, steps })
}

/// Bookkeeping for a step-truncation pass.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StepCutoffStats {
    pub threshold: f64,
    pub total: usize,
    pub kept: usize,
    pub dropped: usize,
}

/// Drops whole steps whose prefactor falls below `threshold`, preserving
/// the order of the survivors. A zero threshold keeps every step.
pub fn apply_step_cutoff(
    table: &StepAngleTable,
    threshold: f64,
) -> Result<(StepAngleTable, StepCutoffStats)> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step cutoff threshold must be nonnegative, got {threshold}"
        )));
    }
    let total = table.steps.len();
    let steps: Vec<CdStepAngles> = table
        .steps
        .iter()
        .filter(|s| s.prefactor >= threshold)
        .cloned()
        .collect();
    let kept = steps.len();
    Ok((
        StepAngleTable {
            n_steps: table.n_steps,
            steps,
        },
        StepCutoffStats {
            threshold,
            total,
            kept,
            dropped: total - kept,
        },
    ))
}
