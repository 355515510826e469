//! Quantum-circuit representation and synthesis.
//!
//! Circuits here are flat gate lists over a fixed qubit count. Four circuit
//! families are synthesized from an Ising model:
//!
//! * **Digitized annealing** (`build_dqa_circuit`): first-order Trotter
//!   steps of the interpolating Hamiltonian
//!   `H(λ) = (1-λ)·(-Σ X_i) + λ·(Σ h_i Z_i + Σ J_ij Z_i Z_j)`.
//! * **Digitized counterdiabatic evolution** (`build_dcqo_circuit`): either
//!   the annealing steps augmented with the first-order counterdiabatic
//!   term (`Full`) or the counterdiabatic term alone (`CdOnly`), whose gate
//!   angles are independent of the total evolution time.
//! * **Alternating-operator ansatz** (`build_qaoa_circuit`): cost and mixer
//!   layers with free angles.
//! * **Parameterized counterdiabatic ansatz** (`build_hdcqo_circuit`): the
//!   counterdiabatic gate pattern with layer-level free parameters that can
//!   be warm-started from the digitized schedule.
//!
//! All builders open with a Hadamard layer that prepares the uniform
//! superposition (the ground state of the mixer), emit one-body gates in
//! site order and two-body gates in lexicographic pair order, and emit a
//! gate whenever the corresponding model term is structurally present —
//! even when a particular step's angle works out to zero — so circuit
//! shape depends only on the model, not on parameter values.

use serde::{Deserialize, Serialize};

use crate::cd::{cd_step_table, step_lambda, CdStepAngles, StepAngleTable};
use crate::error::{Error, Result};
use crate::ising::IsingModel;

/// One gate. Rotation gates follow the `R_P(θ) = exp(-i·θ·P/2)` convention;
/// `Gpi`, `Gpi2`, and `Ms` are the trapped-ion native set
/// (`GPI(φ)`, `GPI2(φ)`, and the two-qubit Mølmer–Sørensen interaction).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H { q: usize },
    Rx { q: usize, theta: f64 },
    Ry { q: usize, theta: f64 },
    Rz { q: usize, theta: f64 },
    /// Ion-native π pulse: `GPI(φ) = [[0, e^{-iφ}], [e^{iφ}, 0]]`.
    Gpi { q: usize, phi: f64 },
    /// Ion-native π/2 pulse:
    /// `GPI2(φ) = (1/√2)·[[1, -i·e^{-iφ}], [-i·e^{iφ}, 1]]`.
    Gpi2 { q: usize, phi: f64 },
    Cx { control: usize, target: usize },
    /// `exp(-i·θ·Z_a Z_b / 2)`.
    Rzz { a: usize, b: usize, theta: f64 },
    /// `exp(-i·θ·Y_a Z_b / 2)` — `Y` acts on `a`, `Z` on `b`.
    Ryz { a: usize, b: usize, theta: f64 },
    /// `exp(-i·θ·Z_a Y_b / 2)` — `Z` acts on `a`, `Y` on `b`.
    Rzy { a: usize, b: usize, theta: f64 },
    /// `exp(-i·θ·Y_a Y_b / 2)`.
    Ryy { a: usize, b: usize, theta: f64 },
    /// `MS(φ₀, φ₁, θ) = exp(-i·(θ/2)·A(φ₀) ⊗ A(φ₁))` with
    /// `A(φ) = cos(φ)·X + sin(φ)·Y` (first factor on `a`, second on `b`).
    Ms { a: usize, b: usize, phi0: f64, phi1: f64, theta: f64 },
}

impl Gate {
    /// The qubits the gate touches: `(first, Some(second))` for two-qubit
    /// gates.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H { q }
            | Gate::Rx { q, .. }
            | Gate::Ry { q, .. }
            | Gate::Rz { q, .. }
            | Gate::Gpi { q, .. }
            | Gate::Gpi2 { q, .. } => (q, None),
            Gate::Cx { control, target } => (control, Some(target)),
            Gate::Rzz { a, b, .. }
            | Gate::Ryz { a, b, .. }
            | Gate::Rzy { a, b, .. }
            | Gate::Ryy { a, b, .. }
            | Gate::Ms { a, b, .. } => (a, Some(b)),
        }
    }

    /// Whether the gate touches two qubits.
    pub fn is_two_qubit(&self) -> bool {
        self.qubits().1.is_some()
    }

    /// The rotation angle for angle-parameterized Pauli rotations; `None`
    /// for fixed gates (`H`, `CX`) and ion-native pulses.
    pub fn rotation_angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { theta, .. }
            | Gate::Ry { theta, .. }
            | Gate::Rz { theta, .. }
            | Gate::Rzz { theta, .. }
            | Gate::Ryz { theta, .. }
            | Gate::Rzy { theta, .. }
            | Gate::Ryy { theta, .. } => Some(theta),
            _ => None,
        }
    }

    /// Lower-case kind tag used by counting and the text format.
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::H { .. } => "h",
            Gate::Rx { .. } => "rx",
            Gate::Ry { .. } => "ry",
            Gate::Rz { .. } => "rz",
            Gate::Gpi { .. } => "gpi",
            Gate::Gpi2 { .. } => "gpi2",
            Gate::Cx { .. } => "cx",
            Gate::Rzz { .. } => "rzz",
            Gate::Ryz { .. } => "ryz",
            Gate::Rzy { .. } => "rzy",
            Gate::Ryy { .. } => "ryy",
            Gate::Ms { .. } => "ms",
        }
    }
}

/// A fixed-width, ordered gate list.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    /// An empty circuit over `width` qubits.
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
        }
    }

    /// Number of qubits.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Gate list in application order.
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of gates.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    /// Whether the circuit holds no gates.
    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate. Panics on out-of-range or coincident qubits; these
    /// are programming errors, not data errors.
    pub fn push(&mut self, gate: Gate) {
        let (q0, q1) = gate.qubits();
        assert!(q0 < self.width, "qubit {q0} out of range for width {}", self.width);
        if let Some(q1) = q1 {
            assert!(q1 < self.width, "qubit {q1} out of range for width {}", self.width);
            assert_ne!(q0, q1, "two-qubit gate needs distinct qubits");
        }
        self.gates.push(gate);
    }

    fn push_h_layer(&mut self) {
        for q in 0..self.width {
            self.push(Gate::H { q });
        }
    }
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

fn check_synthesis_args(n_steps: usize, total_time: f64) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("step count must be positive".into()));
    }
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "total time must be positive and finite, got {total_time}"
        )));
    }
    Ok(())
}

/// Emits one first-order Trotter step of the interpolating Hamiltonian:
/// a mixer `RX` layer, then `RZ` for fields, then `RZZ` for couplings.
fn push_annealing_step(c: &mut Circuit, m: &IsingModel, lam: f64, dt: f64) {
    for q in 0..m.n() {
        c.push(Gate::Rx {
            q,
            theta: -2.0 * dt * (1.0 - lam),
        });
    }
    for (q, &hq) in m.h().iter().enumerate() {
        if hq != 0.0 {
            c.push(Gate::Rz {
                q,
                theta: 2.0 * dt * lam * hq,
            });
        }
    }
    for ((a, b), j) in m.couplings() {
        c.push(Gate::Rzz {
            a,
            b,
            theta: 2.0 * dt * lam * j,
        });
    }
}

/// Emits the counterdiabatic gate block of one step: `RY` per field in site
/// order, then `RYZ` and `RZY` per coupling in lexicographic order.
fn push_cd_step(c: &mut Circuit, angles: &CdStepAngles) {
    for &(q, theta) in &angles.one_body {
        c.push(Gate::Ry { q, theta });
    }
    for &((a, b), theta) in &angles.two_body {
        c.push(Gate::Ryz { a, b, theta });
        c.push(Gate::Rzy { a, b, theta });
    }
}

/// Digitized quantum annealing: a Hadamard layer, then `N` Trotter steps of
/// the interpolating Hamiltonian with step size `Δt = T/N` evaluated at the
/// end-of-step schedule values `λ(m/N)`.
pub fn build_dqa_circuit(m: &IsingModel, n_steps: usize, total_time: f64) -> Result<Circuit> {
    check_synthesis_args(n_steps, total_time)?;
    let dt = total_time / n_steps as f64;
    let mut c = Circuit::new(m.n());
    c.push_h_layer();
    for step in 1..=n_steps {
        push_annealing_step(&mut c, m, step_lambda(step, n_steps), dt);
    }
    Ok(c)
}

/// Which parts of the digitized counterdiabatic evolution to synthesize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DcqoVariant {
    /// Annealing steps plus the counterdiabatic term (first-order split:
    /// within each step the annealing gates precede the counterdiabatic
    /// gates).
    Full,
    /// Only the counterdiabatic term. Gate angles are dimensionless, so
    /// the synthesized circuit is the same for every total time.
    CdOnly,
}

/// Digitized counterdiabatic evolution for a precomputed (possibly
/// truncated) step-angle table. `Full` emits the annealing gates of exactly
/// the steps present in the table.
pub fn build_dcqo_from_table(
    m: &IsingModel,
    table: &StepAngleTable,
    total_time: f64,
    variant: DcqoVariant,
) -> Result<Circuit> {
    check_synthesis_args(table.n_steps, total_time)?;
    let dt = total_time / table.n_steps as f64;
    let mut c = Circuit::new(m.n());
    c.push_h_layer();
    for angles in &table.steps {
        if variant == DcqoVariant::Full {
            push_annealing_step(&mut c, m, angles.lambda, dt);
        }
        push_cd_step(&mut c, angles);
    }
    Ok(c)
}

/// Digitized counterdiabatic evolution over `N` steps.
pub fn build_dcqo_circuit(
    m: &IsingModel,
    n_steps: usize,
    total_time: f64,
    variant: DcqoVariant,
) -> Result<Circuit> {
    check_synthesis_args(n_steps, total_time)?;
    let table = cd_step_table(m, n_steps)?;
    build_dcqo_from_table(m, &table, total_time, variant)
}

/// Alternating-operator ansatz with `layers` repetitions. Parameters are
/// `[γ_1, β_1, …, γ_p, β_p]`; each layer applies `RZZ(2γJ)` per coupling,
/// `RZ(2γh)` per field, then the mixer `RX(2β)` on every qubit.
pub fn build_qaoa_circuit(m: &IsingModel, layers: usize, params: &[f64]) -> Result<Circuit> {
    if layers == 0 {
        return Err(Error::InvalidArgument("layer count must be positive".into()));
    }
    if params.len() != 2 * layers {
        return Err(Error::ParameterCountMismatch {
            expected: 2 * layers,
            actual: params.len(),
        });
    }
    let mut c = Circuit::new(m.n());
    c.push_h_layer();
    for l in 0..layers {
        let (gamma, beta) = (params[2 * l], params[2 * l + 1]);
        for ((a, b), j) in m.couplings() {
            c.push(Gate::Rzz {
                a,
                b,
                theta: 2.0 * gamma * j,
            });
        }
        for (q, &hq) in m.h().iter().enumerate() {
            if hq != 0.0 {
                c.push(Gate::Rz {
                    q,
                    theta: 2.0 * gamma * hq,
                });
            }
        }
        for q in 0..m.n() {
            c.push(Gate::Rx {
                q,
                theta: 2.0 * beta,
            });
        }
    }
    Ok(c)
}

/// Parameter sharing scheme of the counterdiabatic ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnsatzVariant {
    /// One one-body angle and one two-body angle per layer (`2p` params).
    TwoParam,
    /// An independent one-body angle per site plus a shared two-body angle
    /// per layer (`(n+1)·p` params).
    PerSite,
    /// Same parameter layout as [`AnsatzVariant::PerSite`] but the two-body
    /// pool keeps only the `Z⊗Y` words, halving two-qubit depth.
    PerSiteZyOnly,
}

/// An ansatz family with its depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub variant: AnsatzVariant,
    pub layers: usize,
}

impl AnsatzSpec {
    /// Number of free parameters for a problem over `n` qubits.
    pub fn param_count(&self, n: usize) -> usize {
        match self.variant {
            AnsatzVariant::TwoParam => 2 * self.layers,
            AnsatzVariant::PerSite | AnsatzVariant::PerSiteZyOnly => (n + 1) * self.layers,
        }
    }
}

/// Parameterized counterdiabatic ansatz.
///
/// Layer `l` applies `RY(2·α_{l,i}·h_i)` on each site with a nonzero field
/// and then, per coupling, `RYZ(2·β_l·J_ij)` followed by `RZY(2·β_l·J_ij)`
/// (the `Z⊗Y`-only variant skips the `RYZ` words). For `TwoParam` the layer
/// parameters are `(α_l, β_l)`; for the per-site variants they are
/// `(α_{l,0}, …, α_{l,n-1}, β_l)`.
pub fn build_hdcqo_circuit(m: &IsingModel, spec: &AnsatzSpec, params: &[f64]) -> Result<Circuit> {
    if spec.layers == 0 {
        return Err(Error::InvalidArgument("layer count must be positive".into()));
    }
    let expected = spec.param_count(m.n());
    if params.len() != expected {
        return Err(Error::ParameterCountMismatch {
            expected,
            actual: params.len(),
        });
    }
    let per_layer = expected / spec.layers;
    let mut c = Circuit::new(m.n());
    c.push_h_layer();
    for l in 0..spec.layers {
        let chunk = &params[l * per_layer..(l + 1) * per_layer];
        let (alpha_of, beta): (Box<dyn Fn(usize) -> f64>, f64) = match spec.variant {
            AnsatzVariant::TwoParam => (Box::new(move |_| chunk[0]), chunk[1]),
            AnsatzVariant::PerSite | AnsatzVariant::PerSiteZyOnly => {
                (Box::new(move |q| chunk[q]), chunk[per_layer - 1])
            }
        };
        for (q, &hq) in m.h().iter().enumerate() {
            if hq != 0.0 {
                c.push(Gate::Ry {
                    q,
                    theta: 2.0 * alpha_of(q) * hq,
                });
            }
        }
        for ((a, b), j) in m.couplings() {
            if spec.variant != AnsatzVariant::PerSiteZyOnly {
                c.push(Gate::Ryz {
                    a,
                    b,
                    theta: 2.0 * beta * j,
                });
            }
            c.push(Gate::Rzy {
                a,
                b,
                theta: 2.0 * beta * j,
            });
        }
    }
    Ok(c)
}

/// Schedule-derived initial parameters for the counterdiabatic ansatz:
/// layer `l` receives the step prefactor `w_l·(-2·α₁(λ_l))` of an `N`-step
/// digitization (every slot of a layer gets the same value). Requires
/// `layers ≤ n_steps`. With `layers == n_steps` the warm-started ansatz
/// reproduces the digitized counterdiabatic circuit gate for gate.
pub fn warm_start_params(m: &IsingModel, spec: &AnsatzSpec, n_steps: usize) -> Result<Vec<f64>> {
    if spec.layers == 0 {
        return Err(Error::InvalidArgument("layer count must be positive".into()));
    }
    if spec.layers > n_steps {
        return Err(Error::InvalidArgument(format!(
            "warm start needs at least as many steps as layers ({} > {n_steps})",
            spec.layers
        )));
    }
    let table = cd_step_table(m, n_steps)?;
    let per_layer = spec.param_count(m.n()) / spec.layers;
    let mut params = Vec::with_capacity(spec.param_count(m.n()));
    for l in 0..spec.layers {
        let c = table.steps[l].prefactor;
        params.extend(std::iter::repeat_n(c, per_layer));
    }
    Ok(params)
}

// ---------------------------------------------------------------------------
// Cutoff and counting
// ---------------------------------------------------------------------------

/// Folds an angle into `(-π, π]`.
pub fn fold_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(std::f64::consts::TAU);
    if t > std::f64::consts::PI {
        t - std::f64::consts::TAU
    } else {
        t
    }
}

/// Bookkeeping for a gate-truncation pass.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GateCutoffStats {
    pub threshold: f64,
    pub removed: usize,
    pub retained: usize,
}

/// Removes Pauli-rotation gates whose angle, folded into `(-π, π]`, has
/// magnitude below `threshold`. Fixed gates and ion-native pulses always
/// survive; a zero threshold leaves the circuit unchanged.
pub fn apply_gate_cutoff(c: &Circuit, threshold: f64) -> Result<(Circuit, GateCutoffStats)> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gate cutoff threshold must be nonnegative, got {threshold}"
        )));
    }
    let mut out = Circuit::new(c.width());
    let mut removed = 0usize;
    for &g in c.gates() {
        let drop = match g.rotation_angle() {
            Some(theta) => fold_angle(theta).abs() < threshold,
            None => false,
        };
        if drop {
            removed += 1;
        } else {
            out.push(g);
        }
    }
    let retained = out.len();
    Ok((
        out,
        GateCutoffStats {
            threshold,
            removed,
            retained,
        },
    ))
}

/// Gate totals by kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateCounts {
    pub total: usize,
    pub two_qubit: usize,
    pub by_kind: std::collections::BTreeMap<String, usize>,
}

/// Counts gates by kind and arity.
pub fn count_gates(c: &Circuit) -> GateCounts {
    let mut by_kind = std::collections::BTreeMap::new();
    let mut two_qubit = 0usize;
    for g in c.gates() {
        *by_kind.entry(g.kind().to_string()).or_insert(0) += 1;
        if g.is_two_qubit() {
            two_qubit += 1;
        }
    }
    GateCounts {
        total: c.len(),
        two_qubit,
        by_kind,
    }
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Writes the line-oriented circuit format: a `qubits n` header, then one
/// gate per line as `kind qubit… param…`. Floats print in Rust's shortest
/// round-trip form, so parsing the output reproduces the circuit exactly.
pub fn circuit_to_text(c: &Circuit) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "qubits {}", c.width());
    for g in c.gates() {
        let _ = match *g {
            Gate::H { q } => writeln!(out, "h {q}"),
            Gate::Rx { q, theta } => writeln!(out, "rx {q} {theta}"),
            Gate::Ry { q, theta } => writeln!(out, "ry {q} {theta}"),
            Gate::Rz { q, theta } => writeln!(out, "rz {q} {theta}"),
            Gate::Gpi { q, phi } => writeln!(out, "gpi {q} {phi}"),
            Gate::Gpi2 { q, phi } => writeln!(out, "gpi2 {q} {phi}"),
            Gate::Cx { control, target } => writeln!(out, "cx {control} {target}"),
            Gate::Rzz { a, b, theta } => writeln!(out, "rzz {a} {b} {theta}"),
            Gate::Ryz { a, b, theta } => writeln!(out, "ryz {a} {b} {theta}"),
            Gate::Rzy { a, b, theta } => writeln!(out, "rzy {a} {b} {theta}"),
            Gate::Ryy { a, b, theta } => writeln!(out, "ryy {a} {b} {theta}"),
            Gate::Ms { a, b, phi0, phi1, theta } => {
                writeln!(out, "ms {a} {b} {phi0} {phi1} {theta}")
            }
        };
    }
    out
}

/// Parses the text format produced by [`circuit_to_text`]. `#` starts a
/// comment; blank lines are ignored; the first significant line must be the
/// `qubits n` header.
pub fn circuit_from_text(input: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;

    fn parse_usize(tok: &str, line: usize) -> Result<usize> {
        tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad qubit index {tok:?}"),
        })
    }
    fn parse_f64(tok: &str, line: usize) -> Result<f64> {
        tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad parameter {tok:?}"),
        })
    }

    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        match circuit {
            None => {
                if toks.len() != 2 || toks[0] != "qubits" {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected `qubits n` header, found {text:?}"),
                    });
                }
                let width = parse_usize(toks[1], line)?;
                if width == 0 {
                    return Err(Error::Parse {
                        line,
                        message: "width must be positive".into(),
                    });
                }
                circuit = Some(Circuit::new(width));
            }
            Some(ref mut c) => {
                let args = &toks[1..];
                let need = |n: usize| -> Result<()> {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(Error::Parse {
                            line,
                            message: format!(
                                "{} expects {n} arguments, found {}",
                                toks[0],
                                args.len()
                            ),
                        })
                    }
                };
                let gate = match toks[0] {
                    "h" => {
                        need(1)?;
                        Gate::H { q: parse_usize(args[0], line)? }
                    }
                    "rx" | "ry" | "rz" | "gpi" | "gpi2" => {
                        need(2)?;
                        let q = parse_usize(args[0], line)?;
                        let v = parse_f64(args[1], line)?;
                        match toks[0] {
                            "rx" => Gate::Rx { q, theta: v },
                            "ry" => Gate::Ry { q, theta: v },
                            "rz" => Gate::Rz { q, theta: v },
                            "gpi" => Gate::Gpi { q, phi: v },
                            _ => Gate::Gpi2 { q, phi: v },
                        }
                    }
                    "cx" => {
                        need(2)?;
                        Gate::Cx {
                            control: parse_usize(args[0], line)?,
                            target: parse_usize(args[1], line)?,
                        }
                    }
                    "rzz" | "ryz" | "rzy" | "ryy" => {
                        need(3)?;
                        let a = parse_usize(args[0], line)?;
                        let b = parse_usize(args[1], line)?;
                        let theta = parse_f64(args[2], line)?;
                        match toks[0] {
                            "rzz" => Gate::Rzz { a, b, theta },
                            "ryz" => Gate::Ryz { a, b, theta },
                            "rzy" => Gate::Rzy { a, b, theta },
                            _ => Gate::Ryy { a, b, theta },
                        }
                    }
                    "ms" => {
                        need(5)?;
                        Gate::Ms {
                            a: parse_usize(args[0], line)?,
                            b: parse_usize(args[1], line)?,
                            phi0: parse_f64(args[2], line)?,
                            phi1: parse_f64(args[3], line)?,
                            theta: parse_f64(args[4], line)?,
                        }
                    }
                    other => {
                        return Err(Error::Parse {
                            line,
                            message: format!("unknown gate kind {other:?}"),
                        })
                    }
                };
                let (q0, q1) = gate.qubits();
                let width = c.width();
                if q0 >= width || q1.is_some_and(|q| q >= width) {
                    return Err(Error::Parse {
                        line,
                        message: format!("qubit index out of range for width {width}"),
                    });
                }
                if q1 == Some(q0) {
                    return Err(Error::Parse {
                        line,
                        message: "two-qubit gate needs distinct qubits".into(),
                    });
                }
                c.push(gate);
            }
        }
    }

    circuit.ok_or_else(|| Error::Parse {
        line: input.lines().count().max(1),
        message: "input contains no `qubits n` header".into(),
    })
}

/// Sidecar metadata describing how a serialized circuit was produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitMetadata {
    /// Human-readable description of the generating pipeline.
    pub generator: String,
    pub width: usize,
    pub gate_counts: GateCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_cutoff: Option<GateCutoffStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_cutoff: Option<crate::cd::StepCutoffStats>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cd::{apply_step_cutoff, cd_step_table};
    use crate::ising::random_spin_glass;

    fn glass(n: usize, seed: u64) -> IsingModel {
        random_spin_glass(n, seed).unwrap()
    }

    #[test]
    fn annealing_circuit_has_expected_shape() {
        let m = glass(4, 1);
        let c = build_dqa_circuit(&m, 3, 1.0).unwrap();
        // H layer + per step: 4 RX + 4 RZ + 6 RZZ.
        assert_eq!(c.len(), 4 + 3 * (4 + 4 + 6));
        assert!(c.gates()[..4].iter().all(|g| g.kind() == "h"));
        let counts = count_gates(&c);
        assert_eq!(counts.by_kind["rzz"], 18);
        assert_eq!(counts.two_qubit, 18);
    }

    #[test]
    fn annealing_rejects_bad_arguments() {
        let m = glass(2, 0);
        assert!(build_dqa_circuit(&m, 0, 1.0).is_err());
        assert!(build_dqa_circuit(&m, 3, 0.0).is_err());
        assert!(build_dqa_circuit(&m, 3, f64::INFINITY).is_err());
    }

    #[test]
    fn cd_only_circuit_is_independent_of_total_time() {
        let m = glass(5, 7);
        let a = build_dcqo_circuit(&m, 6, 0.01, DcqoVariant::CdOnly).unwrap();
        let b = build_dcqo_circuit(&m, 6, 1.0, DcqoVariant::CdOnly).unwrap();
        let c = build_dcqo_circuit(&m, 6, 100.0, DcqoVariant::CdOnly).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn cd_step_block_orders_pairs_after_sites() {
        let m = glass(3, 2);
        let c = build_dcqo_circuit(&m, 1, 1.0, DcqoVariant::CdOnly).unwrap();
        let kinds: Vec<&str> = c.gates().iter().map(|g| g.kind()).collect();
        assert_eq!(
            kinds,
            vec!["h", "h", "h", "ry", "ry", "ry", "ryz", "rzy", "ryz", "rzy", "ryz", "rzy"]
        );
        // Adjacent YZ/ZY words share the pair and the angle.
        for w in c.gates()[3 + 3..].chunks(2) {
            match (w[0], w[1]) {
                (Gate::Ryz { a, b, theta }, Gate::Rzy { a: a2, b: b2, theta: t2 }) => {
                    assert_eq!((a, b), (a2, b2));
                    assert_eq!(theta, t2);
                }
                other => panic!("expected adjacent ryz/rzy, got {other:?}"),
            }
        }
    }

    #[test]
    fn full_variant_interleaves_annealing_and_cd_blocks() {
        let m = glass(3, 2);
        let c = build_dcqo_circuit(&m, 2, 1.5, DcqoVariant::Full).unwrap();
        let kinds: Vec<&str> = c.gates().iter().map(|g| g.kind()).collect();
        let one_step = vec![
            "rx", "rx", "rx", "rz", "rz", "rz", "rzz", "rzz", "rzz", // annealing
            "ry", "ry", "ry", "ryz", "rzy", "ryz", "rzy", "ryz", "rzy", // counterdiabatic
        ];
        let mut expected = vec!["h", "h", "h"];
        expected.extend(&one_step);
        expected.extend(&one_step);
        assert_eq!(kinds, expected);
    }

    #[test]
    fn truncated_table_synthesizes_surviving_steps_only() {
        let m = glass(4, 9);
        let table = cd_step_table(&m, 10).unwrap();
        let max_pref = table.steps.iter().map(|s| s.prefactor).fold(0.0, f64::max);
        let (cut, stats) = apply_step_cutoff(&table, 0.6 * max_pref).unwrap();
        assert!(stats.dropped > 0);
        let c = build_dcqo_from_table(&m, &cut, 1.0, DcqoVariant::CdOnly).unwrap();
        let per_step = 4 + 6 * 2;
        assert_eq!(c.len(), 4 + stats.kept * per_step);
    }

    #[test]
    fn qaoa_layers_and_parameters_agree() {
        let m = glass(4, 3);
        let c = build_qaoa_circuit(&m, 2, &[0.3, -0.2, 0.1, 0.4]).unwrap();
        let per_layer = 6 + 4 + 4;
        assert_eq!(c.len(), 4 + 2 * per_layer);
        match c.gates()[4] {
            Gate::Rzz { a: 0, b: 1, theta } => {
                assert_eq!(theta, 2.0 * 0.3 * m.coupling(0, 1));
            }
            other => panic!("expected rzz first in the cost layer, got {other:?}"),
        }
        assert!(matches!(
            build_qaoa_circuit(&m, 2, &[0.0; 3]),
            Err(Error::ParameterCountMismatch { expected: 4, actual: 3 })
        ));
        assert!(build_qaoa_circuit(&m, 0, &[]).is_err());
    }

    #[test]
    fn ansatz_param_counts_per_variant() {
        let two = AnsatzSpec { variant: AnsatzVariant::TwoParam, layers: 3 };
        let per = AnsatzSpec { variant: AnsatzVariant::PerSite, layers: 2 };
        let zy = AnsatzSpec { variant: AnsatzVariant::PerSiteZyOnly, layers: 1 };
        assert_eq!(two.param_count(16), 6);
        assert_eq!(per.param_count(16), 34);
        assert_eq!(zy.param_count(16), 17);
    }

    #[test]
    fn zy_only_variant_emits_no_yz_words() {
        let m = glass(4, 4);
        let spec = AnsatzSpec { variant: AnsatzVariant::PerSiteZyOnly, layers: 1 };
        let params = vec![0.2; spec.param_count(4)];
        let c = build_hdcqo_circuit(&m, &spec, &params).unwrap();
        let counts = count_gates(&c);
        assert_eq!(counts.by_kind.get("ryz"), None);
        assert_eq!(counts.by_kind["rzy"], 6);
        assert_eq!(counts.by_kind["ry"], 4);
    }

    #[test]
    fn warm_started_ansatz_reproduces_the_digitized_circuit() {
        for seed in [0, 5, 9] {
            let m = glass(5, seed);
            let layers = 4;
            let spec = AnsatzSpec { variant: AnsatzVariant::TwoParam, layers };
            let params = warm_start_params(&m, &spec, layers).unwrap();
            let ansatz = build_hdcqo_circuit(&m, &spec, &params).unwrap();
            let digitized = build_dcqo_circuit(&m, layers, 1.0, DcqoVariant::CdOnly).unwrap();
            assert_eq!(ansatz, digitized, "seed {seed}: circuits must match gate for gate");
        }
    }

    #[test]
    fn warm_start_layout_repeats_step_prefactors() {
        let m = glass(3, 8);
        let spec = AnsatzSpec { variant: AnsatzVariant::PerSite, layers: 2 };
        let params = warm_start_params(&m, &spec, 3).unwrap();
        assert_eq!(params.len(), 8);
        let table = cd_step_table(&m, 3).unwrap();
        assert!(params[..4].iter().all(|&p| p == table.steps[0].prefactor));
        assert!(params[4..].iter().all(|&p| p == table.steps[1].prefactor));
        assert!(warm_start_params(&m, &spec, 1).is_err());
    }

    #[test]
    fn gate_cutoff_folds_angles_before_comparing() {
        let mut c = Circuit::new(2);
        c.push(Gate::Rx { q: 0, theta: std::f64::consts::TAU + 0.05 }); // folds to 0.05
        c.push(Gate::Rx { q: 1, theta: 0.5 });
        c.push(Gate::Cx { control: 0, target: 1 });
        let (cut, stats) = apply_gate_cutoff(&c, 0.1).unwrap();
        assert_eq!(stats.removed, 1);
        assert_eq!(stats.retained, 2);
        assert_eq!(cut.gates()[0], Gate::Rx { q: 1, theta: 0.5 });
        assert_eq!(cut.gates()[1], Gate::Cx { control: 0, target: 1 });
    }

    #[test]
    fn zero_threshold_keeps_everything() {
        let m = glass(4, 6);
        let c = build_dcqo_circuit(&m, 5, 1.0, DcqoVariant::CdOnly).unwrap();
        let (cut, stats) = apply_gate_cutoff(&c, 0.0).unwrap();
        assert_eq!(cut, c);
        assert_eq!(stats.removed, 0);
        assert!(apply_gate_cutoff(&c, -1.0).is_err());
    }

    #[test]
    fn fold_angle_lands_in_half_open_interval() {
        use std::f64::consts::{PI, TAU};
        assert!((fold_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((fold_angle(-3.0 * PI) - PI).abs() < 1e-12);
        assert!((fold_angle(0.25) - 0.25).abs() < 1e-15);
        assert!((fold_angle(-0.25) + 0.25).abs() < 1e-15);
        assert!((fold_angle(TAU * 4.0 + 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn text_format_round_trips() {
        let m = glass(3, 12);
        let mut c = build_dcqo_circuit(&m, 2, 1.0, DcqoVariant::Full).unwrap();
        c.push(Gate::Ms { a: 0, b: 2, phi0: 1.5, phi1: -0.25, theta: 0.125 });
        c.push(Gate::Gpi { q: 1, phi: std::f64::consts::FRAC_PI_2 });
        c.push(Gate::Gpi2 { q: 0, phi: 0.0 });
        c.push(Gate::Cx { control: 2, target: 0 });
        c.push(Gate::Ryy { a: 1, b: 2, theta: -0.75 });
        let text = circuit_to_text(&c);
        let parsed = circuit_from_text(&text).unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn text_format_reports_errors_with_line_numbers() {
        assert!(matches!(
            circuit_from_text("h 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            circuit_from_text("qubits 2\nfoo 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            circuit_from_text("qubits 2\nrx 5 0.2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            circuit_from_text("qubits 2\ncx 1 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            circuit_from_text("qubits 2\nrx 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(circuit_from_text("").is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a circuit\n\nqubits 2 # two qubits\nh 0\n# done\nh 1\n";
        let c = circuit_from_text(text).unwrap();
        assert_eq!(c.len(), 2);
    }
}
