//! Lowering passes that rewrite two-body Pauli rotations into hardware
//! gate sets.
//!
//! Two targets are supported:
//!
//! * **CX target** (`lower_to_cx`): `{H, RX, RY, RZ, CX}`. Every two-body
//!   rotation costs two `CX` gates; adjacent `RYZ`/`RZY` rotations on the
//!   same pair — the pattern counterdiabatic synthesis emits — fuse into a
//!   single two-`CX` block because their generators commute.
//! * **Ion-native target** (`lower_to_ms`): single-qubit gates pass
//!   through and every two-body rotation becomes exactly one
//!   Mølmer–Sørensen interaction, dressed with `GPI`/`GPI2` pulses. The
//!   `MS` angle is always folded into the hardware range `[0, π/2]`.
//!
//! Both passes preserve the circuit unitary up to global phase; the test
//! suite checks this against dense matrix products.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// CX target
// ---------------------------------------------------------------------------

/// Emits `exp(-i·(θ/2)·X_a X_b)·exp(-i·(φ/2)·Z_a Z_b)` conjugated into the
/// `Y_a Z_b` / `Z_a Y_b` frame:
/// a basis change with `X_a→Y_a, Z_b→Y_b` sends the inner `XX`/`ZZ` pair
/// (produced by one CX conjugation of single-qubit rotations) to the
/// commuting `YZ`/`ZY` pair. Passing `None` for either angle skips that
/// rotation, so the same block lowers fused and standalone words.
fn push_yz_zy_block(out: &mut Circuit, a: usize, b: usize, yz: Option<f64>, zy: Option<f64>) {
    // Basis change in: U_a = RZ(π/2) maps X→Y on a; U_b = S·H maps X→Z,
    // Z→Y on b (S realized as RZ(π/2) up to global phase).
    out.push(Gate::Rz { q: a, theta: -FRAC_PI_2 });
    out.push(Gate::Rz { q: b, theta: -FRAC_PI_2 });
    out.push(Gate::H { q: b });
    out.push(Gate::Cx { control: a, target: b });
    if let Some(theta) = yz {
        out.push(Gate::Rx { q: a, theta });
    }
    if let Some(theta) = zy {
        out.push(Gate::Rz { q: b, theta });
    }
    out.push(Gate::Cx { control: a, target: b });
    out.push(Gate::H { q: b });
    out.push(Gate::Rz { q: b, theta: FRAC_PI_2 });
    out.push(Gate::Rz { q: a, theta: FRAC_PI_2 });
}

/// Rewrites a circuit into the `{H, RX, RY, RZ, CX}` gate set.
///
/// `RZZ` lowers to the standard two-`CX` conjugation, `RYY` to the same
/// with an `RX(±π/2)` basis change, and `RYZ`/`RZY` to a shared two-`CX`
/// template; when an `RYZ` is immediately followed by an `RZY` on the same
/// qubit pair the two rotations share one template, keeping the two-qubit
/// cost of a counterdiabatic pair block at two `CX`. Ion-native gates are
/// rejected.
pub fn lower_to_cx(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(c.width());
    let gates = c.gates();
    let mut i = 0usize;
    while i < gates.len() {
        match gates[i] {
            g @ (Gate::H { .. }
            | Gate::Rx { .. }
            | Gate::Ry { .. }
            | Gate::Rz { .. }
            | Gate::Cx { .. }) => out.push(g),
            Gate::Rzz { a, b, theta } => {
                out.push(Gate::Cx { control: a, target: b });
                out.push(Gate::Rz { q: b, theta });
                out.push(Gate::Cx { control: a, target: b });
            }
            Gate::Ryy { a, b, theta } => {
                out.push(Gate::Rx { q: a, theta: FRAC_PI_2 });
                out.push(Gate::Rx { q: b, theta: FRAC_PI_2 });
                out.push(Gate::Cx { control: a, target: b });
                out.push(Gate::Rz { q: b, theta });
                out.push(Gate::Cx { control: a, target: b });
                out.push(Gate::Rx { q: a, theta: -FRAC_PI_2 });
                out.push(Gate::Rx { q: b, theta: -FRAC_PI_2 });
            }
            Gate::Ryz { a, b, theta } => {
                // Fuse with an immediately following ZY word on the same pair.
                if let Some(&Gate::Rzy { a: a2, b: b2, theta: t2 }) = gates.get(i + 1) {
                    if (a2, b2) == (a, b) {
                        push_yz_zy_block(&mut out, a, b, Some(theta), Some(t2));
                        i += 2;
                        continue;
                    }
                }
                push_yz_zy_block(&mut out, a, b, Some(theta), None);
            }
            Gate::Rzy { a, b, theta } => {
                push_yz_zy_block(&mut out, a, b, None, Some(theta));
            }
            Gate::Gpi { .. } | Gate::Gpi2 { .. } | Gate::Ms { .. } => {
                return Err(Error::UnlowerableGate {
                    kind: gates[i].kind(),
                    target: "cx",
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Ion-native target
// ---------------------------------------------------------------------------

/// Emits `exp(-i·(θ/2)·Y_a Y_b)` as a single `MS` interaction with its
/// angle in `[0, π/2]`, using `Y⊗Y`-axis phases and, for the middle two
/// quadrants, a `GPI(π/2)⊗GPI(π/2)` pulse pair (a `Y⊗Y` π rotation up to
/// phase) to absorb the excess angle.
fn push_yy_ms(out: &mut Circuit, a: usize, b: usize, theta: f64) {
    let t = theta.rem_euclid(TAU);
    let (ms_phi0, ms_theta, flip) = if t <= FRAC_PI_2 {
        (FRAC_PI_2, t, false)
    } else if t <= PI {
        (3.0 * FRAC_PI_2, PI - t, true)
    } else if t <= 3.0 * FRAC_PI_2 {
        (FRAC_PI_2, t - PI, true)
    } else {
        (3.0 * FRAC_PI_2, TAU - t, false)
    };
    debug_assert!((0.0..=FRAC_PI_2 + 1e-12).contains(&ms_theta));
    out.push(Gate::Ms {
        a,
        b,
        phi0: ms_phi0,
        phi1: FRAC_PI_2,
        theta: ms_theta,
    });
    if flip {
        out.push(Gate::Gpi { q: a, phi: FRAC_PI_2 });
        out.push(Gate::Gpi { q: b, phi: FRAC_PI_2 });
    }
}

/// Rewrites a circuit into single-qubit gates plus ion-native `MS`
/// interactions.
///
/// Each two-body rotation costs exactly one `MS` gate: the rotation is
/// conjugated into the `Y⊗Y` frame with `GPI2` pulses (`GPI2(0)` maps
/// `Y→Z` on the dressed qubit, `GPI2(π)` undoes it) and the `Y⊗Y` rotation
/// maps onto the hardware interaction with angle folded into `[0, π/2]`.
/// Single-qubit gates pass through untouched; `CX` is not accepted — lower
/// the rotation-level circuit, not an already-lowered one.
pub fn lower_to_ms(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(c.width());
    for &g in c.gates() {
        match g {
            Gate::H { .. }
            | Gate::Rx { .. }
            | Gate::Ry { .. }
            | Gate::Rz { .. }
            | Gate::Gpi { .. }
            | Gate::Gpi2 { .. }
            | Gate::Ms { .. } => out.push(g),
            Gate::Ryy { a, b, theta } => push_yy_ms(&mut out, a, b, theta),
            Gate::Rzy { a, b, theta } => {
                // Z on `a`: conjugate a into the Y frame.
                out.push(Gate::Gpi2 { q: a, phi: PI });
                push_yy_ms(&mut out, a, b, theta);
                out.push(Gate::Gpi2 { q: a, phi: 0.0 });
            }
            Gate::Ryz { a, b, theta } => {
                // Z on `b`: conjugate b into the Y frame.
                out.push(Gate::Gpi2 { q: b, phi: PI });
                push_yy_ms(&mut out, a, b, theta);
                out.push(Gate::Gpi2 { q: b, phi: 0.0 });
            }
            Gate::Rzz { a, b, theta } => {
                out.push(Gate::Gpi2 { q: a, phi: PI });
                out.push(Gate::Gpi2 { q: b, phi: PI });
                push_yy_ms(&mut out, a, b, theta);
                out.push(Gate::Gpi2 { q: a, phi: 0.0 });
                out.push(Gate::Gpi2 { q: b, phi: 0.0 });
            }
            Gate::Cx { .. } => {
                return Err(Error::UnlowerableGate {
                    kind: "cx",
                    target: "ms",
                })
            }
        }
    }
    Ok(out)
}
