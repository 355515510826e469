//! Error type shared across the toolkit.

use thiserror::Error;

/// Errors produced by model construction, circuit synthesis, simulation,
/// optimization, and file parsing.
#[derive(Debug, Error)]
pub enum Error {
    /// A problem size exceeds what the requested operation can handle
    /// (exact solvers and statevector simulation grow exponentially).
    #[error("{context}: {n} variables exceeds the limit of {limit}")]
    TooManyVariables {
        context: &'static str,
        n: usize,
        limit: usize,
    },

    /// The model has no fields and no couplings, so coefficient
    /// normalization would divide by zero.
    #[error("model has no fields or couplings; counterdiabatic coefficient is undefined")]
    DegenerateModel,

    /// Two objects that must agree on dimension do not.
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A matrix that must be symmetric is not.
    #[error("matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    AsymmetricMatrix { i: usize, j: usize, a: f64, b: f64 },

    /// An index refers to a variable or qubit outside the problem.
    #[error("index {index} out of range for size {size} ({context})")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        size: usize,
    },

    /// The mean energy is nonzero but the ground energy is zero, so the
    /// ratio of the two is undefined.
    #[error("approximation ratio undefined: ground energy is zero (mean energy {average_energy})")]
    UndefinedApproximationRatio { average_energy: f64 },

    /// A parameter vector does not match the ansatz layout.
    #[error("parameter count mismatch: ansatz expects {expected}, got {actual}")]
    ParameterCountMismatch { expected: usize, actual: usize },

    /// A gate kind that the requested lowering pass does not accept.
    #[error("cannot lower {kind} gate to the {target} gate set")]
    UnlowerableGate {
        kind: &'static str,
        target: &'static str,
    },

    /// An argument outside the valid domain (negative threshold, zero
    /// steps, bad time, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed textual input (QUBO files, circuit files, instance JSON).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The same matrix entry appears twice in an input file.
    #[error("duplicate entry for ({i}, {j}) in input")]
    DuplicateEntry { i: usize, j: usize },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
