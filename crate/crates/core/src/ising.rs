//! QUBO and Ising problem representations, conversions between them,
//! exact reference solvers, and distribution-level quality metrics.
//!
//! Conventions used throughout the crate:
//!
//! * Binary variables `x_i ∈ {0, 1}` relate to spins `z_i ∈ {+1, -1}` by
//!   `x_i = (1 - z_i) / 2`, so bit `0` is spin `+1` and bit `1` is spin `-1`.
//! * A computational-basis outcome is packed into a `u64` with variable
//!   (qubit) `k` at bit position `k`; its string form places variable `0`
//!   in the leftmost character.
//! * Couplings are stored sparsely for index pairs `i < j` only.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest problem size accepted by the exact (exponential-time) solvers.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Largest problem size for which a full energy spectrum is materialized.
pub const SPECTRUM_LIMIT: usize = 20;

/// Value of bit `k` in a packed outcome index.
#[inline]
pub fn bit(index: u64, k: usize) -> bool {
    (index >> k) & 1 == 1
}

/// Spin value (`+1` for bit 0, `-1` for bit 1) of variable `k`.
#[inline]
pub fn spin(index: u64, k: usize) -> f64 {
    if bit(index, k) {
        -1.0
    } else {
        1.0
    }
}

/// Expands a packed index into a bit vector of the given width.
pub fn bits_of(index: u64, width: usize) -> Vec<bool> {
    (0..width).map(|k| bit(index, k)).collect()
}

/// Packs a bit slice into an index (variable `k` at bit `k`).
pub fn index_of_bits(bits: &[bool]) -> u64 {
    assert!(bits.len() <= 64, "at most 64 variables fit in a packed index");
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (k, &b)| acc | ((b as u64) << k))
}

/// Renders a packed index as a bitstring whose character `k` is variable `k`.
pub fn format_bitstring(index: u64, width: usize) -> String {
    let mut s = String::with_capacity(width);
    for k in 0..width {
        s.push(if bit(index, k) { '1' } else { '0' });
    }
    s
}

/// Parses a bitstring (characters `0`/`1`, character `k` = variable `k`)
/// into a packed index and its width.
pub fn parse_bitstring(s: &str) -> Result<(u64, usize)> {
    let width = s.len();
    if width == 0 || width > 64 {
        return Err(Error::InvalidArgument(format!(
            "bitstring length {width} outside 1..=64"
        )));
    }
    let mut index = 0u64;
    for (k, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => index |= 1 << k,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "bitstring may contain only 0/1, found {other:?}"
                )))
            }
        }
    }
    Ok((index, width))
}

// ---------------------------------------------------------------------------
// QUBO
// ---------------------------------------------------------------------------

#[derive(Clone, Serialize, Deserialize)]
struct QuboSerde {
    n: usize,
    q: Vec<f64>,
    offset: f64,
}

/// A quadratic unconstrained binary optimization problem.
///
/// The objective is `value(x) = xᵀ Q x + offset` with `Q` a symmetric
/// `n × n` matrix over binary variables (`x_i² = x_i`, so linear terms live
/// on the diagonal).
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "QuboSerde", into = "QuboSerde")]
pub struct QuboProblem {
    n: usize,
    /// Row-major symmetric matrix, length `n * n`.
    q: Vec<f64>,
    /// Constant added to the quadratic form.
    pub offset: f64,
}

impl TryFrom<QuboSerde> for QuboProblem {
    type Error = Error;
    fn try_from(s: QuboSerde) -> Result<Self> {
        if s.q.len() != s.n * s.n {
            return Err(Error::DimensionMismatch {
                context: "QUBO matrix buffer",
                expected: s.n * s.n,
                actual: s.q.len(),
            });
        }
        let mut p = QuboProblem::zeros(s.n);
        p.offset = s.offset;
        for i in 0..s.n {
            for j in 0..s.n {
                let a = s.q[i * s.n + j];
                let b = s.q[j * s.n + i];
                if !symmetric_enough(a, b) {
                    return Err(Error::AsymmetricMatrix { i, j, a, b });
                }
            }
        }
        p.q = s.q;
        Ok(p)
    }
}

impl From<QuboProblem> for QuboSerde {
    fn from(p: QuboProblem) -> Self {
        QuboSerde {
            n: p.n,
            q: p.q,
            offset: p.offset,
        }
    }
}

fn symmetric_enough(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl QuboProblem {
    /// An all-zero problem over `n` variables.
    pub fn zeros(n: usize) -> Self {
        QuboProblem {
            n,
            q: vec![0.0; n * n],
            offset: 0.0,
        }
    }

    /// Builds a problem from a full square matrix. Mirror entries must agree
    /// to within a tight relative tolerance; the stored matrix averages them.
    #[allow(clippy::needless_range_loop)] // cross-indexed: rows[i][j] vs rows[j][i]
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "QUBO matrix row",
                    expected: n,
                    actual: row.len(),
                });
            }
            for j in 0..n {
                if !symmetric_enough(rows[i][j], rows[j][i]) {
                    return Err(Error::AsymmetricMatrix {
                        i,
                        j,
                        a: rows[i][j],
                        b: rows[j][i],
                    });
                }
            }
        }
        let mut p = QuboProblem::zeros(n);
        for i in 0..n {
            for j in 0..n {
                p.q[i * n + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        Ok(p)
    }

    /// Number of binary variables.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Matrix entry `Q[i][j]`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "QUBO index out of range");
        self.q[i * self.n + j]
    }

    /// Sets `Q[i][j]` and its mirror entry.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.n && j < self.n, "QUBO index out of range");
        self.q[i * self.n + j] = value;
        self.q[j * self.n + i] = value;
    }

    /// Adds `value` to `Q[i][j]` (and its mirror entry when `i != j`).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.n && j < self.n, "QUBO index out of range");
        self.q[i * self.n + j] += value;
        if i != j {
            self.q[j * self.n + i] += value;
        }
    }

    /// Objective value `xᵀ Q x + offset` for a bit assignment.
    pub fn value(&self, bits: &[bool]) -> f64 {
        assert_eq!(bits.len(), self.n, "assignment width must match problem");
        let mut acc = self.offset;
        for i in 0..self.n {
            if !bits[i] {
                continue;
            }
            let row = &self.q[i * self.n..(i + 1) * self.n];
            acc += row[i];
            for j in (i + 1)..self.n {
                if bits[j] {
                    acc += 2.0 * row[j];
                }
            }
        }
        acc
    }

    /// Objective value for a packed outcome index (requires `n ≤ 64`).
    pub fn value_of_index(&self, index: u64) -> f64 {
        assert!(self.n <= 64, "packed indices carry at most 64 variables");
        self.value(&bits_of(index, self.n))
    }
}

impl std::fmt::Debug for QuboProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuboProblem")
            .field("n", &self.n)
            .field("offset", &self.offset)
            .finish_non_exhaustive()
    }
}

// ---------------------------------------------------------------------------
// Ising
// ---------------------------------------------------------------------------

#[derive(Clone, Serialize, Deserialize)]
struct IsingSerde {
    n: usize,
    h: Vec<f64>,
    couplings: Vec<(usize, usize, f64)>,
    offset: f64,
}

/// A classical Ising cost model
/// `E(z) = Σ_i h_i z_i + Σ_{i<j} J_ij z_i z_j + offset` over spins `±1`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "IsingSerde", into = "IsingSerde")]
pub struct IsingModel {
    n: usize,
    h: Vec<f64>,
    /// Nonzero couplings keyed by `(i, j)` with `i < j`.
    j: BTreeMap<(usize, usize), f64>,
    /// Constant energy shift.
    pub offset: f64,
}

impl TryFrom<IsingSerde> for IsingModel {
    type Error = Error;
    fn try_from(s: IsingSerde) -> Result<Self> {
        IsingModel::new(s.h, s.couplings.into_iter().map(|(i, j, v)| ((i, j), v)), s.offset)
    }
}

impl From<IsingModel> for IsingSerde {
    fn from(m: IsingModel) -> Self {
        IsingSerde {
            n: m.n,
            h: m.h.clone(),
            couplings: m.couplings().map(|((i, j), v)| (i, j, v)).collect(),
            offset: m.offset,
        }
    }
}

impl IsingModel {
    /// Builds a model from per-site fields and a coupling list. Pair keys are
    /// normalized to `i < j`; self-couplings and repeated pairs are rejected,
    /// and exact zeros are dropped.
    pub fn new(
        h: Vec<f64>,
        couplings: impl IntoIterator<Item = ((usize, usize), f64)>,
        offset: f64,
    ) -> Result<Self> {
        let n = h.len();
        let mut j = BTreeMap::new();
        for ((a, b), v) in couplings {
            if a == b {
                return Err(Error::InvalidArgument(format!(
                    "coupling ({a}, {b}) links a site to itself"
                )));
            }
            let key = (a.min(b), a.max(b));
            if key.1 >= n {
                return Err(Error::IndexOutOfRange {
                    context: "coupling site",
                    index: key.1,
                    size: n,
                });
            }
            if j.contains_key(&key) {
                return Err(Error::DuplicateEntry { i: key.0, j: key.1 });
            }
            if v != 0.0 {
                j.insert(key, v);
            }
        }
        Ok(IsingModel { n, h, j, offset })
    }

    /// Number of spins.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Per-site fields.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Coupling strength for a pair (0 when absent; order-insensitive).
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.j
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Iterates nonzero couplings in lexicographic `(i, j)` order, `i < j`.
    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.j.iter().map(|(&k, &v)| (k, v))
    }

    /// Number of nonzero couplings.
    pub fn coupling_count(&self) -> usize {
        self.j.len()
    }

    /// True when every field and coupling is exactly zero.
    pub fn is_degenerate(&self) -> bool {
        self.h.iter().all(|&v| v == 0.0) && self.j.is_empty()
    }

    /// Energy of a spin configuration given as bits (bit 1 = spin -1).
    pub fn energy(&self, bits: &[bool]) -> f64 {
        assert_eq!(bits.len(), self.n, "assignment width must match model");
        let s = |k: usize| if bits[k] { -1.0 } else { 1.0 };
        let mut acc = self.offset;
        for (i, &hi) in self.h.iter().enumerate() {
            acc += hi * s(i);
        }
        for (&(a, b), &v) in &self.j {
            acc += v * s(a) * s(b);
        }
        acc
    }

    /// Energy of a packed outcome index (requires `n ≤ 64`).
    pub fn energy_of_index(&self, index: u64) -> f64 {
        assert!(self.n <= 64, "packed indices carry at most 64 variables");
        let mut acc = self.offset;
        for (i, &hi) in self.h.iter().enumerate() {
            acc += hi * spin(index, i);
        }
        for (&(a, b), &v) in &self.j {
            acc += v * spin(index, a) * spin(index, b);
        }
        acc
    }
}

impl std::fmt::Debug for IsingModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IsingModel")
            .field("n", &self.n)
            .field("couplings", &self.j.len())
            .field("offset", &self.offset)
            .finish_non_exhaustive()
    }
}

/// Converts a QUBO into the equivalent Ising model under
/// `x_i = (1 - z_i) / 2`. Energies agree exactly:
/// `qubo.value(x) == ising.energy(z)` for corresponding assignments.
pub fn qubo_to_ising(q: &QuboProblem) -> IsingModel {
    let n = q.n();
    let mut h = vec![0.0; n];
    let mut offset = q.offset;
    let mut couplings = Vec::new();

    for i in 0..n {
        let qii = q.entry(i, i);
        offset += 0.5 * qii;
        h[i] -= 0.5 * qii;
        for j in (i + 1)..n {
            let qij = q.entry(i, j);
            if qij == 0.0 {
                continue;
            }
            // The symmetric matrix contributes 2·Q_ij·x_i·x_j per pair.
            couplings.push(((i, j), 0.5 * qij));
            offset += 0.5 * qij;
            h[i] -= 0.5 * qij;
            h[j] -= 0.5 * qij;
        }
    }

    IsingModel::new(h, couplings, offset).expect("pairs are unique and in range by construction")
}

/// Draws a fully connected spin glass with fields and couplings uniform in
/// `(-1, 1)`. The generator is seeded deterministically; draws are the `n`
/// fields in site order followed by couplings in lexicographic pair order.
pub fn random_spin_glass(n: usize, seed: u64) -> Result<IsingModel> {
    if n == 0 {
        return Err(Error::InvalidArgument("spin glass needs at least one site".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            couplings.push(((i, j), rng.random_range(-1.0..1.0)));
        }
    }
    IsingModel::new(h, couplings, 0.0)
}

// ---------------------------------------------------------------------------
// Exact solving
// ---------------------------------------------------------------------------

/// Result of exhaustively minimizing an Ising model: the optimal energy and
/// every optimal bitstring (packed, ascending).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundStateSet {
    pub energy: f64,
    pub bitstrings: Vec<u64>,
}

impl GroundStateSet {
    /// Number of optimal configurations.
    pub fn degeneracy(&self) -> usize {
        self.bitstrings.len()
    }

    /// Whether a packed outcome is optimal.
    pub fn contains(&self, index: u64) -> bool {
        self.bitstrings.binary_search(&index).is_ok()
    }
}

/// Exhaustively minimizes an Ising model (`n ≤ 24`). Configurations whose
/// energy is within `1e-9 · max(1, |E_min|)` of the minimum are reported as
/// ties, which keeps exactly degenerate instances (e.g. symmetric tours)
/// intact in floating point.
pub fn brute_force_solve(m: &IsingModel) -> Result<GroundStateSet> {
    if m.n() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyVariables {
            context: "exhaustive minimization",
            n: m.n(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let total: u64 = 1 << m.n();
    let mut best = f64::INFINITY;
    for idx in 0..total {
        let e = m.energy_of_index(idx);
        if e < best {
            best = e;
        }
    }
    let tol = 1e-9 * best.abs().max(1.0);
    let mut bitstrings = Vec::new();
    for idx in 0..total {
        if m.energy_of_index(idx) <= best + tol {
            bitstrings.push(idx);
        }
    }
    Ok(GroundStateSet {
        energy: best,
        bitstrings,
    })
}

/// Full sorted energy spectrum (ascending, with multiplicity; `n ≤ 20`).
pub fn energy_spectrum(m: &IsingModel) -> Result<Vec<f64>> {
    if m.n() > SPECTRUM_LIMIT {
        return Err(Error::TooManyVariables {
            context: "energy spectrum",
            n: m.n(),
            limit: SPECTRUM_LIMIT,
        });
    }
    let total: u64 = 1 << m.n();
    let mut energies: Vec<f64> = (0..total).map(|i| m.energy_of_index(i)).collect();
    energies.sort_by(|a, b| a.total_cmp(b));
    Ok(energies)
}

// ---------------------------------------------------------------------------
// Outcome distributions and metrics
// ---------------------------------------------------------------------------

/// A probability distribution over computational-basis outcomes.
///
/// Keys are packed indices; only outcomes with nonzero probability are
/// stored. Probabilities from exact simulation sum to 1 up to rounding;
/// sampled distributions are normalized by construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    width: usize,
    probs: BTreeMap<u64, f64>,
}

impl OutcomeDistribution {
    /// Builds a distribution from dense per-index probabilities.
    pub fn from_dense(width: usize, probabilities: &[f64]) -> Self {
        assert!(width <= 63, "dense distributions need an addressable index space");
        assert_eq!(probabilities.len(), 1usize << width, "dense buffer size");
        let probs = probabilities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (i as u64, p))
            .collect();
        OutcomeDistribution { width, probs }
    }

    /// Builds a distribution from shot counts.
    pub fn from_counts(width: usize, counts: &BTreeMap<u64, u64>, shots: u64) -> Self {
        assert!(shots > 0, "counts need at least one shot");
        let probs = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&i, &c)| (i, c as f64 / shots as f64))
            .collect();
        OutcomeDistribution { width, probs }
    }

    /// Number of variables each outcome spans.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Probability of one outcome (zero when absent).
    pub fn prob(&self, index: u64) -> f64 {
        self.probs.get(&index).copied().unwrap_or(0.0)
    }

    /// Sum of stored probabilities.
    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Number of outcomes with nonzero probability.
    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    /// Iterates `(index, probability)` in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&i, &p)| (i, p))
    }

    /// The most probable outcome; ties resolve to the lowest index.
    pub fn most_probable(&self) -> Option<(u64, f64)> {
        let mut best: Option<(u64, f64)> = None;
        for (&i, &p) in &self.probs {
            match best {
                Some((_, bp)) if p <= bp => {}
                _ => best = Some((i, p)),
            }
        }
        best
    }

    /// The `k` most probable outcomes, highest first; ties resolve to the
    /// lower index.
    pub fn top(&self, k: usize) -> Vec<(u64, f64)> {
        let mut all: Vec<(u64, f64)> = self.iter().collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }

    /// Mean model energy under the distribution, normalized by total mass.
    pub fn mean_energy(&self, m: &IsingModel) -> Result<f64> {
        if self.width != m.n() {
            return Err(Error::DimensionMismatch {
                context: "distribution width vs model size",
                expected: m.n(),
                actual: self.width,
            });
        }
        let mass = self.total_mass();
        if mass <= 0.0 {
            return Err(Error::InvalidArgument(
                "distribution has no probability mass".into(),
            ));
        }
        let sum: f64 = self.iter().map(|(i, p)| p * m.energy_of_index(i)).sum();
        Ok(sum / mass)
    }
}

/// Probability mass the distribution places on optimal configurations.
pub fn success_probability(d: &OutcomeDistribution, ground: &GroundStateSet) -> f64 {
    ground.bitstrings.iter().map(|&b| d.prob(b)).sum()
}

/// Mean energy under the distribution divided by the ground energy, using a
/// precomputed ground energy. Undefined (error) when the ground energy is
/// exactly zero.
pub fn approximation_ratio_with_ground(
    d: &OutcomeDistribution,
    m: &IsingModel,
    ground_energy: f64,
) -> Result<f64> {
    let mean = d.mean_energy(m)?;
    if ground_energy == 0.0 {
        return Err(Error::UndefinedApproximationRatio {
            average_energy: mean,
        });
    }
    Ok(mean / ground_energy)
}

/// Mean energy under the distribution divided by the exact ground energy
/// (solves the model exhaustively, so the brute-force size limit applies).
pub fn approximation_ratio(d: &OutcomeDistribution, m: &IsingModel) -> Result<f64> {
    let ground = brute_force_solve(m)?;
    approximation_ratio_with_ground(d, m, ground.energy)
}

// ---------------------------------------------------------------------------
// QUBO text format
// ---------------------------------------------------------------------------

/// Parses the plain-text QUBO format.
///
/// The format is line-oriented: `#` starts a comment, blank lines are
/// ignored, the first significant line is the variable count `n`, and every
/// following line is `i j value` with `0 ≤ i ≤ j < n`. The value is the
/// coefficient of the monomial `x_i·x_j` (diagonal entries are linear
/// coefficients); repeating a pair is an error.
pub fn read_qubo_text(input: &str) -> Result<QuboProblem> {
    let mut n: Option<usize> = None;
    let mut problem = QuboProblem::zeros(0);
    let mut seen: std::collections::BTreeSet<(usize, usize)> = std::collections::BTreeSet::new();

    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        match n {
            None => {
                let count: usize = text.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("expected variable count, found {text:?}"),
                })?;
                if count == 0 {
                    return Err(Error::Parse {
                        line,
                        message: "variable count must be positive".into(),
                    });
                }
                n = Some(count);
                problem = QuboProblem::zeros(count);
            }
            Some(count) => {
                let mut parts = text.split_whitespace();
                let (i, j, v) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                    (Some(a), Some(b), Some(c), None) => {
                        let i: usize = a.parse().map_err(|_| Error::Parse {
                            line,
                            message: format!("bad index {a:?}"),
                        })?;
                        let j: usize = b.parse().map_err(|_| Error::Parse {
                            line,
                            message: format!("bad index {b:?}"),
                        })?;
                        let v: f64 = c.parse().map_err(|_| Error::Parse {
                            line,
                            message: format!("bad value {c:?}"),
                        })?;
                        (i, j, v)
                    }
                    _ => {
                        return Err(Error::Parse {
                            line,
                            message: format!("expected `i j value`, found {text:?}"),
                        })
                    }
                };
                if i > j {
                    return Err(Error::Parse {
                        line,
                        message: format!("entries must satisfy i ≤ j, found ({i}, {j})"),
                    });
                }
                if j >= count {
                    return Err(Error::Parse {
                        line,
                        message: format!("index {j} out of range for {count} variables"),
                    });
                }
                if !seen.insert((i, j)) {
                    return Err(Error::DuplicateEntry { i, j });
                }
                if i == j {
                    problem.set(i, i, v);
                } else {
                    // Off-diagonal file entries carry the whole cross term;
                    // the symmetric matrix stores half on each side.
                    problem.set(i, j, 0.5 * v);
                }
            }
        }
    }

    if n.is_none() {
        return Err(Error::Parse {
            line: input.lines().count().max(1),
            message: "input contains no variable count".into(),
        });
    }
    Ok(problem)
}

/// Writes a QUBO in the plain-text format accepted by [`read_qubo_text`].
/// Round-trips exactly: values print with full precision, and off-diagonal
/// halves recombine without rounding.
pub fn write_qubo_text(q: &QuboProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", q.n());
    for i in 0..q.n() {
        for j in i..q.n() {
            let v = if i == j {
                q.entry(i, i)
            } else {
                2.0 * q.entry(i, j)
            };
            if v != 0.0 {
                let _ = writeln!(out, "{} {} {}", i, j, v);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_qubo(n: usize, seed: u64) -> QuboProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = QuboProblem::zeros(n);
        for i in 0..n {
            for j in i..n {
                q.set(i, j, rng.random_range(-2.0..2.0));
            }
        }
        q.offset = rng.random_range(-1.0..1.0);
        q
    }

    #[test]
    fn bit_packing_round_trips() {
        let bits = vec![true, false, false, true, true];
        let idx = index_of_bits(&bits);
        assert_eq!(idx, 0b11001);
        assert_eq!(bits_of(idx, 5), bits);
        assert_eq!(format_bitstring(idx, 5), "10011");
        assert_eq!(parse_bitstring("10011").unwrap(), (idx, 5));
    }

    #[test]
    fn qubo_value_counts_cross_terms_twice() {
        // value = Q00·x0 + Q11·x1 + 2·Q01·x0·x1
        let mut q = QuboProblem::zeros(2);
        q.set(0, 0, 1.0);
        q.set(1, 1, -2.0);
        q.set(0, 1, 0.75);
        assert_eq!(q.value(&[true, false]), 1.0);
        assert_eq!(q.value(&[false, true]), -2.0);
        assert_eq!(q.value(&[true, true]), 1.0 - 2.0 + 1.5);
    }

    #[test]
    fn conversion_preserves_energies_exactly_on_seeded_instances() {
        for seed in 0..20 {
            let q = random_qubo(6, seed);
            let m = qubo_to_ising(&q);
            for idx in 0u64..64 {
                let x = q.value_of_index(idx);
                let e = m.energy_of_index(idx);
                assert!(
                    (x - e).abs() <= 1e-12 * x.abs().max(1.0),
                    "seed {seed} index {idx}: qubo {x} vs ising {e}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn conversion_preserves_energies(seed in 0u64..1000, idx in 0u64..256) {
            let q = random_qubo(8, seed);
            let m = qubo_to_ising(&q);
            let x = q.value_of_index(idx);
            let e = m.energy_of_index(idx);
            prop_assert!((x - e).abs() <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn brute_force_energy_is_a_lower_bound(seed in 0u64..200, idx in 0u64..1024) {
            let m = random_spin_glass(10, seed).unwrap();
            let g = brute_force_solve(&m).unwrap();
            prop_assert!(m.energy_of_index(idx) >= g.energy - 1e-12);
        }
    }

    #[test]
    fn brute_force_reports_all_ties() {
        // Two decoupled spins with fields of equal magnitude: h = (1, -1).
        // Ground states are z = (-1, +1), i.e. bits (1, 0) -> index 0b01.
        let m = IsingModel::new(vec![1.0, -1.0], [], 0.0).unwrap();
        let g = brute_force_solve(&m).unwrap();
        assert_eq!(g.energy, -2.0);
        assert_eq!(g.bitstrings, vec![0b01]);

        // A single coupling with no fields has a doubly degenerate minimum.
        let m = IsingModel::new(vec![0.0, 0.0], [((0, 1), 1.0)], 0.0).unwrap();
        let g = brute_force_solve(&m).unwrap();
        assert_eq!(g.energy, -1.0);
        assert_eq!(g.bitstrings, vec![0b01, 0b10]);
        assert!(g.contains(0b10));
        assert!(!g.contains(0b00));
    }

    #[test]
    fn brute_force_rejects_oversized_models() {
        let m = IsingModel::new(vec![0.1; 25], [], 0.0).unwrap();
        assert!(matches!(
            brute_force_solve(&m),
            Err(Error::TooManyVariables { .. })
        ));
    }

    #[test]
    fn spectrum_is_sorted_and_complete() {
        let m = random_spin_glass(6, 3).unwrap();
        let spec = energy_spectrum(&m).unwrap();
        assert_eq!(spec.len(), 64);
        assert!(spec.windows(2).all(|w| w[0] <= w[1]));
        let g = brute_force_solve(&m).unwrap();
        assert_eq!(spec[0], g.energy);
    }

    #[test]
    fn ising_constructor_normalizes_and_validates() {
        let m = IsingModel::new(vec![0.0; 3], [((2, 0), 0.5)], 0.0).unwrap();
        assert_eq!(m.coupling(0, 2), 0.5);
        assert_eq!(m.coupling(2, 0), 0.5);
        assert!(matches!(
            IsingModel::new(vec![0.0; 3], [((1, 1), 0.5)], 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            IsingModel::new(vec![0.0; 3], [((0, 3), 0.5)], 0.0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            IsingModel::new(vec![0.0; 3], [((0, 1), 0.5), ((1, 0), 0.2)], 0.0),
            Err(Error::DuplicateEntry { .. })
        ));
    }

    #[test]
    fn distribution_metrics_match_hand_computation() {
        let m = IsingModel::new(vec![1.0, 1.0], [], 0.0).unwrap();
        // Energies: 00 -> 2, 01 -> 0, 10 -> 0, 11 -> -2. Ground = 11.
        let g = brute_force_solve(&m).unwrap();
        assert_eq!(g.bitstrings, vec![0b11]);
        let d = OutcomeDistribution::from_dense(2, &[0.25, 0.25, 0.25, 0.25]);
        assert_eq!(success_probability(&d, &g), 0.25);
        let ar = approximation_ratio(&d, &m).unwrap();
        assert_eq!(ar, 0.0); // mean energy 0 over ground -2
        assert_eq!(d.most_probable(), Some((0, 0.25)));
    }

    #[test]
    fn approximation_ratio_rejects_zero_ground_energy() {
        // Offset shifts the ground energy to exactly zero.
        let m = IsingModel::new(vec![1.0], [], 1.0).unwrap();
        let d = OutcomeDistribution::from_dense(1, &[1.0, 0.0]);
        match approximation_ratio(&d, &m) {
            Err(Error::UndefinedApproximationRatio { average_energy }) => {
                assert_eq!(average_energy, 2.0)
            }
            other => panic!("expected undefined ratio, got {other:?}"),
        }
    }

    #[test]
    fn spin_glass_draws_are_reproducible_and_in_range() {
        let a = random_spin_glass(8, 42).unwrap();
        let b = random_spin_glass(8, 42).unwrap();
        assert_eq!(a.h(), b.h());
        assert_eq!(
            a.couplings().collect::<Vec<_>>(),
            b.couplings().collect::<Vec<_>>()
        );
        assert!(a.h().iter().all(|v| v.abs() < 1.0));
        assert!(a.couplings().all(|(_, v)| v.abs() < 1.0));
        assert_eq!(a.coupling_count(), 28);
        let c = random_spin_glass(8, 43).unwrap();
        assert_ne!(a.h(), c.h());
    }

    #[test]
    fn qubo_text_round_trips() {
        let src = "# objective\n3\n0 0 -1.5\n0 1 2\n1 2 0.5 # cross term\n";
        let q = read_qubo_text(src).unwrap();
        assert_eq!(q.n(), 3);
        assert_eq!(q.entry(0, 0), -1.5);
        assert_eq!(q.entry(0, 1), 1.0); // half of the cross term on each side
        assert_eq!(q.value(&[true, true, false]), -1.5 + 2.0);
        let text = write_qubo_text(&q);
        let q2 = read_qubo_text(&text).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(q.entry(i, j), q2.entry(i, j));
            }
        }
    }

    #[test]
    fn qubo_text_rejects_malformed_input() {
        assert!(matches!(
            read_qubo_text("2\n1 0 3.0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_qubo_text("2\n0 1 1.0\n0 1 2.0\n"),
            Err(Error::DuplicateEntry { i: 0, j: 1 })
        ));
        assert!(matches!(
            read_qubo_text("2\n0 5 1.0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(read_qubo_text("# nothing\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            read_qubo_text("2\n0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn from_matrix_enforces_symmetry() {
        let rows = vec![vec![1.0, 0.5], vec![0.4, 2.0]];
        assert!(matches!(
            QuboProblem::from_matrix(&rows),
            Err(Error::AsymmetricMatrix { .. })
        ));
        let rows = vec![vec![1.0, 0.5], vec![0.5, 2.0]];
        let q = QuboProblem::from_matrix(&rows).unwrap();
        assert_eq!(q.entry(1, 0), 0.5);
    }

    #[test]
    fn serde_round_trips_models() {
        let q = random_qubo(4, 9);
        let json = serde_json::to_string(&q).unwrap();
        let q2: QuboProblem = serde_json::from_str(&json).unwrap();
        for idx in 0..16 {
            assert_eq!(q.value_of_index(idx), q2.value_of_index(idx));
        }
        let m = qubo_to_ising(&q);
        let json = serde_json::to_string(&m).unwrap();
        let m2: IsingModel = serde_json::from_str(&json).unwrap();
        for idx in 0..16 {
            assert_eq!(m.energy_of_index(idx), m2.energy_of_index(idx));
        }
    }
}
