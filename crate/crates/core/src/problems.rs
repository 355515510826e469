//! Problem generators and classical solvers: traveling-salesperson
//! instances with their one-hot quadratic encoding, random dense quadratic
//! programs, and a decomposition-based large-neighborhood-search solver.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{QuboProblem, BRUTE_FORCE_LIMIT};

// ---------------------------------------------------------------------------
// Traveling salesperson
// ---------------------------------------------------------------------------

/// A symmetric traveling-salesperson instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TspSerde", into = "TspSerde")]
pub struct TspInstance {
    n: usize,
    /// Row-major `n × n` distance matrix.
    distances: Vec<f64>,
    /// Optional constraint-penalty override for the quadratic encoding.
    penalty: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TspSerde {
    Matrix {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cities: Option<usize>,
        distances: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        penalty: Option<f64>,
    },
    Coordinates {
        coordinates: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        penalty: Option<f64>,
    },
}

impl TryFrom<TspSerde> for TspInstance {
    type Error = Error;

    fn try_from(raw: TspSerde) -> Result<Self> {
        match raw {
            TspSerde::Matrix { cities, distances, penalty } => {
                if let Some(c) = cities {
                    if c != distances.len() {
                        return Err(Error::DimensionMismatch {
                            context: "tsp city count",
                            expected: c,
                            actual: distances.len(),
                        });
                    }
                }
                let mut inst = TspInstance::from_matrix(&distances)?;
                inst.penalty = penalty;
                Ok(inst)
            }
            TspSerde::Coordinates { coordinates, penalty } => {
                let mut inst = TspInstance::from_coordinates(&coordinates)?;
                inst.penalty = penalty;
                Ok(inst)
            }
        }
    }
}

impl From<TspInstance> for TspSerde {
    fn from(inst: TspInstance) -> Self {
        let rows = (0..inst.n)
            .map(|i| inst.distances[i * inst.n..(i + 1) * inst.n].to_vec())
            .collect();
        TspSerde::Matrix {
            cities: Some(inst.n),
            distances: rows,
            penalty: inst.penalty,
        }
    }
}

impl TspInstance {
    /// Builds an instance from a symmetric distance matrix with a zero
    /// diagonal and nonnegative entries.
    #[allow(clippy::needless_range_loop)] // cross-indexed: rows[i][j] vs rows[j][i]
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "a tour needs at least two cities".into(),
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "tsp distance row",
                    expected: n,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "distance ({i}, {j}) must be finite and nonnegative, got {v}"
                    )));
                }
            }
        }
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "distance ({i}, {i}) must be zero, got {}",
                    rows[i][i]
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::AsymmetricMatrix { i, j, a, b });
                }
            }
        }
        let mut distances = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // Store the symmetrized value so lookups in either order agree.
                distances[i * n + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        Ok(TspInstance { n, distances, penalty: None })
    }

    /// Builds an instance from planar city coordinates using Euclidean
    /// distances.
    pub fn from_coordinates(points: &[[f64; 2]]) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "a tour needs at least two cities".into(),
            ));
        }
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {i} must be finite"
                )));
            }
        }
        let mut distances = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let dx = points[i][0] - points[j][0];
                let dy = points[i][1] - points[j][1];
                distances[i * n + j] = (dx * dx + dy * dy).sqrt();
            }
        }
        Ok(TspInstance { n, distances, penalty: None })
    }

    /// Instance in which every pair of cities is `distance` apart, so every
    /// tour is optimal.
    pub fn equal_distances(n: usize, distance: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { distance }).collect())
            .collect();
        TspInstance::from_matrix(&rows)
    }

    /// Number of cities.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Distance between two cities.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        assert!(a < self.n && b < self.n, "city index out of range");
        self.distances[a * self.n + b]
    }

    /// Largest intercity distance.
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().cloned().fold(0.0, f64::max)
    }

    /// Overrides the constraint penalty used by [`tsp_to_qubo`].
    pub fn with_penalty(mut self, penalty: f64) -> Result<Self> {
        if !penalty.is_finite() || penalty <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty must be positive and finite, got {penalty}"
            )));
        }
        self.penalty = Some(penalty);
        Ok(self)
    }

    /// The constraint penalty: the stored override, or `n · max_distance`.
    ///
    /// The default is strong enough that every assignment violating a
    /// one-hot constraint costs more than any valid tour: a violated
    /// constraint adds at least the penalty, while a tour's length is at
    /// most `n · max_distance`.
    pub fn penalty(&self) -> f64 {
        self.penalty
            .unwrap_or_else(|| self.n as f64 * self.max_distance())
    }

    /// Length of the cyclic tour visiting `order[0], order[1], …` and
    /// returning to the start.
    pub fn tour_length(&self, order: &[usize]) -> Result<f64> {
        if order.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "tour length",
                expected: self.n,
                actual: order.len(),
            });
        }
        let mut seen = vec![false; self.n];
        for &c in order {
            if c >= self.n {
                return Err(Error::IndexOutOfRange {
                    context: "tour city",
                    index: c,
                    size: self.n,
                });
            }
            if seen[c] {
                return Err(Error::InvalidArgument(format!(
                    "tour visits city {c} twice"
                )));
            }
            seen[c] = true;
        }
        let mut total = 0.0;
        for t in 0..self.n {
            total += self.distance(order[t], order[(t + 1) % self.n]);
        }
        Ok(total)
    }
}

/// Encodes a tour instance as a quadratic binary program over `n²`
/// variables with the one-hot layout `variable(t, c) = t·n + c` (“city `c`
/// is visited at time `t`”). The offset is chosen so the program's value on
/// a valid tour equals the tour length exactly.
pub fn tsp_to_qubo(inst: &TspInstance) -> QuboProblem {
    let n = inst.n;
    let a = inst.penalty();
    let mut q = QuboProblem::zeros(n * n);

    // Tour-length objective: city c1 at time t followed by city c2 at time
    // t + 1 contributes distance(c1, c2). Each add() below contributes the
    // monomial coefficient of x_u · x_v, which splits evenly across the two
    // mirror entries of the symmetric matrix.
    for t in 0..n {
        let t_next = (t + 1) % n;
        for c1 in 0..n {
            for c2 in 0..n {
                if c1 == c2 {
                    continue;
                }
                q.add(t * n + c1, t_next * n + c2, 0.5 * inst.distance(c1, c2));
            }
        }
    }

    // One-hot constraints, each expanded from penalty · (1 − Σ x)².
    // Rows: every time step hosts exactly one city. Columns: every city is
    // visited exactly once. The constant term of each goes to the offset.
    for t in 0..n {
        for c1 in 0..n {
            q.add(t * n + c1, t * n + c1, -a);
            for c2 in (c1 + 1)..n {
                q.add(t * n + c1, t * n + c2, a);
            }
        }
    }
    for c in 0..n {
        for t1 in 0..n {
            q.add(t1 * n + c, t1 * n + c, -a);
            for t2 in (t1 + 1)..n {
                q.add(t1 * n + c, t2 * n + c, a);
            }
        }
    }
    q.offset = 2.0 * a * n as f64;
    q
}

/// Decodes a one-hot assignment back into a tour. Returns `None` when any
/// time step or city breaks the one-hot constraints.
pub fn decode_tsp(bits: u64, n: usize) -> Option<Vec<usize>> {
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for t in 0..n {
        let mut city = None;
        for c in 0..n {
            if (bits >> (t * n + c)) & 1 == 1 {
                if city.is_some() {
                    return None;
                }
                city = Some(c);
            }
        }
        let c = city?;
        if used[c] {
            return None;
        }
        used[c] = true;
        order.push(c);
    }
    Some(order)
}

/// Packs a tour into the one-hot bit layout used by [`tsp_to_qubo`].
pub fn encode_tour(order: &[usize]) -> u64 {
    let n = order.len();
    assert!(n * n <= 64, "one-hot encoding exceeds 64 bits");
    let mut bits = 0u64;
    for (t, &c) in order.iter().enumerate() {
        assert!(c < n, "city index out of range");
        bits |= 1 << (t * n + c);
    }
    bits
}

// ---------------------------------------------------------------------------
// Random dense instances
// ---------------------------------------------------------------------------

/// A reproducible dense quadratic binary program: every diagonal and
/// upper-triangle entry is drawn uniformly from `(-1, 1)` from a
/// stream-cipher generator seeded by `seed`.
pub fn dense_qubo_instance(n: usize, seed: u64) -> QuboProblem {
    let mut q = QuboProblem::zeros(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        for j in i..n {
            q.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    q
}

// ---------------------------------------------------------------------------
// Decomposition and large-neighborhood search
// ---------------------------------------------------------------------------

/// How variables are grouped into subproblems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecomposeStrategy {
    /// Grow each group around the most strongly coupled remaining
    /// variables, so tightly interacting variables are re-optimized
    /// together.
    GreedyCoupling,
    /// Consecutive index blocks.
    Sequential,
}

/// One subproblem of a decomposition: a self-contained quadratic program
/// over `vars.len()` local variables. Local variable `k` stands for global
/// variable `vars[k]`; the diagonal and offset absorb the frozen
/// complement, so the subproblem's value on any local assignment equals the
/// full program's value on the corresponding patched global assignment.
#[derive(Clone, Debug)]
pub struct SubProblem {
    pub qubo: QuboProblem,
    /// Global indices, ascending.
    pub vars: Vec<usize>,
}

impl SubProblem {
    /// Writes a local assignment back into a global one.
    pub fn inject(&self, mut global: u64, local: u64) -> u64 {
        for (k, &v) in self.vars.iter().enumerate() {
            global &= !(1u64 << v);
            global |= ((local >> k) & 1) << v;
        }
        global
    }

    /// Extracts this subproblem's bits from a global assignment.
    pub fn extract(&self, global: u64) -> u64 {
        let mut local = 0u64;
        for (k, &v) in self.vars.iter().enumerate() {
            local |= ((global >> v) & 1) << k;
        }
        local
    }
}

fn check_packed_width(q: &QuboProblem, context: &'static str) -> Result<()> {
    if q.n() > 64 {
        return Err(Error::TooManyVariables {
            context,
            n: q.n(),
            limit: 64,
        });
    }
    Ok(())
}

/// Partitions the variable set into groups of at most `group_size`.
fn group_variables(
    q: &QuboProblem,
    group_size: usize,
    strategy: DecomposeStrategy,
) -> Vec<Vec<usize>> {
    let n = q.n();
    match strategy {
        DecomposeStrategy::Sequential => (0..n)
            .collect::<Vec<_>>()
            .chunks(group_size)
            .map(|c| c.to_vec())
            .collect(),
        DecomposeStrategy::GreedyCoupling => {
            let weight = |u: usize, v: usize| q.entry(u, v).abs();
            let mut unassigned: BTreeSet<usize> = (0..n).collect();
            let mut groups = Vec::new();
            while !unassigned.is_empty() {
                // Seed with the unassigned variable carrying the most
                // remaining coupling weight; ties go to the lowest index.
                let seed = *unassigned
                    .iter()
                    .max_by(|&&a, &&b| {
                        let wa: f64 = unassigned
                            .iter()
                            .map(|&v| if v != a { weight(a, v) } else { 0.0 })
                            .sum();
                        let wb: f64 = unassigned
                            .iter()
                            .map(|&v| if v != b { weight(b, v) } else { 0.0 })
                            .sum();
                        wa.total_cmp(&wb).then(b.cmp(&a))
                    })
                    .expect("nonempty unassigned set");
                unassigned.remove(&seed);
                let mut group = vec![seed];
                while group.len() < group_size && !unassigned.is_empty() {
                    let next = *unassigned
                        .iter()
                        .max_by(|&&a, &&b| {
                            let wa: f64 = group.iter().map(|&g| weight(a, g)).sum();
                            let wb: f64 = group.iter().map(|&g| weight(b, g)).sum();
                            wa.total_cmp(&wb).then(b.cmp(&a))
                        })
                        .expect("nonempty unassigned set");
                    unassigned.remove(&next);
                    group.push(next);
                }
                group.sort_unstable();
                groups.push(group);
            }
            groups
        }
    }
}

/// Splits a quadratic program into subproblems of at most `group_size`
/// variables, conditioning each on the `incumbent` values of the variables
/// outside it. Interactions with frozen variables fold into the local
/// diagonal, and the frozen part's value folds into the local offset, so
/// each subproblem reproduces full-program values exactly.
pub fn decompose_qubo(
    q: &QuboProblem,
    group_size: usize,
    strategy: DecomposeStrategy,
    incumbent: u64,
) -> Result<Vec<SubProblem>> {
    check_packed_width(q, "decompose_qubo")?;
    if group_size == 0 {
        return Err(Error::InvalidArgument("group size must be positive".into()));
    }
    let groups = group_variables(q, group_size, strategy);
    let mut subs = Vec::with_capacity(groups.len());
    for vars in groups {
        let k = vars.len();
        let in_group = |u: usize| vars.binary_search(&u).is_ok();
        let mut sub = QuboProblem::zeros(k);
        for (a, &u) in vars.iter().enumerate() {
            // Frozen neighbors shift the effective linear term: with x_w
            // fixed, the cross term 2·Q_uw·x_u·x_w is linear in x_u.
            let mut diag = q.entry(u, u);
            for w in 0..q.n() {
                if w != u && !in_group(w) && (incumbent >> w) & 1 == 1 {
                    diag += 2.0 * q.entry(u, w);
                }
            }
            sub.set(a, a, diag);
            for (b, &v) in vars.iter().enumerate().skip(a + 1) {
                let c = q.entry(u, v);
                if c != 0.0 {
                    sub.set(a, b, c);
                }
            }
        }
        // The value of the incumbent with this group cleared covers the
        // frozen-frozen interactions and the original offset.
        let mut cleared = incumbent;
        for &v in &vars {
            cleared &= !(1u64 << v);
        }
        sub.offset = q.value_of_index(cleared);
        subs.push(SubProblem { qubo: sub, vars });
    }
    Ok(subs)
}

/// Best-improvement local descent by single-bit flips. Ties pick the lowest
/// variable index; the returned assignment admits no improving flip.
pub fn greedy_descent(q: &QuboProblem, start: u64) -> Result<(u64, f64)> {
    check_packed_width(q, "greedy_descent")?;
    let n = q.n();
    let mut bits = start;
    loop {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            let xi = (bits >> i) & 1;
            let sign = 1.0 - 2.0 * xi as f64;
            let mut slope = q.entry(i, i);
            for j in 0..n {
                if j != i && (bits >> j) & 1 == 1 {
                    slope += 2.0 * q.entry(i, j);
                }
            }
            let delta = sign * slope;
            if delta < -1e-12 && best.is_none_or(|(d, _)| delta < d) {
                best = Some((delta, i));
            }
        }
        match best {
            Some((_, i)) => bits ^= 1 << i,
            None => break,
        }
    }
    Ok((bits, q.value_of_index(bits)))
}

/// Exhaustively minimizes a small quadratic program, breaking ties toward
/// the lowest assignment index.
pub fn brute_force_qubo(q: &QuboProblem) -> Result<(u64, f64)> {
    if q.n() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyVariables {
            context: "brute_force_qubo",
            n: q.n(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best_bits = 0u64;
    let mut best_value = q.value_of_index(0);
    for idx in 1..(1u64 << q.n()) {
        let v = q.value_of_index(idx);
        if v < best_value {
            best_value = v;
            best_bits = idx;
        }
    }
    Ok((best_bits, best_value))
}

/// Record of a large-neighborhood-search run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LnsOutcome {
    /// Best assignment found.
    pub bits: u64,
    /// Its value.
    pub value: f64,
    /// Best value after initialization and after each sweep; nonincreasing.
    pub trace: Vec<f64>,
    /// Sweeps executed (including the final no-improvement sweep).
    pub sweeps: usize,
}

/// Large-neighborhood search: initialize with greedy descent from the
/// all-zeros assignment, then repeatedly re-decompose around the incumbent
/// and exactly re-optimize each subproblem, keeping changes only when they
/// improve. Stops after a sweep with no improvement or after `max_sweeps`.
pub fn lns_solve(
    q: &QuboProblem,
    group_size: usize,
    strategy: DecomposeStrategy,
    max_sweeps: usize,
) -> Result<LnsOutcome> {
    check_packed_width(q, "lns_solve")?;
    if group_size == 0 || group_size > BRUTE_FORCE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "group size must be in 1..={BRUTE_FORCE_LIMIT}, got {group_size}"
        )));
    }
    if max_sweeps == 0 {
        return Err(Error::InvalidArgument("need at least one sweep".into()));
    }

    let (mut bits, mut value) = greedy_descent(q, 0)?;
    let mut trace = vec![value];
    let mut sweeps = 0usize;

    for _ in 0..max_sweeps {
        sweeps += 1;
        let before = value;
        // Earlier acceptances within a sweep stale-date the remaining
        // subproblems (they were conditioned on the sweep-opening
        // incumbent), so each proposal is re-scored against the full
        // program before acceptance.
        for sub in decompose_qubo(q, group_size, strategy, bits)? {
            let (local, _) = brute_force_qubo(&sub.qubo)?;
            let candidate = sub.inject(bits, local);
            let candidate_value = q.value_of_index(candidate);
            if candidate_value < value - 1e-12 {
                bits = candidate;
                value = candidate_value;
            }
        }
        trace.push(value);
        if value >= before - 1e-12 {
            break;
        }
    }
    Ok(LnsOutcome { bits, value, trace, sweeps })
}
