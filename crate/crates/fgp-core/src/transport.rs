//! Discrete optimal couplings for the four cost families, an exhaustive
//! oracle, cyclical-monotonicity checking, and coupling-to-portfolio
//! constructions.
//!
//! Costs (all minimized):
//!
//! * `LogPartition`: `c(mu, h) = log sum_i e^{h_i} mu_i` on simplex x
//!   extended targets (`-inf` entries knock stocks out);
//! * `ExpShift`: `c(theta, phi) = psi(theta - phi)` on exponential
//!   coordinates;
//! * `NegEntropy`: `c(p, q) = -sum_i q_i log(q_i / p_i)` (minus the
//!   relative entropy), `+inf` when `q` charges a coordinate `p` lacks;
//! * `Quadratic`: squared Euclidean distance.
//!
//! [`solve_discrete`] runs an exact scaled-integer network simplex whose
//! tie-break makes the optimal support unique and reproducible;
//! [`brute_force_solve`] enumerates permutations for equal-size uniform
//! marginals and serves as the solver's oracle; on ties both resolve to
//! the same support, so optimal values match bit for bit.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::calculus::PortfolioMap;
use crate::error::{Error, Result};
use crate::minflow::{self, FlowProblem, PairCost};
use crate::simplex::{from_exponential, psi, to_exponential, ExpCoord, SimplexPoint};

/// Cost values are scaled by this factor and rounded to integers before
/// pivoting, so optimality decisions are exact at 1e-12 resolution.
pub const COST_SCALE: f64 = 1e12;

/// Largest cost magnitude the integer scaling accepts.
pub const MAX_COST_MAGNITUDE: f64 = 1e6;

/// Marginal tolerance for couplings.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Violation tolerance of the cyclical-monotonicity check.
pub const C_MONOTONE_TOL: f64 = 1e-9;

/// A finitely supported probability measure on points of a common
/// dimension.  Entries may be `-inf` (extended targets); atoms must be
/// pairwise distinct.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Shape("a measure needs at least one atom"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::Shape("atom and weight counts differ"));
        }
        let d = atoms[0].len();
        if d == 0 {
            return Err(Error::Shape("atoms need at least one coordinate"));
        }
        for a in &atoms {
            if a.len() != d {
                return Err(Error::Shape("atoms of different dimension"));
            }
            if a.iter().any(|c| c.is_nan() || *c == f64::INFINITY) {
                return Err(Error::Domain("atom coordinates must be finite or -inf"));
            }
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if atoms[i] == atoms[j] {
                    return Err(Error::Argument("atoms must be pairwise distinct"));
                }
            }
        }
        let mut sum = 0.0;
        for &w in &weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Domain("weights must be nonnegative and finite"));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("weights must sum to 1 within 1e-12"));
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Equal weights `1/k` on the given atoms.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let k = atoms.len();
        if k == 0 {
            return Err(Error::Shape("a measure needs at least one atom"));
        }
        Self::new(atoms, vec![1.0 / k as f64; k])
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    /// True when every weight equals `1/len` exactly.
    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&x| x == w)
    }
}

/// Which transport cost to optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    LogPartition,
    ExpShift,
    NegEntropy,
    Quadratic,
}

/// Evaluate one cost.  `+inf` marks an infeasible pairing (the solver
/// masks it); malformed domains are errors.
pub fn cost(kind: CostKind, x: &[f64], y: &[f64]) -> Result<f64> {
    match kind {
        CostKind::LogPartition => {
            if x.len() != y.len() {
                return Err(Error::Shape("cost arguments of different dimension"));
            }
            if x.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
                return Err(Error::Domain("weights side must be nonnegative and finite"));
            }
            if y.iter().all(|&h| h == f64::NEG_INFINITY) {
                return Err(Error::Argument("target must keep at least one finite entry"));
            }
            // log sum_i e^{y_i} x_i, stably: shift by the largest finite
            // exponent y_i + log x_i.
            let mut best = f64::NEG_INFINITY;
            let terms: Vec<f64> = x
                .iter()
                .zip(y)
                .map(|(&xi, &yi)| {
                    let t = if xi > 0.0 { yi + xi.ln() } else { f64::NEG_INFINITY };
                    if t > best {
                        best = t;
                    }
                    t
                })
                .collect();
            if best == f64::NEG_INFINITY {
                return Err(Error::Argument(
                    "every surviving entry has zero weight; the partition sum vanishes",
                ));
            }
            let mut s = 0.0;
            for t in terms {
                if t > f64::NEG_INFINITY {
                    s += (t - best).exp();
                }
            }
            Ok(best + s.ln())
        }
        CostKind::ExpShift => {
            let theta = ExpCoord::new(x.to_vec())?;
            let phi = ExpCoord::new(y.to_vec())?;
            Ok(psi(&theta.sub(&phi)?))
        }
        CostKind::NegEntropy => {
            if x.len() != y.len() {
                return Err(Error::Shape("cost arguments of different dimension"));
            }
            if x.iter().chain(y).any(|&c| !(c >= 0.0) || !c.is_finite()) {
                return Err(Error::Domain("entropy cost needs nonnegative finite weights"));
            }
            let mut kl = 0.0;
            for (&p, &q) in x.iter().zip(y) {
                if q > 0.0 {
                    if p == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    kl += q * (q / p).ln();
                }
            }
            Ok(-kl)
        }
        CostKind::Quadratic => {
            if x.len() != y.len() {
                return Err(Error::Shape("cost arguments of different dimension"));
            }
            if x.iter().chain(y).any(|c| !c.is_finite()) {
                return Err(Error::Domain("quadratic cost needs finite coordinates"));
            }
            Ok(x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum())
        }
    }
}

/// A coupling of two discrete measures: positive masses on source-target
/// index pairs, plus the total cost it pays.
#[derive(Debug, Clone)]
pub struct Coupling {
    entries: Vec<(usize, usize, f64)>,
    value: f64,
}

impl Coupling {
    /// `(source index, target index, mass)` triples, sorted by indices.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Total expected cost in the same units as [`cost`].
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Largest deviation of a row or column sum from the marginals.
    pub fn marginal_residual(&self, p: &DiscreteMeasure, q: &DiscreteMeasure) -> f64 {
        let mut rows = vec![0.0; p.len()];
        let mut cols = vec![0.0; q.len()];
        for &(i, j, mass) in &self.entries {
            rows[i] += mass;
            cols[j] += mass;
        }
        let r = rows
            .iter()
            .zip(p.weights())
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max);
        let c = cols
            .iter()
            .zip(q.weights())
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max);
        r.max(c)
    }

    /// The support as explicit `(x, y)` atom pairs.
    pub fn support_pairs(&self, p: &DiscreteMeasure, q: &DiscreteMeasure) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.entries
            .iter()
            .map(|&(i, j, _)| (p.atoms()[i].clone(), q.atoms()[j].clone()))
            .collect()
    }
}

/// Scaled-integer cost matrix with masks; shared by solver and oracle so
/// their optimality decisions agree exactly.
struct CostMatrix {
    reals: Vec<f64>,
    ints: Vec<Option<i128>>,
    m: usize,
    n: usize,
}

fn build_cost_matrix(p: &DiscreteMeasure, q: &DiscreteMeasure, kind: CostKind) -> Result<CostMatrix> {
    let (m, n) = (p.len(), q.len());
    let mut reals = Vec::with_capacity(m * n);
    let mut ints = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let c = cost(kind, &p.atoms()[i], &q.atoms()[j])?;
            if c == f64::INFINITY {
                reals.push(f64::INFINITY);
                ints.push(None);
                continue;
            }
            if !c.is_finite() {
                return Err(Error::Domain("cost evaluated to NaN or -inf"));
            }
            if c.abs() > MAX_COST_MAGNITUDE {
                return Err(Error::Domain("cost magnitude exceeds the exact scaling range"));
            }
            reals.push(c);
            ints.push(Some((c * COST_SCALE).round() as i128));
        }
    }
    Ok(CostMatrix { reals, ints, m, n })
}

/// Tie-break weight of arc `(i, j)`: strictly monotone in the arc id and,
/// for grids up to 120 arcs, a distinct power of two, which makes the
/// total tie-break separate every pair of distinct supports.
fn tie_break(id: usize, arcs: usize) -> i128 {
    if arcs <= 120 {
        1i128 << id
    } else {
        id as i128 + 1
    }
}

/// Exact optimal coupling between two discrete measures.
///
/// Pivoting compares integer pairs (scaled cost, tie-break), so repeated
/// runs return the identical coupling, and for at most 120 arcs the
/// optimal support is the unique tie-break-minimal one among optima.
pub fn solve_discrete(p: &DiscreteMeasure, q: &DiscreteMeasure, kind: CostKind) -> Result<Coupling> {
    let cm = build_cost_matrix(p, q, kind)?;
    let arcs = cm.m * cm.n;
    let costs: Vec<Option<PairCost>> = cm
        .ints
        .iter()
        .enumerate()
        .map(|(id, c)| c.map(|v| PairCost(v, tie_break(id, arcs))))
        .collect();
    let sol = minflow::solve(&FlowProblem {
        supplies: p.weights().to_vec(),
        demands: q.weights().to_vec(),
        costs,
    })?;
    let mut entries = Vec::new();
    let mut value = 0.0;
    for i in 0..cm.m {
        for j in 0..cm.n {
            let mass = sol.flows[i * cm.n + j];
            if mass > 0.0 {
                entries.push((i, j, mass));
                value += mass * cm.reals[i * cm.n + j];
            }
        }
    }
    let coupling = Coupling { entries, value };
    if coupling.marginal_residual(p, q) > MARGINAL_TOL {
        return Err(Error::NumericDegeneracy("solved coupling drifted off its marginals"));
    }
    Ok(coupling)
}

/// Largest instance the permutation oracle accepts.
pub const BRUTE_FORCE_MAX_ATOMS: usize = 8;

/// Exhaustive oracle: equal-size uniform marginals only, every
/// permutation enumerated, the scaled-integer objective compared with the
/// same tie-break as [`solve_discrete`], so values and supports agree
/// exactly with it.
pub fn brute_force_solve(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    kind: CostKind,
) -> Result<Coupling> {
    let k = p.len();
    if q.len() != k {
        return Err(Error::Argument("oracle needs equal-size marginals"));
    }
    if k > BRUTE_FORCE_MAX_ATOMS {
        return Err(Error::Argument("oracle instance too large"));
    }
    if !p.is_uniform() || !q.is_uniform() {
        return Err(Error::Argument("oracle needs uniform marginals"));
    }
    let cm = build_cost_matrix(p, q, kind)?;
    let arcs = k * k;
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best: Option<(PairCost, Vec<usize>)> = None;
    loop {
        let mut total = PairCost(0, 0);
        let mut feasible = true;
        for (i, &j) in perm.iter().enumerate() {
            match cm.ints[i * k + j] {
                Some(c) => total = total + PairCost(c, tie_break(i * k + j, arcs)),
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible && best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let Some((_, assignment)) = best else {
        return Err(Error::Infeasible("masked cost pattern admits no feasible coupling"));
    };
    let mass = 1.0 / k as f64;
    let mut entries = Vec::with_capacity(k);
    let mut value = 0.0;
    for (i, &j) in assignment.iter().enumerate() {
        entries.push((i, j, mass));
        value += mass * cm.reals[i * k + j];
    }
    Ok(Coupling { entries, value })
}

/// Lexicographic successor in place; false once the last permutation is
/// reached.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    let k = perm.len();
    if k < 2 {
        return false;
    }
    let mut i = k - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = k - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Outcome of the exhaustive cyclical-monotonicity check.
#[derive(Debug, Clone)]
pub struct CMonotoneReport {
    /// Indices into the support, in cycle order, whose rearrangement is
    /// strictly cheaper; empty when the support passes.
    pub violation: Option<Vec<usize>>,
    /// How much the rearrangement saves, when a violation exists.
    pub improvement: f64,
}

impl CMonotoneReport {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Largest cycle length [`check_c_monotone`] accepts.
pub const C_MONOTONE_MAX_CYCLE: usize = 5;

/// Exhaustively test every cycle of length `2..=max_m` over support
/// pairs: optimality requires
/// `sum_t c(x_t, y_t) <= sum_t c(x_{t+1}, y_t)` (indices cyclic).  A
/// cycle whose shifted sum is cheaper by more than [`C_MONOTONE_TOL`] is
/// returned as a violation.  A necessary condition, not a full
/// certificate: cycles longer than `max_m` are not examined.
pub fn check_c_monotone(
    support: &[(Vec<f64>, Vec<f64>)],
    kind: CostKind,
    max_m: usize,
) -> Result<CMonotoneReport> {
    if support.is_empty() {
        return Err(Error::Shape("support must be nonempty"));
    }
    if !(2..=C_MONOTONE_MAX_CYCLE).contains(&max_m) {
        return Err(Error::Argument("cycle length cap must lie in 2..=5"));
    }
    let k = support.len();
    // Cross-cost cache over the support (entries may be +inf).
    let mut cross = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            cross[a * k + b] = cost(kind, &support[a].0, &support[b].1)?;
        }
    }
    for m in 2..=max_m.min(k) {
        for start in 0..k {
            let mut prefix = vec![start];
            if let Some(report) = search_cycles(&cross, k, m, &mut prefix) {
                return Ok(report);
            }
        }
    }
    Ok(CMonotoneReport { violation: None, improvement: 0.0 })
}

/// Depth-first enumeration of ordered index tuples whose smallest index
/// comes first, so each cyclic class is visited exactly once.
fn search_cycles(
    cross: &[f64],
    k: usize,
    m: usize,
    prefix: &mut Vec<usize>,
) -> Option<CMonotoneReport> {
    if prefix.len() == m {
        let own: f64 = prefix.iter().map(|&a| cross[a * k + a]).sum();
        let mut shifted = 0.0;
        for t in 0..m {
            shifted += cross[prefix[(t + 1) % m] * k + prefix[t]];
        }
        if own > shifted + C_MONOTONE_TOL {
            return Some(CMonotoneReport {
                violation: Some(prefix.clone()),
                improvement: own - shifted,
            });
        }
        return None;
    }
    let first = prefix[0];
    for cand in first + 1..k {
        if prefix.contains(&cand) {
            continue;
        }
        prefix.push(cand);
        if let Some(r) = search_cycles(cross, k, m, prefix) {
            return Some(r);
        }
        prefix.pop();
    }
    None
}

/// Portfolio of a target-selection rule `mu -> h(mu)`:
/// `pi_i = mu_i e^{h_i} / sum_j mu_j e^{h_j}` (`e^{-inf} = 0`).
pub fn portfolio_from_coupling<F>(h: F) -> PortfolioMap
where
    F: Fn(&SimplexPoint) -> Result<Vec<f64>> + Send + Sync + 'static,
{
    PortfolioMap::from_fn(None, false, move |p| {
        let hv = h(p)?;
        if hv.len() != p.n() {
            return Err(Error::Shape("target dimension does not match the point"));
        }
        if hv.iter().any(|c| c.is_nan() || *c == f64::INFINITY) {
            return Err(Error::Domain("targets must be finite or -inf"));
        }
        let mut best = f64::NEG_INFINITY;
        let logs: Vec<f64> = p
            .coords()
            .iter()
            .zip(&hv)
            .map(|(&mu, &hi)| {
                let t = if mu > 0.0 { hi + mu.ln() } else { f64::NEG_INFINITY };
                if t > best {
                    best = t;
                }
                t
            })
            .collect();
        if best == f64::NEG_INFINITY {
            return Err(Error::Domain("change of measure wipes out every stock"));
        }
        let mut weights: Vec<f64> = logs
            .iter()
            .map(|&t| if t > f64::NEG_INFINITY { (t - best).exp() } else { 0.0 })
            .collect();
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        SimplexPoint::closed(weights)
    })
}

/// Portfolio of an exponential-coordinate shift `theta -> phi(theta)`:
/// the allocation whose coordinates are `theta - phi(theta)`.  Weights
/// are strictly positive.
pub fn portfolio_from_exp_shift<F>(phi: F) -> PortfolioMap
where
    F: Fn(&ExpCoord) -> Result<ExpCoord> + Send + Sync + 'static,
{
    PortfolioMap::from_fn(None, false, move |p| {
        let theta = to_exponential(p)?;
        let shifted = theta.sub(&phi(&theta)?)?;
        Ok(from_exponential(&shifted)?.into_closed())
    })
}

/// The negative-entropy problem rewritten as a quadratic one.
#[derive(Debug, Clone)]
pub struct EntropyQuadraticReduction {
    /// Source atoms mapped through `zeta = -log mu`, carrying P's weights.
    pub zeta: DiscreteMeasure,
    /// Optimal coupling of the quadratic problem on (Q, zeta), indices
    /// `(target side, source side)` as solved.
    pub quadratic: Coupling,
    /// The same support mapped back to `(source, target)` indices with
    /// the negative-entropy objective it pays.
    pub entropy: Coupling,
}

/// Rewrite `NegEntropy` transport from `p` to `q` as a `Quadratic`
/// problem between `q` and the pushforward of `p` under `-log`: the two
/// objectives differ only by terms depending on one marginal at a time,
/// so the optimal couplings coincide.  Both are reported.
pub fn entropy_to_quadratic(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
) -> Result<EntropyQuadraticReduction> {
    if p.atoms().iter().any(|a| a.iter().any(|&c| c <= 0.0)) {
        return Err(Error::Domain("source atoms must be strictly positive"));
    }
    let zeta_atoms: Vec<Vec<f64>> =
        p.atoms().iter().map(|a| a.iter().map(|&c| -c.ln()).collect()).collect();
    let zeta = DiscreteMeasure::new(zeta_atoms, p.weights().to_vec())?;
    let quadratic = solve_discrete(q, &zeta, CostKind::Quadratic)?;
    let mut entries: Vec<(usize, usize, f64)> = quadratic
        .entries()
        .iter()
        .map(|&(jq, ip, mass)| (ip, jq, mass))
        .collect();
    entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut value = 0.0;
    for &(i, j, mass) in &entries {
        value += mass * cost(CostKind::NegEntropy, &p.atoms()[i], &q.atoms()[j])?;
    }
    let entropy = Coupling { entries, value };
    Ok(EntropyQuadraticReduction { zeta, quadratic, entropy })
}
