//! Discrete-time evolution of portfolio value relative to the market.
//!
//! Given a sequence of market weights, [`relative_value`] compounds the
//! per-period return of an allocation rule against the market,
//! [`fernholz_decompose`] splits the log relative value of a generated
//! rule into a potential term plus a nondecreasing drift, and the
//! multiplicative-cyclical-monotonicity (MCM) utilities certify or refute
//! the `>= 1` cycle-product property: [`cycle_log_value`] evaluates one
//! cycle, [`mcm_fuzz`] samples many, and [`find_violating_cycle`] runs a
//! seeded descent that hunts for a losing cycle.
//!
//! [`relative_value_exp`] re-expresses the same compounding in
//! exponential coordinates, where one period's log return telescopes into
//! differences of the normalizer `psi`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand_chacha::ChaCha8Rng;

use crate::calculus::PortfolioMap;
use crate::error::{Error, Result};
use crate::generating::GeneratingFunction;
use crate::sampling::{seeded_rng, uniform};
use crate::simplex::{psi, ExpCoord, SimplexPoint};

/// Cycle log values below this threshold count as genuine MCM
/// violations rather than accumulated rounding.
pub const MCM_VIOLATION_TOL: f64 = -1e-9;

/// A sequence of interior market-weight configurations.
#[derive(Debug, Clone)]
pub struct MarketPath {
    points: Vec<SimplexPoint>,
}

impl MarketPath {
    /// At least two strictly positive points of a common dimension.
    pub fn new(points: Vec<SimplexPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Shape("a market path needs at least two points"));
        }
        let n = points[0].n();
        for p in &points {
            if p.n() != n {
                return Err(Error::Shape("market path points of different dimension"));
            }
            if p.coords().iter().any(|&c| c <= 0.0) {
                return Err(Error::Domain("market path points must be strictly positive"));
            }
        }
        Ok(MarketPath { points })
    }

    /// Close the given vertices into a cycle by appending the first one.
    pub fn cycle(mut vertices: Vec<SimplexPoint>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Shape("a cycle needs at least two vertices"));
        }
        let first = vertices[0].clone();
        vertices.push(first);
        Self::new(vertices)
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points[0].n()
    }

    /// Number of steps (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_cycle(&self) -> bool {
        let a = self.points[0].coords();
        let b = self.points[self.points.len() - 1].coords();
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
    }

    /// Traverse this cycle `k` times: the concatenated path visits the
    /// loop repeatedly and ends where it started.
    pub fn repeat_cycle(&self, k: usize) -> Result<MarketPath> {
        if !self.is_cycle() {
            return Err(Error::Argument("only cycles can be repeated"));
        }
        if k == 0 {
            return Err(Error::Argument("repetition count must be positive"));
        }
        let mut points = Vec::with_capacity(k * self.steps() + 1);
        points.push(self.points[0].clone());
        for _ in 0..k {
            points.extend(self.points[1..].iter().cloned());
        }
        MarketPath::new(points)
    }
}

/// One-period growth factor of `pi` held at `p` over the move to `q`:
/// `sum_i pi_i(p) q_i / p_i`.
fn growth_factor(map: &PortfolioMap, p: &SimplexPoint, q: &SimplexPoint) -> Result<f64> {
    let pi = map.evaluate(p)?;
    let mut m = 0.0;
    for i in 0..p.n() {
        m += pi[i] * q[i] / p[i];
    }
    Ok(m)
}

/// Value of the allocation rule relative to the market along a path,
/// started at 1: `V(t+1) = V(t) * sum_i pi_i(mu(t)) mu_i(t+1) / mu_i(t)`.
pub fn relative_value(map: &PortfolioMap, path: &MarketPath) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(path.points().len());
    out.push(1.0);
    let mut v = 1.0;
    for win in path.points().windows(2) {
        let m = growth_factor(map, &win[0], &win[1])?;
        if !(m > 0.0) {
            return Err(Error::NumericDegeneracy("nonpositive one-period growth factor"));
        }
        v *= m;
        out.push(v);
    }
    Ok(out)
}

/// The split `log V(t) = phi_term(t) + drift(t)` of a generated rule.
///
/// `phi_term(t) = log Phi(mu(t)) - log Phi(mu(0))` and `drift` cumulates
/// the per-step divergences, so it is nondecreasing and starts at zero.
#[derive(Debug, Clone)]
pub struct ValueDecomposition {
    pub log_v: Vec<f64>,
    pub phi_term: Vec<f64>,
    pub drift: Vec<f64>,
}

impl ValueDecomposition {
    /// Largest residual `|log_v - phi_term - drift|` over the path.
    pub fn max_identity_residual(&self) -> f64 {
        self.log_v
            .iter()
            .zip(self.phi_term.iter().zip(&self.drift))
            .map(|(&v, (&p, &d))| (v - p - d).abs())
            .fold(0.0, f64::max)
    }
}

/// Decompose the log relative value of the rule generated by `phi` along
/// `path` into its potential change plus cumulative divergence.
pub fn fernholz_decompose(
    phi: &GeneratingFunction,
    path: &MarketPath,
) -> Result<ValueDecomposition> {
    let t_len = path.points().len();
    let mut log_v = Vec::with_capacity(t_len);
    let mut phi_term = Vec::with_capacity(t_len);
    let mut drift = Vec::with_capacity(t_len);
    log_v.push(0.0);
    phi_term.push(0.0);
    drift.push(0.0);
    let log_phi0 = phi.log_eval(&path.points()[0])?;
    let mut lv = 0.0;
    let mut a = 0.0;
    for win in path.points().windows(2) {
        let (p, q) = (&win[0], &win[1]);
        let pi = phi.portfolio(p)?;
        let mut m = 0.0;
        for i in 0..p.n() {
            m += pi[i] * q[i] / p[i];
        }
        if !(m > 0.0) {
            return Err(Error::NumericDegeneracy("nonpositive one-period growth factor"));
        }
        lv += m.ln();
        a += phi.l_divergence(q, p)?.value().max(0.0);
        log_v.push(lv);
        phi_term.push(phi.log_eval(q)? - log_phi0);
        drift.push(a);
    }
    Ok(ValueDecomposition { log_v, phi_term, drift })
}

/// Log of the relative value accumulated around a closed path.
///
/// Nonnegative for every functionally generated rule; a value below
/// [`MCM_VIOLATION_TOL`] is a genuine violation witness.  A nonpositive
/// growth factor along the way returns negative infinity (the portfolio
/// is wiped out on this cycle).
pub fn cycle_log_value(map: &PortfolioMap, cycle: &MarketPath) -> Result<f64> {
    if !cycle.is_cycle() {
        return Err(Error::Argument("cycle log value needs a closed path"));
    }
    let mut total = 0.0;
    for win in cycle.points().windows(2) {
        let m = growth_factor(map, &win[0], &win[1])?;
        if !(m > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        total += m.ln();
    }
    Ok(total)
}

/// An axis-aligned box of weights intersected with the open simplex.
#[derive(Debug, Clone)]
pub struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Rejection attempts before a region is declared empty.
const REGION_SAMPLE_ATTEMPTS: usize = 100_000;

impl Region {
    /// Per-coordinate bounds `0 <= lo_i < hi_i <= 1`.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Shape("region bounds of different length"));
        }
        if lo.len() < 2 {
            return Err(Error::Shape("a region needs at least two coordinates"));
        }
        for (&a, &b) in lo.iter().zip(&hi) {
            if !(a >= 0.0 && a < b && b <= 1.0) {
                return Err(Error::Argument("region bounds must satisfy 0 <= lo < hi <= 1"));
            }
        }
        Ok(Region { lo, hi })
    }

    /// The whole open simplex in `n` coordinates.
    pub fn whole(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Shape("a region needs at least two coordinates"));
        }
        Ok(Region { lo: alloc::vec![0.0; n], hi: alloc::vec![1.0; n] })
    }

    /// The box of half-width `radius` around `center`, clipped to `[0, 1]`
    /// (a simple rendering of "a ball of radius delta around p").
    pub fn around(center: &SimplexPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Argument("region radius must be positive"));
        }
        let lo = center.coords().iter().map(|&c| (c - radius).max(0.0)).collect();
        let hi = center.coords().iter().map(|&c| (c + radius).min(1.0)).collect();
        Region::new(lo, hi)
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &SimplexPoint) -> bool {
        p.n() == self.n()
            && p.coords()
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&c, (&a, &b))| c > 0.0 && c >= a && c <= b)
    }

    /// Uniform sample from the box-simplex intersection: the first `n-1`
    /// coordinates are drawn uniformly in their bounds and the last is
    /// forced by the unit sum, rejecting draws that leave its bounds.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<SimplexPoint> {
        let n = self.n();
        for _ in 0..REGION_SAMPLE_ATTEMPTS {
            let mut coords = Vec::with_capacity(n);
            let mut sum = 0.0;
            for i in 0..n - 1 {
                let c = self.lo[i] + (self.hi[i] - self.lo[i]) * uniform(rng);
                coords.push(c);
                sum += c;
            }
            let last = 1.0 - sum;
            if last <= 0.0 || last < self.lo[n - 1] || last > self.hi[n - 1] {
                continue;
            }
            coords.push(last);
            if coords.iter().any(|&c| c <= 0.0) {
                continue;
            }
            if let Ok(p) = SimplexPoint::open(coords) {
                return Ok(p);
            }
        }
        Err(Error::Argument("region does not appear to intersect the open simplex"))
    }
}

/// Result of randomized MCM testing.
#[derive(Debug, Clone)]
pub struct McmReport {
    /// Smallest cycle log value seen.
    pub min_log_value: f64,
    /// First sampled cycle below [`MCM_VIOLATION_TOL`], if any.
    pub witness: Option<MarketPath>,
    /// Number of cycles evaluated.
    pub trials: usize,
}

/// Sample `trials` random closed cycles with `2..=max_cycle_len` vertices
/// in `region` (successive jumps bounded by `delta` when given, closing
/// jump included) and report the worst cycle log value plus the first
/// genuine violation witness.
pub fn mcm_fuzz(
    map: &PortfolioMap,
    region: &Region,
    trials: usize,
    max_cycle_len: usize,
    delta: Option<f64>,
    seed: u64,
) -> Result<McmReport> {
    if max_cycle_len < 2 {
        return Err(Error::Argument("cycles need at least two vertices"));
    }
    if let Some(d) = delta {
        if !(d > 0.0) {
            return Err(Error::Argument("jump bound must be positive"));
        }
    }
    let mut rng = seeded_rng(seed);
    let mut min_log_value = f64::INFINITY;
    let mut witness = None;
    let mut done = 0;
    while done < trials {
        let m = 2 + (rng_index(&mut rng, max_cycle_len - 1));
        let Some(vertices) = sample_cycle_vertices(region, m, delta, &mut rng)? else {
            // Jump bound too tight for this draw; try again (counts as a trial
            // so pathological bounds cannot loop forever).
            done += 1;
            continue;
        };
        let cycle = MarketPath::cycle(vertices)?;
        let value = cycle_log_value(map, &cycle)?;
        if value < min_log_value {
            min_log_value = value;
        }
        if value < MCM_VIOLATION_TOL && witness.is_none() {
            witness = Some(cycle);
        }
        done += 1;
    }
    Ok(McmReport { min_log_value, witness, trials: done })
}

fn rng_index(rng: &mut ChaCha8Rng, len: usize) -> usize {
    if len <= 1 {
        return 0;
    }
    let u = uniform(rng);
    let k = (u * len as f64) as usize;
    k.min(len - 1)
}

fn euclid_dist(a: &SimplexPoint, b: &SimplexPoint) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Draw `m` vertices in the region whose consecutive jumps (and the
/// closing jump) respect `delta`; `None` when the bound keeps rejecting.
fn sample_cycle_vertices(
    region: &Region,
    m: usize,
    delta: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<SimplexPoint>>> {
    const CYCLE_ATTEMPTS: usize = 50;
    const VERTEX_ATTEMPTS: usize = 200;
    'cycle: for _ in 0..CYCLE_ATTEMPTS {
        let mut vertices: Vec<SimplexPoint> = Vec::with_capacity(m);
        vertices.push(region.sample(rng)?);
        for k in 1..m {
            let mut placed = false;
            for _ in 0..VERTEX_ATTEMPTS {
                let cand = region.sample(rng)?;
                let jump_ok = match delta {
                    Some(d) => euclid_dist(&vertices[k - 1], &cand) <= d,
                    None => true,
                };
                let close_ok = k < m - 1
                    || match delta {
                        Some(d) => euclid_dist(&cand, &vertices[0]) <= d,
                        None => true,
                    };
                if jump_ok && close_ok {
                    vertices.push(cand);
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'cycle;
            }
        }
        return Ok(Some(vertices));
    }
    Ok(None)
}

const SEARCH_SEED: u64 = 0x6d_636d; // "mcm"

/// Seeded adversarial search for a cycle with negative log value.
///
/// Random restarts draw a cycle of `m` vertices (`m` sweeps 6 down to 2)
/// from `region`; greedy coordinate descent then moves one vertex at a
/// time along two-coordinate directions `h (e_i - e_j)`, halving `h`
/// when a sweep stalls.  The budget counts portfolio evaluations.  The
/// first locally converged cycle below [`MCM_VIOLATION_TOL`] is returned
/// with its log value; `None` means no violation was found in budget
/// (expected for every functionally generated rule).
pub fn find_violating_cycle(
    map: &PortfolioMap,
    region: &Region,
    budget: usize,
) -> Result<Option<(MarketPath, f64)>> {
    let n = region.n();
    let mut rng = seeded_rng(SEARCH_SEED);
    let mut spent = 0usize;
    let eval = |vertices: &[SimplexPoint],
                spent: &mut usize|
     -> Result<f64> {
        *spent += vertices.len() + 1;
        cycle_log_value(map, &MarketPath::cycle(vertices.to_vec())?)
    };
    let span: f64 = 0.25; // initial move size, as a fraction of the region span
    let mut restart = 0usize;
    while spent < budget {
        let m = [6, 5, 4, 3, 2][restart % 5];
        restart += 1;
        let Some(mut vertices) = sample_cycle_vertices(region, m, None, &mut rng)? else {
            continue;
        };
        let mut value = eval(&vertices, &mut spent)?;
        let width: f64 = region
            .lo
            .iter()
            .zip(&region.hi)
            .map(|(&a, &b)| b - a)
            .fold(f64::INFINITY, f64::min);
        let mut h = span * width;
        while h > 1e-5 && spent < budget {
            let mut improved = false;
            'sweep: for k in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        if spent >= budget {
                            break 'sweep;
                        }
                        let mut cand = vertices[k].coords().to_vec();
                        cand[i] += h;
                        cand[j] -= h;
                        let Ok(p) = SimplexPoint::open(cand) else { continue };
                        if !region.contains(&p) {
                            continue;
                        }
                        let old = core::mem::replace(&mut vertices[k], p);
                        let cand_value = eval(&vertices, &mut spent)?;
                        if cand_value < value {
                            value = cand_value;
                            improved = true;
                        } else {
                            vertices[k] = old;
                        }
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        if value < MCM_VIOLATION_TOL {
            return Ok(Some((MarketPath::cycle(vertices)?, value)));
        }
    }
    Ok(None)
}

/// Log relative value along a path given in exponential coordinates,
/// for the rule described by a coordinate shift `theta -> phi(theta)`:
///
/// ```text
/// log V(T) = psi(theta(0)) - psi(theta(T))
///          + sum_s [ psi(theta(s+1) - phi(theta(s))) - psi(theta(s) - phi(theta(s))) ]
/// ```
pub fn relative_value_exp<F>(shift: F, thetas: &[ExpCoord]) -> Result<f64>
where
    F: Fn(&ExpCoord) -> Result<ExpCoord>,
{
    if thetas.is_empty() {
        return Err(Error::Shape("a path needs at least one point"));
    }
    let d = thetas[0].n();
    let mut total = psi(&thetas[0]) - psi(&thetas[thetas.len() - 1]);
    for win in thetas.windows(2) {
        if win[1].n() != d {
            return Err(Error::Shape("path points of different dimension"));
        }
        let phi = shift(&win[0])?;
        total += psi(&win[1].sub(&phi)?) - psi(&win[0].sub(&phi)?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::uniform_simplex;
    use crate::simplex::{from_exponential, to_exponential};
    use alloc::sync::Arc;
    use alloc::vec;

    fn p2(a: f64, b: f64) -> SimplexPoint {
        SimplexPoint::open(vec![a, b]).unwrap()
    }

    fn random_path(rng: &mut ChaCha8Rng, n: usize, steps: usize) -> MarketPath {
        let points = (0..=steps).map(|_| uniform_simplex(rng, n).unwrap()).collect();
        MarketPath::new(points).unwrap()
    }

    #[test]
    fn market_rule_has_unit_value() {
        let map = PortfolioMap::market();
        let mut rng = seeded_rng(1);
        let path = random_path(&mut rng, 4, 30);
        for v in relative_value(&map, &path).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_half_half_single_step() {
        let map = PortfolioMap::constant(SimplexPoint::closed(vec![0.5, 0.5]).unwrap());
        let path = MarketPath::new(vec![p2(0.4, 0.6), p2(0.6, 0.4)]).unwrap();
        let v = relative_value(&map, &path).unwrap();
        // 1/2 * 0.6/0.4 + 1/2 * 0.4/0.6 = 13/12.
        assert!((v[1] - 13.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn single_stock_value_tracks_weight_ratio() {
        let map = PortfolioMap::constant(SimplexPoint::closed(vec![1.0, 0.0]).unwrap());
        let path = MarketPath::new(vec![p2(0.2, 0.8), p2(0.4, 0.6)]).unwrap();
        let v = relative_value(&map, &path).unwrap();
        assert!((v[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn decomposition_identity_random_paths() {
        let gens = vec![
            GeneratingFunction::geometric_mean(vec![0.2, 0.3, 0.5]).unwrap(),
            GeneratingFunction::diversity_power(0.5).unwrap(),
            GeneratingFunction::affine(vec![1.0, 2.0, 3.0]).unwrap(),
            GeneratingFunction::min_of_affines(vec![
                vec![1.0, 2.0, 3.0],
                vec![3.0, 2.0, 1.0],
            ])
            .unwrap(),
        ];
        let mut rng = seeded_rng(7);
        for g in &gens {
            for _ in 0..50 {
                let path = random_path(&mut rng, 3, 20);
                let d = fernholz_decompose(g, &path).unwrap();
                assert!(d.max_identity_residual() < 1e-9);
                for w in d.drift.windows(2) {
                    assert!(w[1] >= w[0]);
                }
            }
        }
    }

    #[test]
    fn affine_generator_has_zero_drift() {
        let g = GeneratingFunction::affine(vec![1.0, 2.0, 3.0]).unwrap();
        let mut rng = seeded_rng(9);
        let path = random_path(&mut rng, 3, 25);
        let d = fernholz_decompose(&g, &path).unwrap();
        assert!(d.drift.last().unwrap().abs() < 1e-12);
    }

    #[test]
    fn geometric_mean_round_trip_collects_pure_drift() {
        let g = GeneratingFunction::geometric_mean(vec![0.5, 0.5]).unwrap();
        let path =
            MarketPath::new(vec![p2(0.5, 0.5), p2(0.6, 0.4), p2(0.5, 0.5)]).unwrap();
        let d = fernholz_decompose(&g, &path).unwrap();
        assert!(d.phi_term[2].abs() < 1e-15);
        // Both legs contribute the same divergence here.
        assert!((d.log_v[2] - 2.0 * 0.020410997260127565).abs() < 1e-12);
        assert!((d.drift[2] - d.log_v[2]).abs() < 1e-12);
    }

    #[test]
    fn constant_path_decomposes_to_zero() {
        let g = GeneratingFunction::diversity_power(0.5).unwrap();
        let p = SimplexPoint::open(vec![0.3, 0.3, 0.4]).unwrap();
        let path = MarketPath::new(vec![p.clone(), p.clone(), p]).unwrap();
        let d = fernholz_decompose(&g, &path).unwrap();
        for t in 0..3 {
            assert!(d.log_v[t].abs() < 1e-14);
            assert!(d.phi_term[t].abs() < 1e-14);
            assert!(d.drift[t] < 1e-14);
        }
    }

    #[test]
    fn two_point_cycle_value_frozen() {
        let map = PortfolioMap::constant(SimplexPoint::closed(vec![0.5, 0.5]).unwrap());
        let cycle = MarketPath::cycle(vec![p2(0.4, 0.6), p2(0.6, 0.4)]).unwrap();
        let v = cycle_log_value(&map, &cycle).unwrap();
        // Each leg multiplies by 13/12.
        let expect = 2.0 * (13.0f64 / 12.0).ln();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.16008541534707285).abs() < 1e-15);
    }

    #[test]
    fn market_rule_cycles_are_neutral() {
        let map = PortfolioMap::market();
        let mut rng = seeded_rng(13);
        for _ in 0..50 {
            let cycle = MarketPath::cycle(vec![
                uniform_simplex(&mut rng, 3).unwrap(),
                uniform_simplex(&mut rng, 3).unwrap(),
                uniform_simplex(&mut rng, 3).unwrap(),
            ])
            .unwrap();
            assert!(cycle_log_value(&map, &cycle).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn single_stock_two_cycles_on_a_grid_are_neutral() {
        // Buy-and-hold one stock is generated by an affine function, so
        // every out-and-back trip must break even exactly.
        let map = PortfolioMap::constant(SimplexPoint::closed(vec![1.0, 0.0]).unwrap());
        for a in 1..10 {
            for b in 1..10 {
                let p = p2(a as f64 / 10.0, 1.0 - a as f64 / 10.0);
                let q = p2(b as f64 / 10.0, 1.0 - b as f64 / 10.0);
                let cycle = MarketPath::cycle(vec![p, q]).unwrap();
                assert!(cycle_log_value(&map, &cycle).unwrap().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn open_path_is_not_a_cycle() {
        let map = PortfolioMap::market();
        let path = MarketPath::new(vec![p2(0.4, 0.6), p2(0.6, 0.4)]).unwrap();
        assert!(matches!(cycle_log_value(&map, &path), Err(Error::Argument(_))));
    }

    #[test]
    fn region_sampling_respects_bounds() {
        let center = SimplexPoint::barycenter(3).unwrap();
        let region = Region::around(&center, 0.1).unwrap();
        let mut rng = seeded_rng(17);
        for _ in 0..200 {
            let p = region.sample(&mut rng).unwrap();
            assert!(region.contains(&p));
        }
    }

    #[test]
    fn empty_region_reports_argument_error() {
        // Box far below the simplex: coordinates of a 3-point sum to 1,
        // but all three are forced under 0.05.
        let region = Region::new(vec![0.0; 3], vec![0.05; 3]).unwrap();
        let mut rng = seeded_rng(19);
        assert!(matches!(region.sample(&mut rng), Err(Error::Argument(_))));
    }

    #[test]
    fn fuzz_certifies_generated_rules() {
        let maps = vec![
            PortfolioMap::from_generating(Arc::new(
                GeneratingFunction::geometric_mean(vec![0.2, 0.3, 0.5]).unwrap(),
            )),
            PortfolioMap::from_generating(Arc::new(
                GeneratingFunction::diversity_power(0.5).unwrap(),
            )),
        ];
        let region = Region::whole(3).unwrap();
        for map in &maps {
            let report = mcm_fuzz(map, &region, 1000, 6, None, 23).unwrap();
            assert!(report.witness.is_none());
            assert!(report.min_log_value >= MCM_VIOLATION_TOL);
        }
    }

    #[test]
    fn fuzz_with_jump_bound_stays_local() {
        let map = PortfolioMap::market();
        let region = Region::whole(3).unwrap();
        let report = mcm_fuzz(&map, &region, 300, 4, Some(0.05), 29).unwrap();
        assert!(report.witness.is_none());
        assert!(report.min_log_value.abs() < 1e-12);
    }

    #[test]
    fn search_finds_losing_cycle_for_counterexample() {
        use crate::calculus::counterexample_portfolio;
        let map = counterexample_portfolio(0.5).unwrap();
        let center = SimplexPoint::barycenter(3).unwrap();
        let region = Region::around(&center, 0.1).unwrap();
        let found = find_violating_cycle(&map, &region, 100_000).unwrap();
        let (cycle, value) = found.expect("a violating cycle must exist at this strength");
        assert!(value < MCM_VIOLATION_TOL);
        // Repeating the loop compounds the loss linearly.
        let repeated = cycle.repeat_cycle(50).unwrap();
        let v = relative_value(&map, &repeated).unwrap();
        let final_log = v.last().unwrap().ln();
        assert!((final_log - 50.0 * value).abs() < 1e-8 * 50.0);
    }

    #[test]
    fn search_clears_generated_rules() {
        let map = PortfolioMap::from_generating(Arc::new(
            GeneratingFunction::geometric_mean(vec![0.3, 0.3, 0.4]).unwrap(),
        ));
        let region = Region::whole(3).unwrap();
        assert!(find_violating_cycle(&map, &region, 20_000).unwrap().is_none());
    }

    #[test]
    fn exp_coordinate_value_matches_weight_space() {
        // The shift describing a generated rule in exponential
        // coordinates: phi_i(theta) = theta_i - log(pi_i / pi_n).
        let g = Arc::new(GeneratingFunction::geometric_mean(vec![0.2, 0.3, 0.5]).unwrap());
        let map = PortfolioMap::from_generating(g.clone());
        let shift = {
            let map = PortfolioMap::from_generating(g);
            move |theta: &ExpCoord| -> Result<ExpCoord> {
                let p = from_exponential(theta)?;
                let pi = map.evaluate(&p)?.into_open()?;
                let pi_theta = to_exponential(&pi)?;
                theta.sub(&pi_theta)
            }
        };
        let mut rng = seeded_rng(31);
        for _ in 0..100 {
            let path = random_path(&mut rng, 3, 10);
            let thetas: Vec<ExpCoord> =
                path.points().iter().map(|p| to_exponential(p).unwrap()).collect();
            let lhs = relative_value_exp(&shift, &thetas).unwrap();
            let rhs = relative_value(&map, &path).unwrap().last().unwrap().ln();
            assert!((lhs - rhs).abs() < 1e-10, "lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn zero_shift_is_the_market_rule() {
        let mut rng = seeded_rng(37);
        let path = random_path(&mut rng, 4, 15);
        let thetas: Vec<ExpCoord> =
            path.points().iter().map(|p| to_exponential(p).unwrap()).collect();
        let v =
            relative_value_exp(|t| ExpCoord::new(vec![0.0; t.components().len()]), &thetas)
                .unwrap();
        assert!(v.abs() < 1e-12);
    }
}
