//! Second-order structure of portfolio maps and line integrals of `pi/mu`.
//!
//! A *portfolio map* assigns an allocation to every interior weight
//! configuration.  This module provides:
//!
//! * the drift quadratic form of a generating function (its normalized
//!   negative Hessian), and the excess growth form of an allocation;
//! * two curvature diagnostics that every functionally generated rule
//!   satisfies — the weight-ratio curvature bound
//!   `<v, D_v(pi/mu)> + <pi/mu, v>^2 <= 0` and the nonnegative gap
//!   `Gamma_pi(v,v) - <<D_v pi, v>>_mu >= 0`;
//! * line integrals of the weight-ratio field `pi/mu` along polylines,
//!   loop defects (zero exactly for rules derived from a potential), and
//!   reconstruction of `log Phi` from a conservative rule;
//! * an explicit three-asset rule that is *not* derived from any potential
//!   ([`counterexample_portfolio`]), used as the negative control;
//! * the one-dimensional condition `q'(y) <= q(y)(1 - q(y))` that
//!   characterizes functionally generated two-asset rules.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::generating::GeneratingFunction;
use crate::sampling::{seeded_rng, uniform_simplex};
use crate::simplex::{fisher_inner, project_to_tangent, SimplexPoint, TangentVector};

/// Step of the central second difference in [`drift_form`].
pub const SECOND_DIFF_STEP: f64 = 1e-4;

/// Step of the central first differences applied to portfolio maps.
pub const FIRST_DIFF_STEP: f64 = 1e-5;

/// Per-segment absolute tolerance of the adaptive quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Maximum bisection depth of the adaptive quadrature.
pub const QUADRATURE_MAX_DEPTH: u32 = 20;

/// Sampled loop defects above this threshold mark a rule as not derived
/// from a potential.
pub const CONSERVATIVE_TOL: f64 = 1e-6;

type MapFn = dyn Fn(&SimplexPoint) -> Result<SimplexPoint> + Send + Sync;

/// An allocation rule `mu -> pi(mu)` on the open simplex.
///
/// Outputs always live in the closed simplex (the evaluator returns
/// [`SimplexPoint`]s).  Evaluation is const across calls, so randomized
/// checks over a map are reproducible.
pub struct PortfolioMap {
    f: Box<MapFn>,
    n: Option<usize>,
    smooth: bool,
}

impl core::fmt::Debug for PortfolioMap {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PortfolioMap")
            .field("n", &self.n)
            .field("smooth", &self.smooth)
            .finish()
    }
}

impl PortfolioMap {
    /// Wrap an arbitrary evaluator. `n` pins the ambient dimension when
    /// known; `smooth` hints that finite differences of the map are
    /// meaningful (kinked maps should pass `false`).
    pub fn from_fn<F>(n: Option<usize>, smooth: bool, f: F) -> Self
    where
        F: Fn(&SimplexPoint) -> Result<SimplexPoint> + Send + Sync + 'static,
    {
        PortfolioMap { f: Box::new(f), n, smooth }
    }

    /// The market rule `pi(mu) = mu` (hold the market).
    pub fn market() -> Self {
        Self::from_fn(None, true, |p| Ok(p.clone().into_closed()))
    }

    /// A constant allocation.
    pub fn constant(weights: SimplexPoint) -> Self {
        let n = weights.n();
        Self::from_fn(Some(n), true, move |p| {
            if p.n() != n {
                return Err(Error::Shape("point dimension does not match the rule"));
            }
            Ok(weights.clone())
        })
    }

    /// The rule generated by a positive concave function.
    pub fn from_generating(phi: Arc<GeneratingFunction>) -> Self {
        let n = phi.dimension();
        let smooth = !matches!(&*phi, GeneratingFunction::MinOfAffines { .. });
        Self::from_fn(n, smooth, move |p| phi.portfolio(p))
    }

    pub fn evaluate(&self, p: &SimplexPoint) -> Result<SimplexPoint> {
        if let Some(n) = self.n {
            if n != p.n() {
                return Err(Error::Shape("point dimension does not match the rule"));
            }
        }
        (self.f)(p)
    }

    pub fn dimension(&self) -> Option<usize> {
        self.n
    }

    pub fn is_smooth_hint(&self) -> bool {
        self.smooth
    }

    /// The weight-ratio field `w(mu) = pi(mu) / mu`.
    pub fn weight_ratio(&self, p: &SimplexPoint) -> Result<Vec<f64>> {
        if p.coords().iter().any(|&c| c <= 0.0) {
            return Err(Error::Domain("weight ratios need an interior point"));
        }
        let pi = self.evaluate(p)?;
        Ok(pi.coords().iter().zip(p.coords()).map(|(&a, &b)| a / b).collect())
    }
}

/// A three-asset rule that is positive and sums to one yet is not induced
/// by any generating function:
///
/// ```text
/// pi(mu) = mu .* (lam * A mu) + alpha_lam(mu) * mu,
/// (A mu) = (-(mu1+mu2+mu3), -(mu2+mu3), -mu3),
/// alpha_lam(mu) = 1 + lam * (mu1 + mu2 (mu2+mu3) + mu3^2),
/// ```
///
/// valid for `0 < lam < 1`.  Its weight-ratio field has nonzero loop
/// integrals, and for `lam` large enough short cycles on which the rule
/// loses money exist.
pub fn counterexample_portfolio(lambda: f64) -> Result<PortfolioMap> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Argument("counterexample parameter must lie in (0, 1)"));
    }
    Ok(PortfolioMap::from_fn(Some(3), true, move |p| {
        let m = p.coords();
        let a_mu = counterexample_field(lambda, m);
        let alpha = 1.0 + lambda * (m[0] + m[1] * (m[1] + m[2]) + m[2] * m[2]);
        let raw: Vec<f64> = (0..3).map(|i| m[i] * (a_mu[i] + alpha)).collect();
        SimplexPoint::closed(raw)
    }))
}

/// `lam * A mu` for the counterexample's upper-triangular matrix of -1s.
fn counterexample_field(lambda: f64, m: &[f64]) -> [f64; 3] {
    [
        -lambda * (m[0] + m[1] + m[2]),
        -lambda * (m[1] + m[2]),
        -lambda * m[2],
    ]
}

/// Drift quadratic form of a generating function at `p` in direction `v`:
/// `-Hess Phi(p)(v, v) / (2 Phi(p))`, with the Hessian taken as a central
/// second difference of `t -> Phi(p + t v)` at step [`SECOND_DIFF_STEP`]
/// (halved while the stencil leaves the simplex).
pub fn drift_form(phi: &GeneratingFunction, p: &SimplexPoint, v: &TangentVector) -> Result<f64> {
    if p.n() != v.n() {
        return Err(Error::Shape("direction dimension does not match the point"));
    }
    let mut h = SECOND_DIFF_STEP;
    for _ in 0..40 {
        match (shift(p, v, h), shift(p, v, -h)) {
            (Ok(fp), Ok(fm)) => {
                let f0 = phi.eval(p)?;
                let second = (phi.eval(&fp)? - 2.0 * f0 + phi.eval(&fm)?) / (h * h);
                return Ok(-second / (2.0 * f0));
            }
            _ => h *= 0.5,
        }
    }
    Err(Error::Domain("cannot fit the second-difference stencil inside the simplex"))
}

/// Excess growth form of an allocation `pi` held at `p`:
/// `(1/2) sum_{ij} pi_i (delta_ij - pi_j) v_i v_j / (p_i p_j)`.
pub fn excess_growth_form(pi: &SimplexPoint, p: &SimplexPoint, v: &TangentVector) -> Result<f64> {
    let n = p.n();
    if pi.n() != n || v.n() != n {
        return Err(Error::Shape("allocation and direction must match the point"));
    }
    if p.coords().iter().any(|&c| c <= 0.0) {
        return Err(Error::Domain("excess growth form needs an interior point"));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            total += pi[i] * (delta - pi[j]) * v[i] * v[j] / (p[i] * p[j]);
        }
    }
    Ok(0.5 * total)
}

/// Central difference `(m(p + h v) - m(p - h v)) / (2h)` of a portfolio
/// map, projected back to the tangent space to strip rounding residue.
fn map_directional_diff(
    map: &PortfolioMap,
    p: &SimplexPoint,
    v: &TangentVector,
) -> Result<TangentVector> {
    let mut h = FIRST_DIFF_STEP;
    for _ in 0..40 {
        match (shift(p, v, h), shift(p, v, -h)) {
            (Ok(fp), Ok(fm)) => {
                let a = map.evaluate(&fp)?;
                let b = map.evaluate(&fm)?;
                let d: Vec<f64> = a
                    .coords()
                    .iter()
                    .zip(b.coords())
                    .map(|(&x, &y)| (x - y) / (2.0 * h))
                    .collect();
                return Ok(project_to_tangent(&d));
            }
            _ => h *= 0.5,
        }
    }
    Err(Error::Domain("cannot fit the difference stencil inside the simplex"))
}

/// Curvature gap `Gamma_pi(p)(v,v) - <<D_v pi(p), v>>_p` (Fisher pairing),
/// nonnegative for every rule induced by a concave generator.
pub fn curvature_gap(map: &PortfolioMap, p: &SimplexPoint, v: &TangentVector) -> Result<f64> {
    let pi = map.evaluate(p)?;
    let gamma = excess_growth_form(&pi, p, v)?;
    let dpi = map_directional_diff(map, p, v)?;
    Ok(gamma - fisher_inner(p, &dpi, v)?)
}

/// Weight-ratio curvature `<v, D_v w(p)> + <w(p), v>^2` with
/// `w = pi/mu`; nonpositive for every functionally generated rule.
pub fn weight_ratio_curvature(
    map: &PortfolioMap,
    p: &SimplexPoint,
    v: &TangentVector,
) -> Result<f64> {
    if p.n() != v.n() {
        return Err(Error::Shape("direction dimension does not match the point"));
    }
    let w = map.weight_ratio(p)?;
    let inner_wv: f64 = w.iter().zip(v.coords()).map(|(a, b)| a * b).sum();
    let mut h = FIRST_DIFF_STEP;
    for _ in 0..40 {
        match (shift(p, v, h), shift(p, v, -h)) {
            (Ok(fp), Ok(fm)) => {
                let wp = map.weight_ratio(&fp)?;
                let wm = map.weight_ratio(&fm)?;
                let inner_v_dw: f64 = v
                    .coords()
                    .iter()
                    .zip(wp.iter().zip(&wm))
                    .map(|(&vi, (&a, &b))| vi * (a - b) / (2.0 * h))
                    .sum();
                return Ok(inner_v_dw + inner_wv * inner_wv);
            }
            _ => h *= 0.5,
        }
    }
    Err(Error::Domain("cannot fit the difference stencil inside the simplex"))
}

fn shift(p: &SimplexPoint, v: &TangentVector, h: f64) -> Result<SimplexPoint> {
    SimplexPoint::open(p.coords().iter().zip(v.coords()).map(|(&pi, &vi)| pi + h * vi).collect())
}

/// A polyline of interior points (at least two, common dimension).
#[derive(Debug, Clone)]
pub struct Polyline {
    points: Vec<SimplexPoint>,
}

impl Polyline {
    pub fn new(points: Vec<SimplexPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Shape("a polyline needs at least two points"));
        }
        let n = points[0].n();
        for p in &points {
            if p.n() != n {
                return Err(Error::Shape("polyline points of different dimension"));
            }
            if p.coords().iter().any(|&c| c <= 0.0) {
                return Err(Error::Domain("polyline points must be interior"));
            }
        }
        Ok(Polyline { points })
    }

    /// A closed polyline through the given vertices (the first vertex is
    /// appended as the endpoint).
    pub fn closed_loop(mut vertices: Vec<SimplexPoint>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Shape("a loop needs at least two vertices"));
        }
        let first = vertices[0].clone();
        vertices.push(first);
        Self::new(vertices)
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        let a = self.points[0].coords();
        let b = self.points[self.points.len() - 1].coords();
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
    }
}

// 7-point Gauss-Legendre rule on [-1, 1].
const GL7_X: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const GL7_W: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

fn gl7<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (&x, &w) in GL7_X.iter().zip(&GL7_W) {
        s += w * f(c + h * x)?;
    }
    Ok(s * h)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` by adaptive
/// bisection of the 7-point rule.
pub(crate) fn integrate<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_gl(f, a, b, tol, 0)
}

fn adaptive_gl<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let whole = gl7(f, a, b)?;
    let m = 0.5 * (a + b);
    let left = gl7(f, a, m)?;
    let right = gl7(f, m, b)?;
    let refined = left + right;
    if (whole - refined).abs() <= tol || depth >= QUADRATURE_MAX_DEPTH {
        return Ok(refined);
    }
    Ok(adaptive_gl(f, a, m, 0.5 * tol, depth + 1)? + adaptive_gl(f, m, b, 0.5 * tol, depth + 1)?)
}

/// Line integral of the weight-ratio field along a polyline:
/// `sum_segments int_0^1 <pi(gamma(t)) / gamma(t), b - a> dt`.
///
/// Each segment is integrated by adaptive 7-point Gauss-Legendre
/// bisection to absolute tolerance [`QUADRATURE_TOL`].
pub fn line_integral(map: &PortfolioMap, path: &Polyline) -> Result<f64> {
    let mut total = 0.0;
    for win in path.points().windows(2) {
        let (a, b) = (&win[0], &win[1]);
        let delta: Vec<f64> =
            b.coords().iter().zip(a.coords()).map(|(&x, &y)| x - y).collect();
        let integrand = |t: f64| -> Result<f64> {
            let gamma = SimplexPoint::open(
                a.coords().iter().zip(&delta).map(|(&x, &d)| x + t * d).collect(),
            )?;
            let w = map.weight_ratio(&gamma)?;
            Ok(w.iter().zip(&delta).map(|(a, b)| a * b).sum())
        };
        total += adaptive_gl(&integrand, 0.0, 1.0, QUADRATURE_TOL, 0)?;
    }
    Ok(total)
}

/// Line integral around a closed polyline.  Zero (to quadrature accuracy)
/// exactly when the rule is locally derived from a potential.
pub fn loop_defect(map: &PortfolioMap, path: &Polyline) -> Result<f64> {
    if !path.is_closed() {
        return Err(Error::Argument("loop defect needs a closed polyline"));
    }
    line_integral(map, path)
}

const RECONSTRUCT_SEED: u64 = 0x6c6f_6f70; // "loop"
const RECONSTRUCT_LOOPS: usize = 8;

/// Reconstruct `log Phi(p) - log Phi(p0)` from a conservative rule by
/// integrating `pi/mu` along the straight segment `p0 -> p`.
///
/// Before integrating, the rule's conservativeness is spot-checked on
/// [`RECONSTRUCT_LOOPS`] seeded random triangles; a defect above
/// [`CONSERVATIVE_TOL`] aborts with [`Error::NotAGradient`].
pub fn reconstruct_log_phi(
    map: &PortfolioMap,
    p0: &SimplexPoint,
    p: &SimplexPoint,
) -> Result<f64> {
    if p0.n() != p.n() {
        return Err(Error::Shape("points of different dimension"));
    }
    let n = p0.n();
    let mut rng = seeded_rng(RECONSTRUCT_SEED);
    for _ in 0..RECONSTRUCT_LOOPS {
        let tri = Polyline::closed_loop(alloc::vec![
            uniform_simplex(&mut rng, n)?,
            uniform_simplex(&mut rng, n)?,
            uniform_simplex(&mut rng, n)?,
        ])?;
        let defect = loop_defect(map, &tri)?;
        if defect.abs() > CONSERVATIVE_TOL {
            return Err(Error::NotAGradient(defect));
        }
    }
    line_integral(map, &Polyline::new(alloc::vec![p0.clone(), p.clone()])?)
}

/// Grid used by [`two_stock_drift_condition`].
pub const TWO_STOCK_GRID: (f64, f64, usize) = (-5.0, 5.0, 501);

/// Worst violation of `q'(y) <= q(y) (1 - q(y))` over the fixed grid
/// [`TWO_STOCK_GRID`] of log-weight-ratios, with `q'` a central
/// difference at step [`FIRST_DIFF_STEP`].  Nonpositive return values mean
/// the condition holds on the grid (the rule is functionally generated);
/// the value is `max_y [ q'(y) - q(y)(1 - q(y)) ]`.
pub fn two_stock_drift_condition<F: Fn(f64) -> f64>(q: F) -> Result<f64> {
    let (lo, hi, m) = TWO_STOCK_GRID;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..m {
        let y = lo + (hi - lo) * k as f64 / (m - 1) as f64;
        let qy = q(y);
        if !(qy > 0.0 && qy < 1.0) {
            return Err(Error::Domain("two-asset rule must map into (0, 1)"));
        }
        let h = FIRST_DIFF_STEP;
        let dq = (q(y + h) - q(y - h)) / (2.0 * h);
        worst = worst.max(dq - qy * (1.0 - qy));
    }
    Ok(worst)
}
