//! Positive concave generating functions and the portfolios they induce.
//!
//! A positive concave function `Phi` on the simplex generates the
//! rebalancing rule
//!
//! ```text
//! pi_i(p) = p_i * (1 + D_{e(i)-p} log Phi(p))
//! ```
//!
//! where `D_v` is the one-sided directional derivative.  Portfolios of this
//! form never lose relative to the change of `log Phi` along any weight
//! path; the per-step surplus is the divergence computed by
//! [`GeneratingFunction::l_divergence`].
//!
//! Supergradients of `log Phi` and portfolio weights determine each other
//! through an explicit bijection ([`supergradient_to_portfolio`] /
//! [`portfolio_to_supergradient`]).

use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sampling::{seeded_rng, uniform_simplex};
use crate::simplex::{project_to_tangent, SimplexPoint, TangentVector};

/// Negative portfolio coordinates above this magnitude invalidate the
/// generator; smaller ones are treated as rounding and clamped to zero.
pub const PORTFOLIO_NEG_TOL: f64 = 1e-9;

/// Two affine pieces within this distance of the minimum are both
/// considered active at a kink.
pub const ACTIVE_PIECE_TOL: f64 = 1e-12;

/// Forward-difference step for custom generators without an exact
/// directional derivative.
pub const CUSTOM_FD_STEP: f64 = 1e-6;

/// Seed and budget of the randomized positivity/concavity validation run
/// on custom generators at construction.
const VALIDATION_SEED: u64 = 0x6765_6e66; // "genf"
const VALIDATION_POINTS: usize = 256;
const VALIDATION_PAIRS: usize = 1000;
const MIDPOINT_CONCAVITY_TOL: f64 = 1e-10;

type EvalFn = dyn Fn(&SimplexPoint) -> Result<f64> + Send + Sync;
type DirFn = dyn Fn(&SimplexPoint, &TangentVector) -> Result<f64> + Send + Sync;

/// A positive concave function on the simplex, available in closed form
/// for the built-in families and as black-box callables for custom ones.
pub enum GeneratingFunction {
    /// `Phi(p) = prod p_i^{w_i}` — generates the constant-weighted rule `w`.
    GeometricMean { weights: SimplexPoint },
    /// `Phi(p) = (sum p_i^alpha)^{1/alpha}`, `0 < alpha < 1` — generates
    /// the power-weighted rule `p_i^alpha / sum p_j^alpha`.
    DiversityPower { alpha: f64 },
    /// `Phi(p) = <a, p>` with every `a_i > 0`.
    Affine { coeffs: Vec<f64> },
    /// `Phi(p) = min_k <a_k, p>` over finitely many positive affine pieces.
    MinOfAffines { pieces: Vec<Vec<f64>> },
    /// Black-box positive concave function (positivity and midpoint
    /// concavity are spot-checked at construction on a seeded sample).
    Custom {
        n: usize,
        eval: Box<EvalFn>,
        /// Optional exact directional derivative `D_v Phi(p)`; when absent
        /// a forward difference with step [`CUSTOM_FD_STEP`] is used.
        dir: Option<Box<DirFn>>,
    },
}

impl core::fmt::Debug for GeneratingFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::GeometricMean { weights } => {
                f.debug_struct("GeometricMean").field("weights", weights).finish()
            }
            Self::DiversityPower { alpha } => {
                f.debug_struct("DiversityPower").field("alpha", alpha).finish()
            }
            Self::Affine { coeffs } => f.debug_struct("Affine").field("coeffs", coeffs).finish(),
            Self::MinOfAffines { pieces } => {
                f.debug_struct("MinOfAffines").field("pieces", pieces).finish()
            }
            Self::Custom { n, .. } => f.debug_struct("Custom").field("n", n).finish(),
        }
    }
}

fn check_positive_coeffs(a: &[f64]) -> Result<()> {
    if a.len() < 2 {
        return Err(Error::Shape("affine coefficients need at least 2 entries"));
    }
    if a.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidGenerator("non-finite affine coefficient"));
    }
    if a.iter().any(|&c| c <= 0.0) {
        return Err(Error::InvalidGenerator("affine piece must be positive on the simplex"));
    }
    Ok(())
}

impl GeneratingFunction {
    pub fn geometric_mean(weights: Vec<f64>) -> Result<Self> {
        Ok(Self::GeometricMean { weights: SimplexPoint::closed(weights)? })
    }

    pub fn diversity_power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Argument("diversity exponent must lie in (0, 1)"));
        }
        Ok(Self::DiversityPower { alpha })
    }

    pub fn affine(coeffs: Vec<f64>) -> Result<Self> {
        check_positive_coeffs(&coeffs)?;
        Ok(Self::Affine { coeffs })
    }

    pub fn min_of_affines(pieces: Vec<Vec<f64>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Shape("need at least one affine piece"));
        }
        let n = pieces[0].len();
        for a in &pieces {
            if a.len() != n {
                return Err(Error::Shape("affine pieces of different dimension"));
            }
            check_positive_coeffs(a)?;
        }
        Ok(Self::MinOfAffines { pieces })
    }

    /// Black-box generator on the `n`-asset simplex.  Runs a seeded
    /// spot-check of positivity (256 interior points) and midpoint
    /// concavity (1000 point pairs, slack 1e-10) before accepting.
    pub fn custom(n: usize, eval: Box<EvalFn>, dir: Option<Box<DirFn>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Shape("a simplex point needs at least 2 coordinates"));
        }
        let g = Self::Custom { n, eval, dir };
        g.validate_randomized(n)?;
        Ok(g)
    }

    fn validate_randomized(&self, n: usize) -> Result<()> {
        let mut rng = seeded_rng(VALIDATION_SEED);
        let mut points = Vec::with_capacity(VALIDATION_POINTS);
        for _ in 0..VALIDATION_POINTS {
            points.push(uniform_simplex(&mut rng, n)?);
        }
        for p in &points {
            let v = self.eval(p)?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidGenerator("evaluation is not strictly positive"));
            }
        }
        for _ in 0..VALIDATION_PAIRS {
            let p = uniform_simplex(&mut rng, n)?;
            let q = uniform_simplex(&mut rng, n)?;
            let mid = SimplexPoint::open(
                p.coords().iter().zip(q.coords()).map(|(a, b)| 0.5 * (a + b)).collect(),
            )?;
            if self.eval(&mid)? < 0.5 * (self.eval(&p)? + self.eval(&q)?) - MIDPOINT_CONCAVITY_TOL
            {
                return Err(Error::InvalidGenerator("midpoint concavity violated"));
            }
        }
        Ok(())
    }

    /// Ambient dimension when the family pins one down (`DiversityPower`
    /// applies to every `n`).
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Self::GeometricMean { weights } => Some(weights.n()),
            Self::DiversityPower { .. } => None,
            Self::Affine { coeffs } => Some(coeffs.len()),
            Self::MinOfAffines { pieces } => Some(pieces[0].len()),
            Self::Custom { n, .. } => Some(*n),
        }
    }

    fn check_point(&self, p: &SimplexPoint) -> Result<()> {
        if let Some(n) = self.dimension() {
            if n != p.n() {
                return Err(Error::Shape("point dimension does not match the generator"));
            }
        }
        Ok(())
    }

    /// `Phi(p)` at an interior point.
    pub fn eval(&self, p: &SimplexPoint) -> Result<f64> {
        self.check_point(p)?;
        match self {
            Self::Custom { eval, .. } => eval(p),
            _ => Ok(self.log_eval(p)?.exp()),
        }
    }

    /// `ln Phi(p)`, evaluated in log space where the family allows it.
    pub fn log_eval(&self, p: &SimplexPoint) -> Result<f64> {
        self.check_point(p)?;
        if p.coords().iter().any(|&c| c <= 0.0) {
            return Err(Error::Domain("generating functions are evaluated at interior points"));
        }
        match self {
            Self::GeometricMean { weights } => Ok(weights
                .coords()
                .iter()
                .zip(p.coords())
                .filter(|(&w, _)| w > 0.0)
                .map(|(&w, &pi)| w * pi.ln())
                .sum()),
            Self::DiversityPower { alpha } => {
                let s: f64 = p.coords().iter().map(|&c| c.powf(*alpha)).sum();
                Ok(s.ln() / alpha)
            }
            Self::Affine { coeffs } => {
                Ok(dot(coeffs, p.coords()).ln())
            }
            Self::MinOfAffines { pieces } => {
                let m = pieces.iter().map(|a| dot(a, p.coords())).fold(f64::INFINITY, f64::min);
                Ok(m.ln())
            }
            Self::Custom { eval, .. } => {
                let v = eval(p)?;
                if !(v > 0.0) {
                    return Err(Error::InvalidGenerator("evaluation is not strictly positive"));
                }
                Ok(v.ln())
            }
        }
    }

    /// One-sided directional derivative `D_v Phi(p)`.
    ///
    /// Closed forms for the built-in families; at a kink of
    /// `MinOfAffines` this is `min` over the active pieces' slopes (the
    /// exact one-sided derivative of a minimum).  Custom generators fall
    /// back to a forward difference with step `1e-6 / max(1, |v|)`.
    pub fn dir_derivative(&self, p: &SimplexPoint, v: &TangentVector) -> Result<f64> {
        self.check_point(p)?;
        if p.n() != v.n() {
            return Err(Error::Shape("direction dimension does not match the point"));
        }
        match self {
            Self::GeometricMean { weights } => {
                let phi = self.eval(p)?;
                let s: f64 = weights
                    .coords()
                    .iter()
                    .zip(p.coords().iter().zip(v.coords()))
                    .map(|(&w, (&pi, &vi))| w * vi / pi)
                    .sum();
                Ok(phi * s)
            }
            Self::DiversityPower { alpha } => {
                let s: f64 = p.coords().iter().map(|&c| c.powf(*alpha)).sum();
                let g: f64 = p
                    .coords()
                    .iter()
                    .zip(v.coords())
                    .map(|(&pi, &vi)| pi.powf(alpha - 1.0) * vi)
                    .sum();
                Ok(s.powf(1.0 / alpha - 1.0) * g)
            }
            Self::Affine { coeffs } => Ok(dot(coeffs, v.coords())),
            Self::MinOfAffines { pieces } => {
                let vals: Vec<f64> = pieces.iter().map(|a| dot(a, p.coords())).collect();
                let m = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                Ok(pieces
                    .iter()
                    .zip(&vals)
                    .filter(|(_, &val)| val - m <= ACTIVE_PIECE_TOL * m.abs().max(1.0))
                    .map(|(a, _)| dot(a, v.coords()))
                    .fold(f64::INFINITY, f64::min))
            }
            Self::Custom { eval, dir, .. } => {
                if let Some(d) = dir {
                    return d(p, v);
                }
                let norm = v.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
                let mut h = CUSTOM_FD_STEP / norm.max(1.0);
                let base = eval(p)?;
                for _ in 0..60 {
                    if let Ok(q) = step_point(p, v, h) {
                        return Ok((eval(&q)? - base) / h);
                    }
                    h *= 0.5;
                }
                Err(Error::Domain("cannot step inside the simplex along the direction"))
            }
        }
    }

    /// The portfolio generated at `p`:
    /// `pi_i = p_i (1 + D_{e(i)-p} log Phi(p))`, renormalized.
    ///
    /// At a kink of `MinOfAffines` the rule follows the first active piece
    /// (one valid supergradient selection).  Coordinates below
    /// `-`[`PORTFOLIO_NEG_TOL`] invalidate the generator; tiny negative
    /// rounding residues are clamped to zero.
    pub fn portfolio(&self, p: &SimplexPoint) -> Result<SimplexPoint> {
        self.check_point(p)?;
        if p.coords().iter().any(|&c| c <= 0.0) {
            return Err(Error::Domain("portfolios are generated at interior points"));
        }
        let n = p.n();
        let raw: Vec<f64> = match self {
            Self::GeometricMean { weights } => weights.coords().to_vec(),
            Self::DiversityPower { alpha } => {
                let pw: Vec<f64> = p.coords().iter().map(|&c| c.powf(*alpha)).collect();
                let s: f64 = pw.iter().sum();
                pw.iter().map(|&x| x / s).collect()
            }
            Self::Affine { coeffs } => weighted_by_coeffs(p, coeffs),
            Self::MinOfAffines { pieces } => {
                let vals: Vec<f64> = pieces.iter().map(|a| dot(a, p.coords())).collect();
                let m = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                let k = vals
                    .iter()
                    .position(|&val| val - m <= ACTIVE_PIECE_TOL * m.abs().max(1.0))
                    .expect("a minimal piece always exists");
                weighted_by_coeffs(p, &pieces[k])
            }
            Self::Custom { .. } => {
                let mut raw = Vec::with_capacity(n);
                let log_base = self.log_eval(p)?;
                for i in 0..n {
                    let mut e = alloc::vec![0.0; n];
                    e[i] = 1.0;
                    let v = TangentVector::between(p, &SimplexPoint::closed(e)?)?;
                    let d_log = match self {
                        Self::Custom { dir: Some(d), .. } => d(p, &v)? / log_base.exp(),
                        _ => self.custom_fd_log_derivative(p, &v, log_base)?,
                    };
                    raw.push(p[i] * (1.0 + d_log));
                }
                raw
            }
        };
        clamp_to_closed_simplex(raw)
    }

    fn custom_fd_log_derivative(
        &self,
        p: &SimplexPoint,
        v: &TangentVector,
        log_base: f64,
    ) -> Result<f64> {
        let norm = v.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut h = CUSTOM_FD_STEP / norm.max(1.0);
        for _ in 0..60 {
            if let Ok(q) = step_point(p, v, h) {
                return Ok((self.log_eval(&q)? - log_base) / h);
            }
            h *= 0.5;
        }
        Err(Error::Domain("cannot step inside the simplex along the direction"))
    }

    /// Divergence of a step `p -> q`:
    /// `T(q|p) = ln(1 + <pi(p)/p, q-p>) - ln Phi(q) + ln Phi(p)`.
    ///
    /// Nonnegative for every concave generator; a value below `-1e-12`
    /// reports the generator as invalid.
    pub fn l_divergence(&self, q: &SimplexPoint, p: &SimplexPoint) -> Result<LDivergenceValue> {
        if p.n() != q.n() {
            return Err(Error::Shape("points of different dimension"));
        }
        let pi = self.portfolio(p)?;
        let mut inner = 0.0;
        for i in 0..p.n() {
            inner += pi[i] / p[i] * (q[i] - p[i]);
        }
        let arg = 1.0 + inner;
        if arg <= 0.0 {
            return Err(Error::NumericDegeneracy("nonpositive value multiplier in divergence"));
        }
        let value = arg.ln() - self.log_eval(q)? + self.log_eval(p)?;
        LDivergenceValue::new(value)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `pi_i = p_i a_i / <a, p>` — the portfolio generated by `<a, .>`.
fn weighted_by_coeffs(p: &SimplexPoint, a: &[f64]) -> Vec<f64> {
    let s = dot(a, p.coords());
    p.coords().iter().zip(a).map(|(&pi, &ai)| pi * ai / s).collect()
}

/// `p + h v`, required to stay strictly inside the simplex.
fn step_point(p: &SimplexPoint, v: &TangentVector, h: f64) -> Result<SimplexPoint> {
    SimplexPoint::open(p.coords().iter().zip(v.coords()).map(|(&pi, &vi)| pi + h * vi).collect())
}

fn clamp_to_closed_simplex(mut raw: Vec<f64>) -> Result<SimplexPoint> {
    for c in raw.iter_mut() {
        if *c < -PORTFOLIO_NEG_TOL {
            return Err(Error::InvalidGenerator("generated weight is negative"));
        }
        if *c < 0.0 {
            *c = 0.0;
        }
    }
    let sum: f64 = raw.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::InvalidGenerator("generated weights do not sum to a positive value"));
    }
    for c in raw.iter_mut() {
        *c /= sum;
    }
    SimplexPoint::closed(raw)
}

/// Nonnegative per-step divergence of a generated rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LDivergenceValue(f64);

impl LDivergenceValue {
    fn new(value: f64) -> Result<Self> {
        if value < -1e-12 {
            return Err(Error::InvalidGenerator("divergence is negative beyond tolerance"));
        }
        Ok(LDivergenceValue(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Discrete excess growth rate of an arbitrary allocation `pi` held over a
/// step `p -> q`:
///
/// ```text
/// gamma = ln( sum_i pi_i q_i / p_i ) - sum_i pi_i ln(q_i / p_i)
/// ```
///
/// Terms with `pi_i = 0` are skipped; if some `pi_i > 0` meets `q_i = 0`
/// the rate is `+inf` (the allocation rode a coordinate to zero).
pub fn excess_growth_rate(pi: &SimplexPoint, q: &SimplexPoint, p: &SimplexPoint) -> Result<f64> {
    if pi.n() != p.n() || q.n() != p.n() {
        return Err(Error::Shape("points of different dimension"));
    }
    if p.coords().iter().any(|&c| c <= 0.0) {
        return Err(Error::Domain("base point must be interior"));
    }
    let mut linear = 0.0;
    let mut log_part = 0.0;
    for i in 0..p.n() {
        if pi[i] == 0.0 {
            continue;
        }
        if q[i] == 0.0 {
            return Ok(f64::INFINITY);
        }
        linear += pi[i] * q[i] / p[i];
        log_part += pi[i] * (q[i] / p[i]).ln();
    }
    if !(linear > 0.0) {
        return Err(Error::NumericDegeneracy("nonpositive value multiplier in excess growth"));
    }
    Ok(linear.ln() - log_part)
}

/// Portfolio induced by a supergradient `v` of `log Phi` at `p`:
/// `pi_i = p_i (v_i + 1 - sum_j p_j v_j)`.
///
/// A negative induced weight beyond rounding is reported (the most
/// negative coordinate rides in the error); nothing is clipped.
pub fn supergradient_to_portfolio(p: &SimplexPoint, v: &[f64]) -> Result<SimplexPoint> {
    if v.len() != p.n() {
        return Err(Error::Shape("supergradient dimension does not match the point"));
    }
    if p.coords().iter().any(|&c| c <= 0.0) {
        return Err(Error::Domain("base point must be interior"));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("non-finite supergradient coordinate"));
    }
    let pv = dot(p.coords(), v);
    let raw: Vec<f64> = p.coords().iter().zip(v).map(|(&pi, &vi)| pi * (vi + 1.0 - pv)).collect();
    let min = raw.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min < -1e-12 {
        return Err(Error::InvalidSupergradient(min));
    }
    clamp_to_closed_simplex(raw)
}

/// Tangent-space representative of the supergradient inducing `pi` at `p`:
/// `v_i = pi_i / p_i - (1/n) sum_j pi_j / p_j`.
pub fn portfolio_to_supergradient(p: &SimplexPoint, pi: &SimplexPoint) -> Result<TangentVector> {
    if pi.n() != p.n() {
        return Err(Error::Shape("points of different dimension"));
    }
    if p.coords().iter().any(|&c| c <= 0.0) {
        return Err(Error::Domain("base point must be interior"));
    }
    let w: Vec<f64> = pi.coords().iter().zip(p.coords()).map(|(&a, &b)| a / b).collect();
    Ok(project_to_tangent(&w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p3(a: f64, b: f64, c: f64) -> SimplexPoint {
        SimplexPoint::open(vec![a, b, c]).unwrap()
    }

    fn p2(a: f64, b: f64) -> SimplexPoint {
        SimplexPoint::open(vec![a, b]).unwrap()
    }

    #[test]
    fn diversity_power_frozen_example() {
        let g = GeneratingFunction::diversity_power(0.5).unwrap();
        let p = p3(0.25, 0.25, 0.5);
        assert!((g.eval(&p).unwrap() - 2.914213562373095).abs() < 1e-12);
        let pi = g.portfolio(&p).unwrap();
        assert!((pi[0] - 0.29289321881345248).abs() < 1e-12);
        assert!((pi[1] - 0.29289321881345248).abs() < 1e-12);
        assert!((pi[2] - 0.41421356237309505).abs() < 1e-12);
    }

    #[test]
    fn diversity_power_rejects_bad_exponent() {
        assert!(GeneratingFunction::diversity_power(0.0).is_err());
        assert!(GeneratingFunction::diversity_power(1.0).is_err());
        assert!(GeneratingFunction::diversity_power(-0.5).is_err());
    }

    #[test]
    fn geometric_mean_portfolio_is_constant() {
        let g = GeneratingFunction::geometric_mean(vec![0.2, 0.3, 0.5]).unwrap();
        for p in [p3(0.1, 0.1, 0.8), p3(0.4, 0.4, 0.2)] {
            let pi = g.portfolio(&p).unwrap();
            assert!((pi[0] - 0.2).abs() < 1e-15);
            assert!((pi[1] - 0.3).abs() < 1e-15);
            assert!((pi[2] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_mean_directional_derivative_closed_form() {
        // D_{e(i)-p} Phi = Phi(p) (w_i / p_i - 1).
        let g = GeneratingFunction::geometric_mean(vec![0.3, 0.7]).unwrap();
        let p = p2(0.6, 0.4);
        let phi = g.eval(&p).unwrap();
        let e0 = SimplexPoint::vertex(2, 0).unwrap();
        let v = TangentVector::between(&p, &e0).unwrap();
        let d = g.dir_derivative(&p, &v).unwrap();
        assert!((d - phi * (0.3 / 0.6 - 1.0)).abs() < 1e-12);
        // Against a central difference.
        let h = 1e-6;
        let num = (g.eval(&step_point(&p, &v, h).unwrap()).unwrap()
            - g.eval(&step_point(&p, &v, -h).unwrap()).unwrap())
            / (2.0 * h);
        assert!((d - num).abs() < 1e-8);
    }

    #[test]
    fn affine_portfolio_weights_by_coefficients() {
        let g = GeneratingFunction::affine(vec![2.0, 1.0]).unwrap();
        let p = p2(0.5, 0.5);
        let pi = g.portfolio(&p).unwrap();
        // pi_i = p_i a_i / <a, p> = (1.0, 0.5) / 1.5.
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(GeneratingFunction::affine(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn single_stock_is_generated_by_a_vertex_weighting() {
        // Phi(p) = p_1 (geometric mean with weight concentrated on one
        // coordinate) generates buy-and-hold of asset 1.
        let g = GeneratingFunction::geometric_mean(vec![1.0, 0.0]).unwrap();
        let pi = g.portfolio(&p2(0.3, 0.7)).unwrap();
        assert_eq!(pi.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn min_of_affines_kink_bounds() {
        // Pieces <(2,1,1), p> and <(1,1,2), p> meet where p1 = p3.
        let g = GeneratingFunction::min_of_affines(vec![vec![2.0, 1.0, 1.0], vec![1.0, 1.0, 2.0]])
            .unwrap();
        let p = p3(0.3, 0.4, 0.3);
        let pi = g.portfolio(&p).unwrap();
        let phi = g.eval(&p).unwrap();
        // Prop-style sandwich: p_i (1 + D_{e(i)-p} log Phi) <= pi_i
        //                      <= p_i (1 - D_{p-e(i)} log Phi).
        for i in 0..3 {
            let e = SimplexPoint::vertex(3, i).unwrap();
            let v = TangentVector::between(&p, &e).unwrap();
            let lower = p[i] * (1.0 + g.dir_derivative(&p, &v).unwrap() / phi);
            let upper = p[i] * (1.0 - g.dir_derivative(&p, &v.scale(-1.0)).unwrap() / phi);
            assert!(pi[i] >= lower - 1e-12, "coordinate {i}");
            assert!(pi[i] <= upper + 1e-12, "coordinate {i}");
        }
        // Away from the kink the active piece rules.
        let q = p3(0.5, 0.3, 0.2); // <a0,q> = 1.5, <a1,q> = 1.2 -> piece 1
        let pi_q = g.portfolio(&q).unwrap();
        let expect = weighted_by_coeffs(&q, &[1.0, 1.0, 2.0]);
        for i in 0..3 {
            assert!((pi_q[i] - expect[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn l_divergence_frozen_example() {
        let g = GeneratingFunction::geometric_mean(vec![0.5, 0.5]).unwrap();
        let t = g.l_divergence(&p2(0.6, 0.4), &p2(0.5, 0.5)).unwrap();
        assert!((t.value() - 0.020410997260127565).abs() < 1e-12);
    }

    #[test]
    fn excess_growth_matches_divergence_for_constant_rules() {
        let pi = SimplexPoint::closed(vec![0.5, 0.5]).unwrap();
        let gamma = excess_growth_rate(&pi, &p2(0.6, 0.4), &p2(0.5, 0.5)).unwrap();
        assert!((gamma - 0.020410997260127565).abs() < 1e-12);
        let g = GeneratingFunction::geometric_mean(vec![0.5, 0.5]).unwrap();
        let t = g.l_divergence(&p2(0.6, 0.4), &p2(0.5, 0.5)).unwrap();
        assert!((gamma - t.value()).abs() < 1e-15);
    }

    #[test]
    fn excess_growth_infinite_when_riding_to_zero() {
        let pi = SimplexPoint::closed(vec![0.5, 0.5]).unwrap();
        let q = SimplexPoint::closed(vec![1.0, 0.0]).unwrap();
        assert_eq!(excess_growth_rate(&pi, &q, &p2(0.5, 0.5)).unwrap(), f64::INFINITY);
        // A rule not touching the vanishing coordinate stays finite.
        let hold = SimplexPoint::closed(vec![1.0, 0.0]).unwrap();
        let gamma = excess_growth_rate(&hold, &q, &p2(0.5, 0.5)).unwrap();
        assert!(gamma.is_finite());
    }

    #[test]
    fn supergradient_frozen_example() {
        let p = p2(0.5, 0.5);
        let pi = supergradient_to_portfolio(&p, &[0.4, -0.4]).unwrap();
        assert!((pi[0] - 0.7).abs() < 1e-15);
        assert!((pi[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn supergradient_negativity_is_reported() {
        let p = p2(0.5, 0.5);
        match supergradient_to_portfolio(&p, &[2.0, -2.0]) {
            Err(Error::InvalidSupergradient(min)) => assert!((min - (-0.5)).abs() < 1e-15),
            other => panic!("expected invalid supergradient, got {other:?}"),
        }
    }

    #[test]
    fn supergradient_portfolio_round_trip() {
        let p = p3(0.2, 0.5, 0.3);
        let g = GeneratingFunction::diversity_power(0.5).unwrap();
        let pi = g.portfolio(&p).unwrap();
        let v = portfolio_to_supergradient(&p, &pi).unwrap();
        let back = supergradient_to_portfolio(&p, v.coords()).unwrap();
        for i in 0..3 {
            assert!((pi[i] - back[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn custom_accepts_concave_rejects_convex() {
        // Concave: an affine function through the black-box route.
        let ok = GeneratingFunction::custom(
            3,
            Box::new(|p: &SimplexPoint| Ok(2.0 * p[0] + p[1] + p[2])),
            None,
        );
        assert!(ok.is_ok());
        // Convex (and not concave): sum of squares.
        let bad = GeneratingFunction::custom(
            3,
            Box::new(|p: &SimplexPoint| Ok(p.coords().iter().map(|c| c * c).sum::<f64>())),
            None,
        );
        assert!(matches!(bad, Err(Error::InvalidGenerator(_))));
        // Not positive.
        let neg = GeneratingFunction::custom(
            3,
            Box::new(|p: &SimplexPoint| Ok(p[0] - 0.5)),
            None,
        );
        assert!(matches!(neg, Err(Error::InvalidGenerator(_))));
    }

    #[test]
    fn custom_portfolio_matches_closed_form_family() {
        // Same function, black-box vs closed form.
        let bx = GeneratingFunction::custom(
            2,
            Box::new(|p: &SimplexPoint| Ok((p[0] * p[1]).sqrt())),
            None,
        )
        .unwrap();
        let cf = GeneratingFunction::geometric_mean(vec![0.5, 0.5]).unwrap();
        let p = p2(0.3, 0.7);
        let a = bx.portfolio(&p).unwrap();
        let b = cf.portfolio(&p).unwrap();
        for i in 0..2 {
            assert!((a[i] - b[i]).abs() < 1e-6, "forward difference accuracy");
        }
    }

    #[test]
    fn superdifferential_inequality_randomized() {
        // 1 + <pi(p)/p, q-p> >= Phi(q)/Phi(p) for every concave generator.
        let gens: Vec<GeneratingFunction> = vec![
            GeneratingFunction::geometric_mean(vec![0.2, 0.3, 0.5]).unwrap(),
            GeneratingFunction::diversity_power(0.5).unwrap(),
            GeneratingFunction::affine(vec![1.0, 2.0, 3.0]).unwrap(),
            GeneratingFunction::min_of_affines(vec![
                vec![2.0, 1.0, 1.0],
                vec![1.0, 1.5, 1.2],
            ])
            .unwrap(),
        ];
        let mut rng = seeded_rng(91);
        for _ in 0..1000 {
            let p = uniform_simplex(&mut rng, 3).unwrap();
            let q = uniform_simplex(&mut rng, 3).unwrap();
            for g in &gens {
                let pi = g.portfolio(&p).unwrap();
                let mut inner = 0.0;
                for i in 0..3 {
                    inner += pi[i] / p[i] * (q[i] - p[i]);
                }
                let ratio = (g.log_eval(&q).unwrap() - g.log_eval(&p).unwrap()).exp();
                assert!(1.0 + inner >= ratio - 1e-10, "{g:?}");
                // Equivalent statement: the divergence is nonnegative.
                assert!(g.l_divergence(&q, &p).unwrap().value() >= -1e-12);
            }
        }
    }

    #[test]
    fn midpoint_concavity_randomized() {
        let gens: Vec<GeneratingFunction> = vec![
            GeneratingFunction::geometric_mean(vec![0.25, 0.25, 0.5]).unwrap(),
            GeneratingFunction::diversity_power(0.3).unwrap(),
            GeneratingFunction::diversity_power(0.8).unwrap(),
            GeneratingFunction::affine(vec![1.0, 2.0, 3.0]).unwrap(),
            GeneratingFunction::min_of_affines(vec![
                vec![2.0, 1.0, 1.0],
                vec![1.0, 1.0, 2.0],
            ])
            .unwrap(),
        ];
        let mut rng = seeded_rng(92);
        for _ in 0..1000 {
            let p = uniform_simplex(&mut rng, 3).unwrap();
            let q = uniform_simplex(&mut rng, 3).unwrap();
            let mid = SimplexPoint::open(
                p.coords().iter().zip(q.coords()).map(|(a, b)| 0.5 * (a + b)).collect(),
            )
            .unwrap();
            for g in &gens {
                let lhs = g.eval(&mid).unwrap();
                let rhs = 0.5 * (g.eval(&p).unwrap() + g.eval(&q).unwrap());
                assert!(lhs >= rhs - 1e-10, "{g:?}");
            }
        }
    }

    #[test]
    fn generated_portfolios_live_in_the_closed_simplex() {
        let gens: Vec<GeneratingFunction> = vec![
            GeneratingFunction::geometric_mean(vec![0.1, 0.9, 0.0]).unwrap(),
            GeneratingFunction::diversity_power(0.5).unwrap(),
            GeneratingFunction::min_of_affines(vec![
                vec![2.0, 1.0, 1.0],
                vec![1.0, 1.0, 2.0],
            ])
            .unwrap(),
        ];
        let mut rng = seeded_rng(93);
        for _ in 0..500 {
            let p = uniform_simplex(&mut rng, 3).unwrap();
            for g in &gens {
                let pi = g.portfolio(&p).unwrap();
                let sum: f64 = pi.coords().iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
                assert!(pi.coords().iter().all(|&c| c >= 0.0));
            }
        }
    }
}
