//! Points, tangent vectors and exponential coordinates on the unit simplex.
//!
//! A weight configuration of an `n`-asset market lives in the simplex
//! `{ p in R^n : p_i >= 0, sum p_i = 1 }`; strictly positive configurations
//! form its interior.  The interior is globally parameterized by the
//! exponential coordinates `theta_i = ln(p_i / p_n)`, `i = 1..n-1`, whose
//! inverse goes through the log-partition function
//! `psi(theta) = ln(1 + sum_i exp(theta_i))`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` (points) and `|sum|` (tangent vectors) at
/// construction. Inputs within tolerance are renormalized; inputs outside
/// are rejected rather than silently fixed.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

fn check_dim(coords: &[f64]) -> Result<()> {
    if coords.len() < 2 {
        return Err(Error::Shape("a simplex point needs at least 2 coordinates"));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("non-finite coordinate"));
    }
    Ok(())
}

/// A probability vector, tagged with whether it is known to be strictly
/// positive (`open`) or merely nonnegative (`closed`).
///
/// Coordinates always sum to 1 up to one rounding: constructors verify the
/// raw sum lies within [`SIMPLEX_SUM_TOL`] of 1 and then divide by it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
    open: bool,
}

impl SimplexPoint {
    /// Strictly positive point of the open simplex.
    pub fn open(coords: Vec<f64>) -> Result<Self> {
        Self::build(coords, true)
    }

    /// Nonnegative point of the closed simplex.
    pub fn closed(coords: Vec<f64>) -> Result<Self> {
        Self::build(coords, false)
    }

    fn build(mut coords: Vec<f64>, open: bool) -> Result<Self> {
        check_dim(&coords)?;
        if open {
            if coords.iter().any(|&c| c <= 0.0) {
                return Err(Error::Domain("open-simplex point needs strictly positive weights"));
            }
        } else if coords.iter().any(|&c| c < 0.0) {
            return Err(Error::Domain("simplex point needs nonnegative weights"));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::Domain("weights do not sum to 1 within tolerance"));
        }
        for c in coords.iter_mut() {
            *c /= sum;
        }
        Ok(SimplexPoint { coords, open })
    }

    /// Uniform weights `(1/n, ..., 1/n)`.
    pub fn barycenter(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Shape("a simplex point needs at least 2 coordinates"));
        }
        Self::open(alloc::vec![1.0 / n as f64; n])
    }

    /// The `i`-th vertex `e(i)` of the closed simplex.
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::Shape("vertex index out of range"));
        }
        let mut c = alloc::vec![0.0; n];
        c[i] = 1.0;
        Self::closed(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    /// Reinterpret as a point of the open simplex, verifying positivity.
    pub fn into_open(self) -> Result<Self> {
        if self.open {
            return Ok(self);
        }
        Self::build(self.coords, true)
    }

    /// Forget strict positivity.
    pub fn into_closed(mut self) -> Self {
        self.open = false;
        self
    }
}

impl core::ops::Index<usize> for SimplexPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// A vector tangent to the simplex: coordinates summing to 0 within
/// [`SIMPLEX_SUM_TOL`]. The residual mean is removed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    coords: Vec<f64>,
}

impl TangentVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(&coords)?;
        let sum: f64 = coords.iter().sum();
        if sum.abs() > SIMPLEX_SUM_TOL {
            return Err(Error::Domain("tangent vector coordinates do not sum to 0"));
        }
        Ok(project_to_tangent(&coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Difference `q - p` of two simplex points (always tangent).
    pub fn between(p: &SimplexPoint, q: &SimplexPoint) -> Result<Self> {
        if p.n() != q.n() {
            return Err(Error::Shape("points of different dimension"));
        }
        let d: Vec<f64> = q.coords().iter().zip(p.coords()).map(|(a, b)| a - b).collect();
        Ok(project_to_tangent(&d))
    }

    pub fn scale(&self, t: f64) -> Self {
        TangentVector { coords: self.coords.iter().map(|c| c * t).collect() }
    }
}

impl core::ops::Index<usize> for TangentVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// Euclidean projection of an arbitrary vector onto the tangent space
/// `{ v : sum v_i = 0 }` (removes the coordinate mean).
pub fn project_to_tangent(v: &[f64]) -> TangentVector {
    let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
    TangentVector { coords: v.iter().map(|c| c - mean).collect() }
}

/// Exponential coordinates of an interior point: a vector in `R^(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpCoord {
    theta: Vec<f64>,
}

impl ExpCoord {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Shape("exponential coordinates need at least 1 component"));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("non-finite exponential coordinate"));
        }
        Ok(ExpCoord { theta })
    }

    pub fn components(&self) -> &[f64] {
        &self.theta
    }

    /// Dimension of the ambient simplex (`n = len + 1`).
    pub fn n(&self) -> usize {
        self.theta.len() + 1
    }

    /// Componentwise difference `self - other`.
    pub fn sub(&self, other: &ExpCoord) -> Result<ExpCoord> {
        if self.theta.len() != other.theta.len() {
            return Err(Error::Shape("exponential coordinates of different dimension"));
        }
        ExpCoord::new(self.theta.iter().zip(&other.theta).map(|(a, b)| a - b).collect())
    }
}

impl core::ops::Index<usize> for ExpCoord {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.theta[i]
    }
}

/// `theta_i = ln(p_i / p_n)` for an interior point `p`.
pub fn to_exponential(p: &SimplexPoint) -> Result<ExpCoord> {
    if p.coords().iter().any(|&c| c <= 0.0) {
        return Err(Error::Domain("exponential coordinates need strictly positive weights"));
    }
    let n = p.n();
    let last = p[n - 1];
    ExpCoord::new(p.coords()[..n - 1].iter().map(|&c| (c / last).ln()).collect())
}

/// Log-partition function `psi(theta) = ln(1 + sum_i exp(theta_i))`,
/// evaluated with max-subtraction so large components cannot overflow.
pub fn psi(theta: &ExpCoord) -> f64 {
    let m = theta.components().iter().fold(0.0_f64, |a, &t| a.max(t));
    let s: f64 = (-m).exp() + theta.components().iter().map(|&t| (t - m).exp()).sum::<f64>();
    m + s.ln()
}

/// Inverse of [`to_exponential`]: `p_i = exp(theta_i - psi)`, `p_n = exp(-psi)`.
///
/// Fails if a weight underflows to zero (coordinates too extreme for a
/// strictly positive double-precision representation).
pub fn from_exponential(theta: &ExpCoord) -> Result<SimplexPoint> {
    let ps = psi(theta);
    let mut coords: Vec<f64> = theta.components().iter().map(|&t| (t - ps).exp()).collect();
    coords.push((-ps).exp());
    if coords.iter().any(|&c| c <= 0.0) {
        return Err(Error::Domain("exponential coordinates too extreme: weight underflows"));
    }
    // The parameterization lands on the simplex up to rounding; the
    // constructor's renormalization absorbs it.
    SimplexPoint::open(coords)
}

/// Fisher inner product `(1/2) sum_i u_i v_i / p_i` of two tangent vectors
/// at a strictly positive point.
pub fn fisher_inner(p: &SimplexPoint, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if u.n() != p.n() || v.n() != p.n() {
        return Err(Error::Shape("tangent vectors must match the point's dimension"));
    }
    if p.coords().iter().any(|&c| c <= 0.0) {
        return Err(Error::Domain("Fisher inner product needs strictly positive weights"));
    }
    Ok(0.5
        * p.coords()
            .iter()
            .zip(u.coords().iter().zip(v.coords()))
            .map(|(&pi, (&ui, &vi))| ui * vi / pi)
            .sum::<f64>())
}
