//! One-dimensional distributions, quantile-matching transport maps, and
//! the exact two-stock portfolio curve they induce.
//!
//! With two assets the log weight ratio `theta = log(mu_1/mu_2)` lives on
//! the real line, where optimal transport is solved by monotone
//! rearrangement: `F = H^{-1} o G` pushes the law of `theta` onto the
//! target law, and the allocation reads `pi_1 = logistic(theta -
//! F(theta))`.  Gaussian marginals give an affine `F`, hence a
//! power-weighted (diversity-like) portfolio curve.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::calculus::PortfolioMap;
use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;
use crate::special::{normal_cdf, normal_quantile};
use crate::transport::{cost, next_permutation, CostKind};

/// Probability levels are clamped to `[TAIL_CLAMP, 1 - TAIL_CLAMP]`
/// before quantile evaluation, keeping diverging tails finite.
pub const TAIL_CLAMP: f64 = 1e-12;

/// A one-dimensional law with closed-form CDF and quantile function.
///
/// The empirical kind interpolates linearly between order statistics
/// (so its CDF is continuous), with a single-sample list degenerating to
/// a point mass.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution1D {
    Normal { mean: f64, sd: f64 },
    Uniform { a: f64, b: f64 },
    Laplace { loc: f64, scale: f64 },
    Empirical { samples: Vec<f64> },
}

impl Distribution1D {
    /// Normal with the given mean and standard deviation (not variance).
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !sd.is_finite() || !(sd > 0.0) {
            return Err(Error::Argument("normal law needs finite mean and positive sd"));
        }
        Ok(Distribution1D::Normal { mean, sd })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || !(a < b) {
            return Err(Error::Argument("uniform law needs finite a < b"));
        }
        Ok(Distribution1D::Uniform { a, b })
    }

    /// Laplace with density `exp(-|x - loc| / scale) / (2 scale)`.
    pub fn laplace(loc: f64, scale: f64) -> Result<Self> {
        if !loc.is_finite() || !scale.is_finite() || !(scale > 0.0) {
            return Err(Error::Argument("laplace law needs finite location and positive scale"));
        }
        Ok(Distribution1D::Laplace { loc, scale })
    }

    /// Empirical law of the given samples (sorted internally); one sample
    /// makes a point mass.
    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Argument("empirical law needs at least one sample"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Domain("empirical samples must be finite"));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Distribution1D::Empirical { samples })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution1D::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            Distribution1D::Uniform { a, b } => {
                if x <= *a {
                    0.0
                } else if x >= *b {
                    1.0
                } else {
                    (x - a) / (b - a)
                }
            }
            Distribution1D::Laplace { loc, scale } => {
                if x < *loc {
                    0.5 * ((x - loc) / scale).exp()
                } else {
                    1.0 - 0.5 * (-(x - loc) / scale).exp()
                }
            }
            Distribution1D::Empirical { samples } => {
                let k = samples.len();
                if k == 1 {
                    return if x < samples[0] { 0.0 } else { 1.0 };
                }
                if x <= samples[0] {
                    return if x < samples[0] { 0.0 } else { 0.0 };
                }
                if x >= samples[k - 1] {
                    return 1.0;
                }
                // First order statistic strictly above x.
                let hi = samples.partition_point(|&s| s <= x);
                let lo = hi - 1;
                let (xl, xr) = (samples[lo], samples[hi]);
                let frac = if xr > xl { (x - xl) / (xr - xl) } else { 0.0 };
                (lo as f64 + frac) / (k - 1) as f64
            }
        }
    }

    /// `inf { y : CDF(y) >= u }` for `u` strictly inside (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Argument("quantile level must lie strictly in (0, 1)"));
        }
        Ok(match self {
            Distribution1D::Normal { mean, sd } => mean + sd * normal_quantile(u)?,
            Distribution1D::Uniform { a, b } => a + (b - a) * u,
            Distribution1D::Laplace { loc, scale } => {
                if u < 0.5 {
                    loc + scale * (2.0 * u).ln()
                } else {
                    loc - scale * (2.0 * (1.0 - u)).ln()
                }
            }
            Distribution1D::Empirical { samples } => {
                let k = samples.len();
                if k == 1 {
                    return Ok(samples[0]);
                }
                let h = (k - 1) as f64 * u;
                let i = (h.floor() as usize).min(k - 2);
                samples[i] + (h - i as f64) * (samples[i + 1] - samples[i])
            }
        })
    }
}

/// Quantile-matching transport `F(x) = quantile_Q(CDF_P(x))`, with the
/// CDF level clamped away from {0, 1}; the flag reports whether the
/// clamp engaged.
pub fn monotone_map_clamped(
    p: &Distribution1D,
    q: &Distribution1D,
    x: f64,
) -> Result<(f64, bool)> {
    let u = p.cdf(x);
    let clamped = u.clamp(TAIL_CLAMP, 1.0 - TAIL_CLAMP);
    Ok((q.quantile(clamped)?, clamped != u))
}

/// The monotone rearrangement pushing `p` onto `q`, evaluated at `x`.
pub fn monotone_map(p: &Distribution1D, q: &Distribution1D, x: f64) -> Result<f64> {
    monotone_map_clamped(p, q, x).map(|(y, _)| y)
}

/// An affine map `x -> intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineMap {
    pub fn apply(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Closed-form monotone transport between two normal laws:
/// slope `s2/s1`, intercept `m2 - (s2/s1) m1`.
pub fn gaussian_transport(m1: f64, s1: f64, m2: f64, s2: f64) -> Result<AffineMap> {
    if !(s1 > 0.0) || !(s2 > 0.0) {
        return Err(Error::Argument("standard deviations must be positive"));
    }
    if !m1.is_finite() || !m2.is_finite() || !s1.is_finite() || !s2.is_finite() {
        return Err(Error::Argument("gaussian parameters must be finite"));
    }
    let slope = s2 / s1;
    Ok(AffineMap { slope, intercept: m2 - slope * m1 })
}

/// `1 / (1 + e^{-x})` without overflow on either tail.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// The two-asset allocation curve induced by a transport map on log
/// weight ratios: `pi_1 = logistic(theta - F(theta))`.
#[derive(Debug, Clone)]
pub struct TwoStockPortfolioCurve {
    source: Distribution1D,
    target: Distribution1D,
}

impl TwoStockPortfolioCurve {
    /// The transport map `F` at a log weight ratio.
    pub fn shift(&self, theta: f64) -> Result<f64> {
        monotone_map(&self.source, &self.target, theta)
    }

    /// First-asset weight as a function of the log weight ratio.
    pub fn pi1_of_theta(&self, theta: f64) -> Result<f64> {
        Ok(logistic(theta - self.shift(theta)?))
    }

    /// First-asset weight as a function of the first market weight.
    pub fn pi1_of_mu1(&self, mu1: f64) -> Result<f64> {
        if !(mu1 > 0.0 && mu1 < 1.0) {
            return Err(Error::Domain("market weight must lie strictly in (0, 1)"));
        }
        self.pi1_of_theta((mu1 / (1.0 - mu1)).ln())
    }

    /// The curve as an allocation rule on the two-asset simplex.
    pub fn portfolio_map(self) -> PortfolioMap {
        let smooth = !matches!(self.source, Distribution1D::Empirical { .. })
            && !matches!(self.target, Distribution1D::Empirical { .. });
        PortfolioMap::from_fn(Some(2), smooth, move |p| {
            let pi1 = self.pi1_of_theta((p[0] / p[1]).ln())?;
            SimplexPoint::closed(alloc::vec![pi1, 1.0 - pi1])
        })
    }
}

/// Build the two-stock curve for a source law of `theta` and a target
/// law the transport should reach.
pub fn two_stock_portfolio(
    source: &Distribution1D,
    target: &Distribution1D,
) -> TwoStockPortfolioCurve {
    TwoStockPortfolioCurve { source: source.clone(), target: target.clone() }
}

/// Outcome of the brute-force optimality audit of the monotone pairing.
#[derive(Debug, Clone)]
pub struct OptimalityReport {
    /// The sorted pairing minimizes the discretized transport cost.
    pub monotone_optimal: bool,
    /// Smallest gap to any other permutation (positive = unique optimum).
    pub margin: f64,
    /// Cost of the sorted pairing.
    pub monotone_value: f64,
}

/// Largest quantile grid [`verify_1d_optimality`] accepts.
pub const OPTIMALITY_MAX_GRID: usize = 8;

/// Discretize both laws into `grid_size` equal-mass quantile atoms (at
/// levels `(k + 1/2) / grid_size`), evaluate the exponential-coordinate
/// transport cost `psi(theta - phi)` over every pairing, and report how
/// the sorted (monotone) pairing compares against all others.
pub fn verify_1d_optimality(
    source: &Distribution1D,
    target: &Distribution1D,
    grid_size: usize,
) -> Result<OptimalityReport> {
    if !(2..=OPTIMALITY_MAX_GRID).contains(&grid_size) {
        return Err(Error::Argument("grid size must lie in 2..=8"));
    }
    let k = grid_size;
    let mut thetas = Vec::with_capacity(k);
    let mut phis = Vec::with_capacity(k);
    for i in 0..k {
        let u = (i as f64 + 0.5) / k as f64;
        thetas.push(source.quantile(u)?);
        phis.push(target.quantile(u)?);
    }
    let mut matrix = alloc::vec![0.0f64; k * k];
    for i in 0..k {
        for j in 0..k {
            matrix[i * k + j] = cost(CostKind::ExpShift, &[thetas[i]], &[phis[j]])?;
        }
    }
    let mass = 1.0 / k as f64;
    let value_of = |perm: &[usize]| -> f64 {
        perm.iter().enumerate().map(|(i, &j)| mass * matrix[i * k + j]).sum()
    };
    let identity: Vec<usize> = (0..k).collect();
    let monotone_value = value_of(&identity);
    let mut perm = identity.clone();
    let mut margin = f64::INFINITY;
    while next_permutation(&mut perm) {
        let v = value_of(&perm);
        if v - monotone_value < margin {
            margin = v - monotone_value;
        }
    }
    Ok(OptimalityReport { monotone_optimal: margin >= 0.0, margin, monotone_value })
}
