//! Price-history backtesting for two-asset transport portfolios.
//!
//! The pipeline turns a table of dated prices into capitalisation weights,
//! fits a normal law to the log weight-ratio series over a training window,
//! builds the allocation curve that transports the fitted law onto a chosen
//! target law, and evaluates the relative value of that rule over a test
//! window. A deterministic synthetic price history is provided so the whole
//! pipeline can be exercised without external data.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::calculus::integrate;
use crate::dynamics::{relative_value, MarketPath};
use crate::error::{Error, Result};
use crate::rearrangement::{logistic, two_stock_portfolio, Distribution1D, TwoStockPortfolioCurve};
use crate::sampling;
use crate::simplex::SimplexPoint;
use crate::special::normal_quantile;
#[allow(unused_imports)]
use num_traits::Float;

/// Number of rows in the sampled allocation-curve table.
pub const CURVE_POINTS: usize = 101;

/// Central probability mass of the fitted law covered by the curve table.
const CURVE_COVERAGE: f64 = 0.999;

/// Absolute quadrature tolerance for the log generating-function integral.
const GENERATOR_TOL: f64 = 1e-11;

/// A dated table of strictly positive prices, one row per observation date
/// and one column per asset. Dates are ISO `YYYY-MM-DD` strings, which order
/// lexicographically, and must be strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<String>,
    prices: Vec<Vec<f64>>,
}

impl PriceSeries {
    pub fn new(dates: Vec<String>, prices: Vec<Vec<f64>>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::Shape("price series is empty"));
        }
        if dates.len() != prices.len() {
            return Err(Error::Shape("price series needs exactly one date per row"));
        }
        let n = prices[0].len();
        if n == 0 {
            return Err(Error::Shape("price rows need at least one asset"));
        }
        for row in &prices {
            if row.len() != n {
                return Err(Error::Shape("price rows have inconsistent widths"));
            }
            for &p in row {
                if !p.is_finite() || !(p > 0.0) {
                    return Err(Error::Domain("prices must be finite and strictly positive"));
                }
            }
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("dates must be strictly increasing"));
        }
        Ok(Self { dates, prices })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    /// Number of observation dates.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Number of assets (columns).
    pub fn asset_count(&self) -> usize {
        self.prices[0].len()
    }
}

/// Capitalisation-weight path implied by a price series.
///
/// Asset `i` carries initial capitalisation `caps[i]` (all ones by default),
/// so its capitalisation at time `t` is `caps[i] * p_i(t) / p_i(0)` and its
/// weight is that capitalisation over the total.
pub fn market_weights(series: &PriceSeries, initial_caps: Option<&[f64]>) -> Result<MarketPath> {
    let n = series.asset_count();
    let caps: Vec<f64> = match initial_caps {
        Some(c) => {
            if c.len() != n {
                return Err(Error::Shape("one initial capitalisation per asset required"));
            }
            if c.iter().any(|&x| !x.is_finite() || !(x > 0.0)) {
                return Err(Error::Domain(
                    "initial capitalisations must be finite and strictly positive",
                ));
            }
            c.to_vec()
        }
        None => vec![1.0; n],
    };
    let first = &series.prices()[0];
    let mut points = Vec::with_capacity(series.len());
    for row in series.prices() {
        let cap_now: Vec<f64> = (0..n).map(|i| caps[i] * row[i] / first[i]).collect();
        let total: f64 = cap_now.iter().sum();
        let weights: Vec<f64> = cap_now.iter().map(|&x| x / total).collect();
        points.push(SimplexPoint::closed(weights)?);
    }
    MarketPath::new(points)
}

/// Log weight-ratio series `theta(t) = ln(mu_1(t) / mu_2(t))` of a
/// two-asset path.
pub fn theta_series(path: &MarketPath) -> Result<Vec<f64>> {
    if path.n() != 2 {
        return Err(Error::Shape("log weight ratios are defined for exactly two assets"));
    }
    Ok(path
        .points()
        .iter()
        .map(|p| (p.coords()[0] / p.coords()[1]).ln())
        .collect())
}

/// Divisor used for the sample variance when fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SdDenominator {
    /// Divide the sum of squared deviations by the sample size.
    N,
    /// Divide by the sample size minus one (the default).
    #[default]
    NMinus1,
}

/// Fit a normal law to a sample by moment matching.
pub fn fit_theta_normal(thetas: &[f64], denominator: SdDenominator) -> Result<Distribution1D> {
    if thetas.len() < 2 {
        return Err(Error::Shape("fitting needs at least two observations"));
    }
    let k = thetas.len() as f64;
    let mean = thetas.iter().sum::<f64>() / k;
    let ss: f64 = thetas.iter().map(|&t| (t - mean) * (t - mean)).sum();
    let divisor = match denominator {
        SdDenominator::N => k,
        SdDenominator::NMinus1 => k - 1.0,
    };
    let variance = ss / divisor;
    if !(variance > 0.0) {
        return Err(Error::NumericDegeneracy(
            "sample variance vanishes; cannot fit a normal law",
        ));
    }
    Distribution1D::normal(mean, variance.sqrt())
}

/// Index windows and laws driving one backtest run. Window bounds are
/// half-open row ranges into the price series; the training window must end
/// no later than the test window starts.
#[derive(Debug, Clone)]
pub struct BacktestConfig {
    pub train_start: usize,
    pub train_end: usize,
    pub test_start: usize,
    pub test_end: usize,
    /// Target law for the log weight ratio.
    pub q_spec: Distribution1D,
    /// Initial capitalisations, one per asset; all ones when absent.
    pub initial_caps: Option<Vec<f64>>,
    pub sd_denominator: SdDenominator,
}

impl BacktestConfig {
    pub fn validate(&self, series: &PriceSeries) -> Result<()> {
        if self.train_end < self.train_start + 2 {
            return Err(Error::Argument("training window needs at least two rows"));
        }
        if self.test_end < self.test_start + 2 {
            return Err(Error::Argument("test window needs at least two rows"));
        }
        if self.train_end > self.test_start {
            return Err(Error::Argument("training window must end before the test window starts"));
        }
        if self.test_end > series.len() {
            return Err(Error::Shape("test window runs past the end of the price series"));
        }
        Ok(())
    }
}

/// Everything a backtest run produces: the full log weight-ratio series, the
/// fitted law, the realised log relative value over the test window, and a
/// sampled allocation-curve table.
#[derive(Debug, Clone)]
pub struct BacktestReport {
    /// All observation dates, aligned with `theta`.
    pub dates: Vec<String>,
    /// Log weight ratio at every observation date.
    pub theta: Vec<f64>,
    /// Test-window dates, aligned with `log_v`.
    pub test_dates: Vec<String>,
    /// Log relative value over the test window; the first entry is zero.
    pub log_v: Vec<f64>,
    /// Mean of the fitted normal law.
    pub p_mean: f64,
    /// Standard deviation of the fitted normal law.
    pub p_sd: f64,
    /// `(mu_1, pi_1)` rows sampled over the central mass of the fitted law.
    pub curve: Vec<(f64, f64)>,
}

/// Run the two-asset pipeline: weights, training-window fit, transport
/// curve, test-window relative value, and curve table.
pub fn run_backtest(series: &PriceSeries, config: &BacktestConfig) -> Result<BacktestReport> {
    config.validate(series)?;
    if series.asset_count() != 2 {
        return Err(Error::Shape("the backtest pipeline is specialised to two assets"));
    }
    let path = market_weights(series, config.initial_caps.as_deref())?;
    let theta = theta_series(&path)?;
    let fitted = fit_theta_normal(
        &theta[config.train_start..config.train_end],
        config.sd_denominator,
    )?;
    let Distribution1D::Normal { mean: p_mean, sd: p_sd } = fitted else {
        return Err(Error::Argument("normal fit produced a non-normal law"));
    };
    let curve = two_stock_portfolio(&fitted, &config.q_spec);

    let test_points = path.points()[config.test_start..config.test_end].to_vec();
    let test_path = MarketPath::new(test_points)?;
    let values = relative_value(&curve.clone().portfolio_map(), &test_path)?;
    let log_v: Vec<f64> = values.iter().map(|v| v.ln()).collect();

    // Sample the allocation curve over the symmetric interval of log weight
    // ratios holding the central CURVE_COVERAGE mass of the fitted law.
    let z = normal_quantile(0.5 + CURVE_COVERAGE / 2.0)?;
    let lo = p_mean - z * p_sd;
    let hi = p_mean + z * p_sd;
    let mut curve_rows = Vec::with_capacity(CURVE_POINTS);
    for k in 0..CURVE_POINTS {
        let th = lo + (hi - lo) * k as f64 / (CURVE_POINTS - 1) as f64;
        curve_rows.push((logistic(th), curve.pi1_of_theta(th)?));
    }

    let test_dates = series.dates()[config.test_start..config.test_end].to_vec();
    Ok(BacktestReport {
        dates: series.dates().to_vec(),
        theta,
        test_dates,
        log_v,
        p_mean,
        p_sd,
        curve: curve_rows,
    })
}

/// Log generating function of a two-asset allocation curve as a function of
/// the log weight ratio, relative to a reference ratio:
/// `log Phi(theta) - log Phi(theta_ref) = integral of (pi_1 - mu_1)`.
///
/// Every allocation curve produced by a monotone transport map satisfies the
/// two-asset drift condition, so this integral is the generating function
/// whose decomposition reproduces the backtest's log relative value.
pub fn two_stock_log_generator(
    curve: &TwoStockPortfolioCurve,
    theta_ref: f64,
    theta: f64,
) -> Result<f64> {
    integrate(
        &|s| Ok(curve.pi1_of_theta(s)? - logistic(s)),
        theta_ref,
        theta,
        GENERATOR_TOL,
    )
}

/// Deterministic synthetic two-asset monthly price history.
///
/// The log weight-ratio series starts pinned at zero (both assets open at
/// price one) and is otherwise drawn from a seeded stationary normal stream,
/// affinely calibrated so that the sample mean and standard deviation
/// (denominator `T - 1`) over the training window `[0, train_len)` equal
/// `target_mean` and `target_sd` to float precision. The remaining months
/// continue the same calibrated stream, and the total capitalisation follows
/// an independent mild geometric drift so both price columns move.
pub fn synthetic_two_stock_series(
    seed: u64,
    months: usize,
    train_len: usize,
    target_mean: f64,
    target_sd: f64,
) -> Result<PriceSeries> {
    if train_len < 3 {
        return Err(Error::Shape("calibration needs a training window of at least three months"));
    }
    if months < train_len + 2 {
        return Err(Error::Shape("synthetic series needs at least two test months"));
    }
    if !(target_sd > 0.0) || !target_sd.is_finite() || !target_mean.is_finite() {
        return Err(Error::Argument("target moments must be finite with positive deviation"));
    }
    let mut rng = sampling::seeded_rng(seed);
    let mut raw = Vec::with_capacity(months - 1);
    for _ in 1..months {
        raw.push(normal_quantile(sampling::uniform_open(&mut rng))?);
    }

    // With theta(0) = 0 fixed, the training window holds `train_len` values
    // of which `train_len - 1` are free. Writing those as a + b * raw and
    // matching the window's sample mean and variance to the targets gives a
    // linear equation for a and a quadratic for b.
    let l = train_len as f64;
    let block = &raw[..train_len - 1];
    let block_mean = block.iter().sum::<f64>() / (l - 1.0);
    let block_ss: f64 = block.iter().map(|&r| (r - block_mean) * (r - block_mean)).sum();
    if !(block_ss > 0.0) {
        return Err(Error::NumericDegeneracy("seed produced a degenerate training block"));
    }
    let target_ss = (l - 1.0) * target_sd * target_sd - target_mean * target_mean * l / (l - 1.0);
    if !(target_ss > 0.0) {
        return Err(Error::Argument(
            "target moments are unreachable with the start pinned at zero",
        ));
    }
    let b = (target_ss / block_ss).sqrt();
    let a = target_mean * l / (l - 1.0) - b * block_mean;

    let mut theta = Vec::with_capacity(months);
    theta.push(0.0);
    for &r in &raw {
        theta.push(a + b * r);
    }

    // Total capitalisation drift, independent of the weights.
    let mut total_noise = Vec::with_capacity(months);
    total_noise.push(0.0);
    for _ in 1..months {
        total_noise.push(normal_quantile(sampling::uniform_open(&mut rng))?);
    }

    let mut dates = Vec::with_capacity(months);
    let mut prices = Vec::with_capacity(months);
    for t in 0..months {
        dates.push(month_date(t));
        let mu1 = logistic(theta[t]);
        let total = 2.0 * (0.003 * t as f64 + 0.02 * total_noise[t]).exp();
        prices.push(vec![total * mu1, total * (1.0 - mu1)]);
    }
    PriceSeries::new(dates, prices)
}

/// First-of-month ISO date `t` months after January 2000.
fn month_date(t: usize) -> String {
    let year = 2000 + t / 12;
    let month = t % 12 + 1;
    format!("{year:04}-{month:02}-01")
}
