//! JSON document shapes accepted on the command line and in config files,
//! and their resolution into core types.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use fgp_core::backtest::{BacktestConfig, SdDenominator};
use fgp_core::calculus::{counterexample_portfolio, PortfolioMap};
use fgp_core::dynamics::Region;
use fgp_core::generating::GeneratingFunction;
use fgp_core::rearrangement::Distribution1D;
use fgp_core::simplex::SimplexPoint;
use fgp_core::transport::{CostKind, DiscreteMeasure};
use serde::Deserialize;

use crate::csvio::load_samples;

/// One-dimensional distribution document, e.g.
/// `{"kind":"normal","mean":-0.626,"sd":0.305}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Normal { mean: f64, sd: f64 },
    Uniform { a: f64, b: f64 },
    Laplace { loc: f64, scale: f64 },
    Empirical { samples_file: PathBuf },
}

impl DistributionSpec {
    /// Build the distribution, reading any referenced samples file.
    /// Relative sample paths are taken from `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<Distribution1D> {
        let dist = match self {
            DistributionSpec::Normal { mean, sd } => Distribution1D::normal(*mean, *sd)?,
            DistributionSpec::Uniform { a, b } => Distribution1D::uniform(*a, *b)?,
            DistributionSpec::Laplace { loc, scale } => Distribution1D::laplace(*loc, *scale)?,
            DistributionSpec::Empirical { samples_file } => {
                let path = if samples_file.is_absolute() {
                    samples_file.clone()
                } else {
                    base_dir.join(samples_file)
                };
                Distribution1D::empirical(load_samples(&path)?)?
            }
        };
        Ok(dist)
    }
}

/// Generating-function document, e.g. `{"kind":"diversity","alpha":0.5}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    GeometricMean { weights: Vec<f64> },
    Diversity { alpha: f64 },
    Affine { coeffs: Vec<f64> },
    MinAffine { pieces: Vec<Vec<f64>> },
}

impl GeneratorSpec {
    pub fn resolve(&self) -> Result<GeneratingFunction> {
        let phi = match self {
            GeneratorSpec::GeometricMean { weights } => {
                GeneratingFunction::geometric_mean(weights.clone())?
            }
            GeneratorSpec::Diversity { alpha } => GeneratingFunction::diversity_power(*alpha)?,
            GeneratorSpec::Affine { coeffs } => GeneratingFunction::affine(coeffs.clone())?,
            GeneratorSpec::MinAffine { pieces } => {
                GeneratingFunction::min_of_affines(pieces.clone())?
            }
        };
        Ok(phi)
    }
}

/// Portfolio-map document: the market rule, a constant-weight rule, the
/// non-conservative counterexample map, or a functionally generated rule.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PortfolioSpec {
    Market,
    Constant { weights: Vec<f64> },
    Counterexample { lambda: f64 },
    Generated { generator: GeneratorSpec },
}

impl PortfolioSpec {
    pub fn resolve(&self) -> Result<PortfolioMap> {
        let map = match self {
            PortfolioSpec::Market => PortfolioMap::market(),
            PortfolioSpec::Constant { weights } => {
                PortfolioMap::constant(SimplexPoint::closed(weights.clone())?)
            }
            PortfolioSpec::Counterexample { lambda } => counterexample_portfolio(*lambda)?,
            PortfolioSpec::Generated { generator } => {
                PortfolioMap::from_generating(Arc::new(generator.resolve()?))
            }
        };
        Ok(map)
    }
}

/// One marginal of a discrete transport problem.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub atoms: Vec<Vec<f64>>,
    /// Uniform when omitted.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl MeasureSpec {
    pub fn resolve(&self) -> Result<DiscreteMeasure> {
        let m = match &self.weights {
            Some(w) => DiscreteMeasure::new(self.atoms.clone(), w.clone())?,
            None => DiscreteMeasure::uniform(self.atoms.clone())?,
        };
        Ok(m)
    }
}

/// Name of a transport cost in problem documents.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostName {
    LogPartition,
    ExpShift,
    NegEntropy,
    Quadratic,
}

impl From<CostName> for CostKind {
    fn from(name: CostName) -> CostKind {
        match name {
            CostName::LogPartition => CostKind::LogPartition,
            CostName::ExpShift => CostKind::ExpShift,
            CostName::NegEntropy => CostKind::NegEntropy,
            CostName::Quadratic => CostKind::Quadratic,
        }
    }
}

/// A discrete transport problem file:
/// `{"P":{"atoms":[...],"weights":[...]},"Q":{...},"cost":"log_partition"}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "P")]
    pub p: MeasureSpec,
    #[serde(rename = "Q")]
    pub q: MeasureSpec,
    pub cost: CostName,
}

/// Sample-variance divisor named in config files and flags: `"n"` or `"n-1"`.
#[derive(Debug, Clone, Copy, Deserialize)]
pub enum SdDenominatorSpec {
    #[serde(rename = "n")]
    N,
    #[serde(rename = "n-1")]
    NMinus1,
}

impl From<SdDenominatorSpec> for SdDenominator {
    fn from(spec: SdDenominatorSpec) -> SdDenominator {
        match spec {
            SdDenominatorSpec::N => SdDenominator::N,
            SdDenominatorSpec::NMinus1 => SdDenominator::NMinus1,
        }
    }
}

/// Backtest configuration file. `train` and `test` are half-open row ranges
/// into the price series.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub train: [usize; 2],
    pub test: [usize; 2],
    pub q_spec: DistributionSpec,
    #[serde(default)]
    pub initial_caps: Option<Vec<f64>>,
    #[serde(default)]
    pub sd_denominator: Option<SdDenominatorSpec>,
}

impl ConfigSpec {
    /// Build the run configuration. Relative sample paths in `q_spec` are
    /// taken from `base_dir`; `sd_override` (the command-line flag) wins
    /// over the file's `sd_denominator` key.
    pub fn resolve(
        &self,
        base_dir: &Path,
        sd_override: Option<SdDenominator>,
    ) -> Result<BacktestConfig> {
        let sd_denominator = sd_override
            .or(self.sd_denominator.map(SdDenominator::from))
            .unwrap_or_default();
        Ok(BacktestConfig {
            train_start: self.train[0],
            train_end: self.train[1],
            test_start: self.test[0],
            test_end: self.test[1],
            q_spec: self.q_spec.resolve(base_dir)?,
            initial_caps: self.initial_caps.clone(),
            sd_denominator,
        })
    }
}

/// Region document for cycle searches: `[[lo1,hi1],...,[lon,hin]]`.
pub fn parse_region(text: &str) -> Result<Region> {
    let bounds: Vec<[f64; 2]> =
        serde_json::from_str(text).context("region must be a JSON array of [lo, hi] pairs")?;
    if bounds.is_empty() {
        bail!("region must have at least one coordinate bound");
    }
    let lo = bounds.iter().map(|b| b[0]).collect();
    let hi = bounds.iter().map(|b| b[1]).collect();
    Ok(Region::new(lo, hi)?)
}
