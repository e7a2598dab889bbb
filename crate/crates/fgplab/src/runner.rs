//! Implementations of the CLI subcommands, shared by the binary and the
//! integration tests. Each returns whether the run was clean or produced a
//! monotonicity witness; input and numeric failures surface as errors.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fgp_core::backtest::{run_backtest, SdDenominator};
use fgp_core::calculus::PortfolioMap;
use fgp_core::dynamics::{fernholz_decompose, find_violating_cycle, mcm_fuzz, Region};
use fgp_core::rearrangement::two_stock_portfolio;
use fgp_core::transport::solve_discrete;
use serde_json::json;

use crate::csvio::{load_prices, load_weight_path};
use crate::emit::{coupling_tsv, decomposition_tsv, emit_plot_data, map_table_tsv, write_table};
use crate::formats::{parse_region, ConfigSpec, DistributionSpec, GeneratorSpec, PortfolioSpec, ProblemSpec};

/// Result of a clean run: whether a violation witness was produced, which
/// the binary maps to exit code 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    WitnessFound,
}

/// Fraction of the source law's mass covered by solve-1d map tables, split
/// evenly between the two tails.
const MAP_TABLE_TAIL: f64 = 0.0005;

pub fn backtest_cmd(
    prices: &Path,
    config: &Path,
    out: &Path,
    sd_override: Option<SdDenominator>,
) -> Result<Outcome> {
    let series = load_prices(prices)?;
    let text = fs::read_to_string(config)
        .with_context(|| format!("cannot open config file {}", config.display()))?;
    let spec: ConfigSpec = serde_json::from_str(&text)
        .with_context(|| format!("config file {} is not valid", config.display()))?;
    let base = config.parent().unwrap_or_else(|| Path::new("."));
    let run_config = spec.resolve(base, sd_override)?;
    let report = run_backtest(&series, &run_config)?;
    emit_plot_data(&report, out)?;
    println!(
        "fitted normal: mean {} sd {}",
        report.p_mean, report.p_sd
    );
    println!(
        "final log relative value over {} test rows: {}",
        report.log_v.len(),
        report.log_v.last().copied().unwrap_or(0.0)
    );
    println!("wrote logV.tsv, curve.tsv, theta.tsv to {}", out.display());
    Ok(Outcome::Clean)
}

pub fn solve_1d_cmd(p_json: &str, q_json: &str, grid: usize, out: &Path) -> Result<Outcome> {
    if grid < 2 {
        bail!("grid must have at least two points");
    }
    let p_spec: DistributionSpec =
        serde_json::from_str(p_json).context("--p is not a valid distribution document")?;
    let q_spec: DistributionSpec =
        serde_json::from_str(q_json).context("--q is not a valid distribution document")?;
    let cwd = Path::new(".");
    let p = p_spec.resolve(cwd)?;
    let q = q_spec.resolve(cwd)?;
    let curve = two_stock_portfolio(&p, &q);

    let lo = p.quantile(MAP_TABLE_TAIL)?;
    let hi = p.quantile(1.0 - MAP_TABLE_TAIL)?;
    let mut rows = Vec::with_capacity(grid);
    if hi > lo {
        for k in 0..grid {
            let theta = lo + (hi - lo) * k as f64 / (grid - 1) as f64;
            rows.push((theta, curve.shift(theta)?, curve.pi1_of_theta(theta)?));
        }
    } else {
        // Point-mass source: the whole law sits at one ratio.
        rows.push((lo, curve.shift(lo)?, curve.pi1_of_theta(lo)?));
    }
    write_table(out, &map_table_tsv(&rows))?;
    println!("wrote {} map rows to {}", rows.len(), out.display());
    Ok(Outcome::Clean)
}

pub fn solve_discrete_cmd(problem: &Path, out: &Path) -> Result<Outcome> {
    let text = fs::read_to_string(problem)
        .with_context(|| format!("cannot open problem file {}", problem.display()))?;
    let spec: ProblemSpec = serde_json::from_str(&text)
        .with_context(|| format!("problem file {} is not valid", problem.display()))?;
    let p = spec.p.resolve()?;
    let q = spec.q.resolve()?;
    let coupling = solve_discrete(&p, &q, spec.cost.into())?;
    write_table(out, &coupling_tsv(&coupling))?;
    println!("optimal value: {}", coupling.value());
    println!("wrote {} coupling rows to {}", coupling.entries().len(), out.display());
    Ok(Outcome::Clean)
}

/// Resolve the search region for the monotonicity commands: an explicit
/// `--region` document wins, then `--dim n` means the whole simplex, then
/// the portfolio's own dimension.
fn resolve_region(
    map: &PortfolioMap,
    region: Option<&str>,
    dim: Option<usize>,
) -> Result<Region> {
    let region = match (region, dim) {
        (Some(text), _) => parse_region(text)?,
        (None, Some(n)) => Region::whole(n)?,
        (None, None) => match map.dimension() {
            Some(n) => Region::whole(n)?,
            None => bail!(
                "portfolio works in any dimension; pass --region or --dim to fix one"
            ),
        },
    };
    if let Some(n) = map.dimension() {
        if n != region.n() {
            bail!("region has {} coordinates but the portfolio needs {n}", region.n());
        }
    }
    Ok(region)
}

fn cycle_coords(points: &[fgp_core::simplex::SimplexPoint]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.coords().to_vec()).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn mcm_check_cmd(
    portfolio_json: &str,
    trials: usize,
    delta: Option<f64>,
    region: Option<&str>,
    dim: Option<usize>,
    max_cycle: usize,
    seed: u64,
) -> Result<Outcome> {
    let spec: PortfolioSpec =
        serde_json::from_str(portfolio_json).context("--portfolio is not a valid document")?;
    let map = spec.resolve()?;
    let region = resolve_region(&map, region, dim)?;
    let report = mcm_fuzz(&map, &region, trials, max_cycle, delta, seed)?;
    let witness = report.witness.as_ref().map(|c| cycle_coords(c.points()));
    let doc = json!({
        "trials": report.trials,
        "min_log_value": report.min_log_value,
        "witness": witness,
    });
    println!("{doc}");
    Ok(if report.witness.is_some() {
        Outcome::WitnessFound
    } else {
        Outcome::Clean
    })
}

pub fn find_cycle_cmd(
    portfolio_json: &str,
    budget: usize,
    region: Option<&str>,
    dim: Option<usize>,
) -> Result<Outcome> {
    let spec: PortfolioSpec =
        serde_json::from_str(portfolio_json).context("--portfolio is not a valid document")?;
    let map = spec.resolve()?;
    let region = resolve_region(&map, region, dim)?;
    match find_violating_cycle(&map, &region, budget)? {
        Some((cycle, log_value)) => {
            let doc = json!({
                "log_value": log_value,
                "cycle": cycle_coords(cycle.points()),
            });
            println!("{doc}");
            Ok(Outcome::WitnessFound)
        }
        None => {
            println!("{}", json!({ "log_value": null, "cycle": null }));
            Ok(Outcome::Clean)
        }
    }
}

pub fn decompose_cmd(generator_json: &str, path_file: &Path) -> Result<Outcome> {
    let spec: GeneratorSpec =
        serde_json::from_str(generator_json).context("--generator is not a valid document")?;
    let phi = spec.resolve()?;
    let path = load_weight_path(path_file)?;
    let decomposition = fernholz_decompose(&phi, &path)?;
    print!(
        "{}",
        decomposition_tsv(
            &decomposition.log_v,
            &decomposition.phi_term,
            &decomposition.drift,
        )
    );
    Ok(Outcome::Clean)
}
