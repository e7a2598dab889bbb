use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fgp_core::backtest::SdDenominator;
use fgplab::runner::{self, Outcome};

/// Functionally generated portfolios: backtests, exact transport solves,
/// and cyclical-monotonicity checks on the probability simplex.
#[derive(Parser)]
#[command(name = "fgplab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the two-asset backtest pipeline on a dated price CSV.
    Backtest {
        /// Price table with header `date,p1,...,pn`.
        #[arg(long)]
        prices: PathBuf,
        /// JSON config with keys train, test, q_spec, initial_caps, sd_denominator.
        #[arg(long)]
        config: PathBuf,
        /// Directory receiving logV.tsv, curve.tsv, theta.tsv.
        #[arg(long)]
        out: PathBuf,
        /// Sample-variance divisor, overriding the config file.
        #[arg(long = "sd-denominator", value_parser = ["n", "n-1"])]
        sd_denominator: Option<String>,
    },
    /// Tabulate the monotone transport map between two one-dimensional laws.
    #[command(name = "solve-1d")]
    Solve1d {
        /// Source law as an inline JSON document.
        #[arg(long)]
        p: String,
        /// Target law as an inline JSON document.
        #[arg(long)]
        q: String,
        /// Number of table rows across the source law's central mass.
        #[arg(long)]
        grid: usize,
        /// Output TSV file (theta, map, pi1).
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a discrete transport problem file exactly.
    SolveDiscrete {
        /// Problem JSON file with keys P, Q, cost.
        #[arg(long)]
        problem: PathBuf,
        /// Output TSV file (i, j, mass).
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuzz random cycles for multiplicative-monotonicity violations.
    McmCheck {
        /// Portfolio rule as an inline JSON document.
        #[arg(long)]
        portfolio: String,
        /// Number of random cycles to draw.
        #[arg(long)]
        trials: usize,
        /// Restrict to cycles whose jumps stay below this bound.
        #[arg(long)]
        delta: Option<f64>,
        /// Search region as `[[lo1,hi1],...]`; whole simplex by default.
        #[arg(long)]
        region: Option<String>,
        /// Simplex dimension when the portfolio doesn't fix one.
        #[arg(long)]
        dim: Option<usize>,
        /// Longest cycle drawn.
        #[arg(long, default_value_t = 6)]
        max_cycle: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Search for a violating cycle by seeded greedy descent.
    FindCycle {
        /// Portfolio rule as an inline JSON document.
        #[arg(long)]
        portfolio: String,
        /// Portfolio-evaluation budget for the search.
        #[arg(long)]
        budget: usize,
        /// Search region as `[[lo1,hi1],...]`; whole simplex by default.
        #[arg(long)]
        region: Option<String>,
        /// Simplex dimension when the portfolio doesn't fix one.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Split a generated portfolio's log relative value along a weight path.
    Decompose {
        /// Generating function as an inline JSON document.
        #[arg(long)]
        generator: String,
        /// Weight path CSV with header `w1,...,wn`.
        #[arg(long)]
        path: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Backtest { prices, config, out, sd_denominator } => {
            let sd_override = sd_denominator.as_deref().map(|s| match s {
                "n" => SdDenominator::N,
                _ => SdDenominator::NMinus1,
            });
            runner::backtest_cmd(prices, config, out, sd_override)
        }
        Command::Solve1d { p, q, grid, out } => runner::solve_1d_cmd(p, q, *grid, out),
        Command::SolveDiscrete { problem, out } => runner::solve_discrete_cmd(problem, out),
        Command::McmCheck { portfolio, trials, delta, region, dim, max_cycle, seed } => {
            runner::mcm_check_cmd(
                portfolio,
                *trials,
                *delta,
                region.as_deref(),
                *dim,
                *max_cycle,
                *seed,
            )
        }
        Command::FindCycle { portfolio, budget, region, dim } => {
            runner::find_cycle_cmd(portfolio, *budget, region.as_deref(), *dim)
        }
        Command::Decompose { generator, path } => runner::decompose_cmd(generator, path),
    };
    match result {
        Ok(Outcome::Clean) => ExitCode::from(0),
        Ok(Outcome::WitnessFound) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// 3 for numeric degeneracy anywhere in the chain, 2 for every other
/// failure (bad files, bad documents, infeasible instances).
fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<fgp_core::Error>() {
            if matches!(core, fgp_core::Error::NumericDegeneracy(_)) {
                return 3;
            }
        }
    }
    2
}
