//! File formats, output tables, and command implementations behind the
//! `fgplab` binary: price-history backtests, exact discrete transport
//! solves, one-dimensional monotone transport tables, and cycle-based
//! portfolio monotonicity checks.

pub mod csvio;
pub mod emit;
pub mod formats;
pub mod runner;
