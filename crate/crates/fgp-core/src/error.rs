//! Error type shared by every module.

use core::fmt;

/// Crate-wide error. Variants carry a short static description of the
/// violated precondition; numeric payloads are included where the caller
/// may want to inspect the offending value.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Dimension or length mismatch between related arguments.
    Shape(&'static str),
    /// A point lies outside the domain required by the operation
    /// (off the simplex, on a forbidden boundary, outside a region, ...).
    Domain(&'static str),
    /// A parameter value is invalid (exponent out of range, empty grid,
    /// probability outside (0,1), ...).
    Argument(&'static str),
    /// A candidate generating function fails positivity or concavity, or
    /// produces weights outside the closed simplex.
    InvalidGenerator(&'static str),
    /// A supplied supergradient induces a negative weight; the payload is
    /// the most negative coordinate produced. Nothing is clipped.
    InvalidSupergradient(f64),
    /// Potential reconstruction was asked for a portfolio map whose line
    /// integral is path-dependent; the payload is the sampled loop defect.
    NotAGradient(f64),
    /// A transport instance admits no coupling (a row or column of the
    /// cost matrix is entirely masked out).
    Infeasible(&'static str),
    /// An otherwise valid computation degenerated numerically
    /// (nonpositive value multiplier, zero-variance fit, ...).
    NumericDegeneracy(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(m) => write!(f, "shape mismatch: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Argument(m) => write!(f, "invalid argument: {m}"),
            Error::InvalidGenerator(m) => write!(f, "invalid generating function: {m}"),
            Error::InvalidSupergradient(c) => {
                write!(f, "supergradient induces negative weight (min coordinate {c:e})")
            }
            Error::NotAGradient(d) => {
                write!(f, "portfolio map is not conservative (sampled loop defect {d:e})")
            }
            Error::Infeasible(m) => write!(f, "infeasible transport instance: {m}"),
            Error::NumericDegeneracy(m) => write!(f, "numeric degeneracy: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
