//! Pathwise analysis of rebalancing rules on the open unit simplex.
//!
//! The crate treats a market of `n` assets through its weight vector
//! `mu` in the simplex and studies *portfolio maps* `pi(mu)` — rules that
//! assign a target allocation to every weight configuration.  The central
//! objects are:
//!
//! * [`simplex`] — points, tangent vectors, exponential coordinates and the
//!   log-partition function `psi`;
//! * [`generating`] — positive concave generating functions, the portfolios
//!   they induce, and the associated divergence (the per-step surplus of a
//!   rebalancing rule over its generating function's change);
//! * [`calculus`] — second-order forms (drift, excess growth, curvature
//!   gaps), line integrals of `pi/mu`, and potential reconstruction;
//! * [`dynamics`] — relative value along discrete weight paths, the
//!   value decomposition into a potential term plus a nondecreasing drift,
//!   and randomized searches for cycles on which a rule loses money;
//! * [`transport`] — discrete mass-transport problems over cost families
//!   tied to the simplex geometry, an exact network solver, brute-force
//!   oracles, and cyclical-monotonicity checks of coupling supports;
//! * [`rearrangement`] — one-dimensional distributions, quantile coupling,
//!   and the two-asset portfolio curve induced by a monotone transport map;
//! * [`backtest`] — price-series ingestion, weight extraction, log-weight
//!   ratio fitting, and the end-to-end two-asset backtest.
//!
//! The library is `no_std`-compatible (requires `alloc`); the default
//! `std` feature only switches float intrinsics and error-trait plumbing.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod backtest;
pub mod calculus;
pub mod dynamics;
pub mod error;
pub mod generating;
mod minflow;
pub mod rearrangement;
pub mod sampling;
pub mod simplex;
pub mod special;
pub mod transport;

pub use error::{Error, Result};
