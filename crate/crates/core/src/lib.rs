//! Multiplicative pacing equilibria in second-price auction markets.
//!
//! * [`market`]: instances, outcomes, the equilibrium verifier, best
//!   responses, competitive equilibria and the smoothed game.
//! * [`gen`]: seeded instance generators, fixtures and reductions.
//! * [`lp`] and [`mip`]: a bounded-variable simplex and a branch-and-bound
//!   solver for the mixed-integer encoding of equilibria.
//! * [`dynamics`]: best-response dynamics, adaptive pacing, regret and
//!   stability checks.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod gen;
pub mod lp;
pub mod market;
pub mod mip;

pub use error::{Error, Result};
pub use market::{
    objectives, verify_equilibrium, ObjectiveValues, PacingInstance, PacingOutcome, Tolerance,
};

/// Runs the code in the guide as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/markets.md")]
    pub struct Markets;
    #[doc = include_str!("../../../book/src/solver.md")]
    pub struct Solver;
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub struct Dynamics;
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
}
