//! Markov perfect equilibria of a two-player dynamic contest in which each
//! agent chooses between a safe and a risky way of making progress.
//!
//! The [`solver`] produces closed-form boundaries and piecewise-exponential
//! value functions for the three return regimes, [`verify`] certifies them,
//! and [`oracle`] and [`sim`] provide independent numerical checks. The
//! [`design`] module solves the prize-allocation problem.

pub mod cli;
pub mod design;
pub mod error;
pub mod model;
mod numeric;
pub mod oracle;
pub mod sim;
pub mod solver;
pub mod sweep;
pub mod valuefn;
pub mod verify;

pub use error::{ContestError, Result};
pub use model::{classify, f_of_phi, profitability, ContestParams, Regime, RegimeKind, SweepParam};
pub use solver::{best_response_kstar, solve, EquilibriumSolution, Strategy};
pub use valuefn::{char_roots, CharRoots, PiecewiseValueFunction};
