//! Online maximization of monotone (strongly) DR-submodular utilities.
//!
//! The crate is organized around the pieces every learner needs:
//!
//! * [`domain`]: the polytope feasible set with its linear-maximization and
//!   Euclidean-projection oracles.
//! * [`objectives`]: utility families, their gradient oracles and
//!   sampling-based property checkers.
//! * [`online`]: the online learners (Follow-the-Leader driven Meta-Frank-Wolfe,
//!   the FTRL baseline, blocked random-order runs and the stochastic
//!   Frank-Wolfe learners) together with regret bookkeeping.
//! * [`offline`]: comparators used to evaluate regret.
//! * [`streams`]: adversary models, block-size thresholds and Monte-Carlo
//!   validation of block averaging.

pub mod domain;
pub mod error;
pub mod linalg;
pub mod objectives;
pub mod offline;
pub mod online;
pub mod streams;

pub use domain::{Norm, Point, PolytopeDomain};
pub use error::{Error, Result};
pub use objectives::{Objective, Utility};

/// Approximation ratio of the offline Frank-Wolfe variant, `1 - 1/e`.
pub const ONE_MINUS_INV_E: f64 = 1.0 - 1.0 / std::f64::consts::E;
/// Approximation ratio of the one-shot stochastic learners, `1/e`.
pub const INV_E: f64 = 1.0 / std::f64::consts::E;
