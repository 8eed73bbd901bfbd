//! Multi-period resource allocation under stochastic demands.
//!
//! A fixed budget of `L` units is split across `T` periods with prices
//! `p_t`; period `t` earns `p_t · min(d_t, a_t)`. Demands are jointly
//! log-normal. The crate provides
//!
//! - [`solver`]: the static problem, solved by bisection on the budget
//!   multiplier,
//! - [`policies`]: static, shrinking-horizon sequential, roll-forward and
//!   prescient oracle policies on a realized demand path,
//! - [`prob`]: log-normal marginals, Gaussian conditioning, correlation
//!   projection and path sampling,
//! - [`sim`]: synthetic instances and a seeded Monte Carlo harness.
//!
//! Trials run on rayon when the `parallel` feature (default) is enabled.

pub mod error;
pub mod policies;
pub mod prob;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use policies::{Policy, PolicyOptions, PolicyResult};
pub use prob::{DemandModel, MarginalLogNormal};
pub use sim::{AggregateReport, SimConfig, TrialRecord};
pub use solver::{AllocationPlan, Instance};
