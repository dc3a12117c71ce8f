//! Base-station-assisted device-to-device task offloading.
//!
//! Requesters hand their tasks to helpers they meet opportunistically; contacts
//! between a requester and a helper arrive as a Poisson process. A per-pair
//! timer decides how long to wait for D2D contacts before the base station is
//! used as a relay, and a task that never meets its helper falls back to the
//! remote server.
//!
//! The crate is layered bottom-up:
//!
//! * [`contact`]: contact-count probabilities over slot ranges.
//! * [`cost`]: the five offloading events, their probabilities and expected
//!   costs, the optimal timer of a pair and the helper's expected energy.
//! * [`instance`]: problem instances, the randomized scenario generator, the
//!   Knapsack reduction builder and JSON persistence.
//! * [`solvers`]: the linearized assignment problem, Lagrangian relaxation
//!   with Polyak-step subgradient ascent and feasibility repair, two greedy
//!   baselines and an exhaustive oracle.
//! * [`montecarlo`]: a trial-by-trial simulator of the contact process used to
//!   validate the analytic model.
//! * [`harness`]: seeded experiment sweeps that write CSV tables.

pub mod contact;
pub mod cost;
pub mod error;
pub mod harness;
pub mod instance;
pub mod montecarlo;
pub mod seed;
pub mod solvers;

pub use contact::ContactPair;
pub use cost::{CompletionCostFn, PairEvaluation, PairProfile, TaskSpec};
pub use error::{Error, Result};
pub use instance::{GeneratorConfig, Instance};
pub use solvers::{Assignment, Choice, DualState, PairTable, SolverParams};
