//! Policy search: exact enumeration on a value grid, coordinate search and
//! its parallel variant, and the dynamic program for additive
//! outcome-monotonic costs.

mod coordinate;
mod dp;
mod grid;
mod omb;

use std::time::Instant;

use thiserror::Error;

use crate::error::ModelError;
use crate::model::Policy;

pub use coordinate::{
    candidate_values, iterative_search, parallel_iterative_search, solve_coordinate,
    DEFAULT_MAX_SWEEPS, PARALLEL_SWEEP_CAP,
};
pub use dp::dp_search;
pub use grid::{
    brute_force, brute_force_binary, common_step, common_step_divisions, termination_bound,
    DEFAULT_BUDGET, DEFAULT_MAX_DEN,
};
pub use omb::best_omb_policy;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub policy: Policy,
    pub utility: f64,
    /// Policy-changing sweeps for coordinate search, policies evaluated for
    /// enumeration, rounds for the dynamic program.
    pub iterations: u64,
    pub sweeps: u64,
    pub rounds: u64,
    pub converged: bool,
    pub wall_ms: f64,
    /// Set when the result is only a lower bound on the optimum.
    pub approximate: bool,
    /// Utility after each accepted coordinate update.
    pub history: Vec<f64>,
}

impl SolveResult {
    pub(crate) fn new(policy: Policy, utility: f64, started: Instant) -> Self {
        SolveResult {
            policy,
            utility,
            iterations: 0,
            sweeps: 0,
            rounds: 0,
            converged: true,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            approximate: false,
            history: Vec::new(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("search space has {policies} policies, budget is {budget}")]
    BudgetExceeded { policies: u128, budget: u128 },
    #[error("step {0} does not divide 1")]
    InvalidStep(f64),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
