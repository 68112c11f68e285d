//! Solver dispatch shared by the CLI and the experiment runner.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use stratpol::solvers::{
    brute_force, common_step, dp_search, iterative_search, parallel_iterative_search,
    DEFAULT_BUDGET, DEFAULT_MAX_DEN, DEFAULT_MAX_SWEEPS, PARALLEL_SWEEP_CAP,
};
use stratpol::{
    non_strategic_policy, utility, Instance, ModelError, Policy, SolveError, SolveResult,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Accept exactly the values with q above gamma.
    Nonstrategic,
    /// Exhaustive search over a value grid.
    Brute,
    /// Sequential coordinate search.
    Iter,
    /// Snapshot-parallel coordinate search.
    ParIter,
    /// Dynamic program for additive outcome-monotonic costs.
    Dp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nonstrategic => "nonstrategic",
            Algorithm::Brute => "brute",
            Algorithm::Iter => "iter",
            Algorithm::ParIter => "par-iter",
            Algorithm::Dp => "dp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Grid step for brute force; the instance's common step when unset.
    pub step: Option<f64>,
    pub max_sweeps: u64,
    pub par_max_sweeps: u64,
    pub budget: u128,
    /// Starting policy for coordinate search; all zeros when unset.
    pub init: Option<Policy>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            step: None,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            par_max_sweeps: PARALLEL_SWEEP_CAP,
            budget: DEFAULT_BUDGET,
            init: None,
        }
    }
}

pub fn run_algorithm(
    inst: &Instance,
    alg: Algorithm,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    let m = inst.m();
    let init = match &opts.init {
        Some(p) if p.len() != m => {
            return Err(ModelError::PolicyLength {
                expected: m,
                got: p.len(),
            }
            .into())
        }
        Some(p) => p.clone(),
        None => Policy::zeros(m),
    };
    match alg {
        Algorithm::Nonstrategic => {
            let started = Instant::now();
            let policy = non_strategic_policy(inst);
            let u = utility(inst, &policy);
            Ok(SolveResult {
                policy,
                utility: u,
                iterations: 0,
                sweeps: 0,
                rounds: 0,
                converged: true,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
                approximate: true,
                history: Vec::new(),
            })
        }
        Algorithm::Brute => {
            let step = match opts.step {
                Some(s) => s,
                None => common_step(inst, DEFAULT_MAX_DEN).ok_or_else(|| {
                    SolveError::Precondition("costs have no common step; give a grid step".into())
                })?,
            };
            brute_force(inst, step, opts.budget)
        }
        Algorithm::Iter => Ok(iterative_search(inst, &init, opts.max_sweeps)),
        Algorithm::ParIter => Ok(parallel_iterative_search(inst, &init, opts.par_max_sweeps)),
        Algorithm::Dp => dp_search(inst),
    }
}
