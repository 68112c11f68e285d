//! Coordinate search.
//!
//! With all other coordinates fixed, utility is piecewise constant-or-linear
//! in one coordinate and only changes where some source's best response
//! switches. Those switch points, plus 0 and 1, are the only values worth
//! evaluating.

use std::time::Instant;

use rayon::prelude::*;

use super::SolveResult;
use crate::model::{Instance, Policy, DEFAULT_TOL};
use crate::response::Evaluator;

/// Sweep cap used by the parallel variant unless overridden.
pub const PARALLEL_SWEEP_CAP: u64 = 20;

/// Sweep cap for the sequential variant; real instances converge far sooner.
pub const DEFAULT_MAX_SWEEPS: u64 = 10_000;

const DEDUP_TOL: f64 = 1e-12;
/// A new coordinate value must beat the incumbent by this much.
const IMPROVE_TOL: f64 = 1e-10;

/// How each source responds as coordinate `i` varies with the rest fixed.
enum SourceView {
    /// `i` is unreachable: the target does not depend on `pi[i]`.
    Fixed(usize),
    /// `i` is reachable at `cost`. `best` is the best gain over the other
    /// destinations and `near` holds those within tolerance of it as
    /// `(tie rank, index, gain)`.
    Open {
        cost: f64,
        best: f64,
        near: Vec<(usize, usize, f64)>,
    },
}

struct CoordinateScan<'e, 'a> {
    eval: &'e Evaluator<'a>,
    i: usize,
    rank_i: usize,
    views: Vec<SourceView>,
}

impl<'e, 'a> CoordinateScan<'e, 'a> {
    fn new(eval: &'e Evaluator<'a>, rank: &[usize], pi: &[f64], i: usize) -> Self {
        let m = pi.len();
        let tol = eval.tie_tol();
        let views = (0..m)
            .map(|s| {
                let reach = eval.reachable(s);
                let Some(&(_, cost)) = reach.iter().find(|&&(k, _)| k == i) else {
                    return SourceView::Fixed(eval.target(pi, s).0);
                };
                let best = reach
                    .iter()
                    .filter(|&&(k, _)| k != i)
                    .map(|&(k, c)| pi[k] - c)
                    .fold(f64::NEG_INFINITY, f64::max);
                let near = reach
                    .iter()
                    .filter(|&&(k, c)| k != i && pi[k] - c >= best - tol)
                    .map(|&(k, c)| (rank[k], k, pi[k] - c))
                    .collect();
                SourceView::Open { cost, best, near }
            })
            .collect();
        CoordinateScan {
            eval,
            i,
            rank_i: rank[i],
            views,
        }
    }

    /// Utility with `pi[i]` replaced by `v`.
    fn utility(&self, pi: &[f64], v: f64) -> f64 {
        let inst = self.eval.instance();
        let rewards = self.eval.rewards();
        let tol = self.eval.tie_tol();
        let value = |k: usize| if k == self.i { v } else { pi[k] };
        let mut u = 0.0;
        for (s, view) in self.views.iter().enumerate() {
            let p = inst.p[s];
            if p == 0.0 {
                continue;
            }
            let t = match view {
                SourceView::Fixed(t) => *t,
                SourceView::Open { cost, best, near } => {
                    let gi = v - cost;
                    let cut = best.max(gi) - tol;
                    let mut pick = (usize::MAX, usize::MAX);
                    if gi >= cut {
                        pick = (self.rank_i, self.i);
                    }
                    for &(r, k, g) in near {
                        if g >= cut && r < pick.0 {
                            pick = (r, k);
                        }
                    }
                    pick.1
                }
            };
            u += p * value(t) * rewards[t];
        }
        u
    }

    fn candidates(&self) -> Vec<f64> {
        let mut vals = vec![0.0, 1.0];
        for view in &self.views {
            if let SourceView::Open { cost, best, .. } = view {
                if best.is_finite() {
                    vals.push((best + cost).clamp(0.0, 1.0));
                }
            }
        }
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
        vals
    }
}

fn tie_ranks(inst: &Instance) -> Vec<usize> {
    let mut rank = vec![0; inst.m()];
    for (r, &k) in inst.outcome_order().iter().enumerate() {
        rank[k] = r;
    }
    rank
}

/// Best value for coordinate `i` and the resulting utility. Keeps the
/// incumbent unless a candidate beats it; otherwise takes the smallest of
/// the best candidates.
fn best_value(eval: &Evaluator, rank: &[usize], pi: &[f64], i: usize) -> (f64, f64) {
    let scan = CoordinateScan::new(eval, rank, pi, i);
    let incumbent = scan.utility(pi, pi[i]);
    let scored: Vec<(f64, f64)> = scan
        .candidates()
        .into_iter()
        .map(|v| (v, scan.utility(pi, v)))
        .collect();
    let top = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if top > incumbent + IMPROVE_TOL {
        *scored.iter().find(|s| s.1 >= top - DEDUP_TOL).unwrap()
    } else {
        (pi[i], incumbent)
    }
}

/// Values of coordinate `i` at which some best response can switch, plus the
/// endpoints.
pub fn candidate_values(inst: &Instance, pol: &Policy, i: usize) -> Vec<f64> {
    let eval = Evaluator::new(inst, DEFAULT_TOL);
    CoordinateScan::new(&eval, &tie_ranks(inst), pol.values(), i).candidates()
}

/// Optimizes coordinate `i` with the others fixed; returns the chosen value
/// and the utility it attains.
pub fn solve_coordinate(inst: &Instance, pol: &Policy, i: usize) -> (f64, f64) {
    let eval = Evaluator::new(inst, DEFAULT_TOL);
    best_value(&eval, &tie_ranks(inst), pol.values(), i)
}

/// Sweeps coordinates in decreasing outcome order, updating in place, until
/// a sweep changes nothing or `max_sweeps` is reached.
pub fn iterative_search(inst: &Instance, init: &Policy, max_sweeps: u64) -> SolveResult {
    let started = Instant::now();
    let eval = Evaluator::new(inst, DEFAULT_TOL);
    let rank = tie_ranks(inst);
    let order = inst.outcome_order();
    let mut pi = init.values().to_vec();
    let mut history = Vec::new();
    let (mut sweeps, mut iterations, mut converged) = (0, 0, false);

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for &i in &order {
            let (v, _) = best_value(&eval, &rank, &pi, i);
            if v != pi[i] {
                pi[i] = v;
                history.push(eval.utility(&pi));
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
        iterations += 1;
    }

    let utility = eval.utility(&pi);
    let mut out = SolveResult::new(Policy::new(pi), utility, started);
    out.iterations = iterations;
    out.sweeps = sweeps;
    out.converged = converged;
    out.approximate = true;
    out.history = history;
    out
}

/// Sweeps where every coordinate is optimized against the previous sweep's
/// policy and all updates are applied together. Returns the best policy
/// seen, which need not be the last one since this variant can oscillate.
pub fn parallel_iterative_search(inst: &Instance, init: &Policy, max_sweeps: u64) -> SolveResult {
    let started = Instant::now();
    let eval = Evaluator::new(inst, DEFAULT_TOL);
    let rank = tie_ranks(inst);
    let mut pi = init.values().to_vec();
    let mut best = (pi.clone(), eval.utility(&pi));
    let mut history = Vec::new();
    let (mut sweeps, mut iterations, mut converged) = (0, 0, false);

    while sweeps < max_sweeps {
        sweeps += 1;
        let next: Vec<f64> = (0..pi.len())
            .into_par_iter()
            .map(|i| best_value(&eval, &rank, &pi, i).0)
            .collect();
        if next == pi {
            converged = true;
            break;
        }
        iterations += 1;
        pi = next;
        let u = eval.utility(&pi);
        history.push(u);
        if u > best.1 + DEDUP_TOL {
            best = (pi.clone(), u);
        }
    }

    let mut out = SolveResult::new(Policy::new(best.0), best.1, started);
    out.iterations = iterations;
    out.sweeps = sweeps;
    out.converged = converged;
    out.approximate = true;
    out.history = history;
    out
}
