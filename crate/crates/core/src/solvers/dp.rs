//! Dynamic program over OMB subpolicies for additive outcome-monotonic costs.
//!
//! Indices are canonical (decreasing outcome) and 0-based. A round starts at
//! a fixed state `s` with value `v0`. Subpolicy `(i, j)` with `s <= j < i`
//! accepts `j` with `v0`, lets every value strictly between `j` and `i` be
//! non-blocking (`pi[k] = v0 - c(k, j)`), and stores its values from `i`
//! onward as `tail`. `F(i, j)` is the utility of sources `j..m` under it and
//! `V(i, j)` is the first state that must be revisited in a later round
//! because lowering clamped something below it.
//!
//! Index reconciliation: base subpolicies sit at `i = r + 1`, one past the
//! last positive-reward value, so the table loop covers `i = r ..= s + 1`.
//! The revisit marker "no revisit" is `None` rather than `m`.

use std::time::Instant;

use super::{SolveError, SolveResult};
use crate::model::{canonicalize, cost_profile, Instance, Policy, DEFAULT_TOL};
use crate::response::{is_blocking, last_positive, omb_segment_utility, utility};

#[derive(Clone, Debug)]
struct Sub {
    /// Policy values at indices `i..m`.
    tail: Vec<f64>,
    utility: f64,
    revisit: Option<usize>,
}

fn min_revisit(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

struct Round<'a> {
    inst: &'a Instance,
    r: usize,
    s: usize,
    v0: f64,
    /// Scratch policy reused for single-pass evaluations.
    scratch: Vec<f64>,
}

impl Round<'_> {
    /// Writes the head of subpolicy `(i, j)` into the scratch policy:
    /// `v0` at `j` and the non-blocking chain on `j+1..i`.
    fn write_head(&mut self, i: usize, j: usize) {
        self.scratch[j] = self.v0;
        for k in j + 1..i {
            self.scratch[k] = self.v0 - self.inst.cost.get(k, j);
        }
    }

    fn evaluate(&mut self, i: usize, j: usize, tail: &[f64]) -> f64 {
        self.write_head(i, j);
        self.scratch[i..].copy_from_slice(tail);
        omb_segment_utility(self.inst, &self.scratch, j, Some(self.r), DEFAULT_TOL)
    }

    fn base(&mut self, j: usize) -> Option<Sub> {
        let (m, r) = (self.inst.m(), self.r);
        if self.inst.cost.get(r, j) > self.v0 {
            return None;
        }
        let tail = vec![0.0; m - (r + 1)];
        let utility = self.evaluate(r + 1, j, &tail);
        Some(Sub {
            tail,
            utility,
            revisit: None,
        })
    }

    /// Shifts subpolicy `(i + 1, i)` down by `sigma`. Values on `i..=r` that
    /// would turn negative are clamped to the last non-negative one, making
    /// them blocking; values past `r` stay zero. Returns the lowered values
    /// on `i..m` and the last blocking state at or before the clamp point
    /// when clamping happened.
    fn lower(&self, i: usize, next_i: &Sub, sigma: f64) -> (Vec<f64>, Option<usize>) {
        let m = self.inst.m();
        let r = self.r;
        let mut full = Vec::with_capacity(m - i);
        full.push(self.v0);
        full.extend_from_slice(&next_i.tail);
        let mut out: Vec<f64> = full.iter().map(|v| v - sigma).collect();
        let top = r.min(m - 1);
        // i itself holds v0 - sigma >= 0, so d >= i.
        let d = (i..=top)
            .rev()
            .find(|&k| out[k - i] >= 0.0)
            .unwrap_or(i);
        let clamp = out[d - i];
        for k in d + 1..=top {
            out[k - i] = clamp;
        }
        for k in top + 1..m {
            out[k - i] = 0.0;
        }
        let revisit = (d < top).then(|| {
            (i..=d)
                .rev()
                .find(|&k| k == i || is_blocking_in(&out, i, k))
                .unwrap_or(i)
        });
        (out, revisit)
    }
}

/// Blocking test on a slice holding values from index `offset` on.
fn is_blocking_in(vals: &[f64], offset: usize, k: usize) -> bool {
    let local = k - offset;
    local == 0 || is_blocking(vals, local, DEFAULT_TOL)
}

/// Runs one round from state `s` with value `v0`; returns subpolicy
/// `(s + 1, s)`.
fn run_round(inst: &Instance, r: usize, s: usize, v0: f64) -> Sub {
    let m = inst.m();
    let mut round = Round {
        inst,
        r,
        s,
        v0,
        scratch: vec![0.0; m],
    };
    // row[j] holds subpolicy (i + 1, j) while filling row i.
    let mut next: Vec<Option<Sub>> = (0..=r).map(|j| if j >= s { round.base(j) } else { None }).collect();

    for i in (round.s + 1..=r).rev() {
        let mut cur: Vec<Option<Sub>> = vec![None; r + 1];
        let next_i = next[i].clone().expect("subpolicy (i+1, i) always exists");
        for j in (round.s..i).rev() {
            let sigma = inst.cost.get(i - 1, j);
            if sigma > v0 {
                continue;
            }
            let mass: f64 = inst.p[j..i].iter().sum();
            let head_gain = v0 * inst.reward(j) * mass;
            let (lowered, lowered_revisit) = round.lower(i, &next_i, sigma);
            let lowered_utility = head_gain
                + omb_segment_utility_from(inst, &mut round.scratch, i, &lowered, r);

            let keep_open = inst.cost.get(i, j) <= v0
                && next[j]
                    .as_ref()
                    .is_some_and(|sub| sub.utility >= lowered_utility);
            cur[j] = Some(if keep_open {
                let sub = next[j].as_ref().unwrap();
                let mut tail = Vec::with_capacity(m - i);
                tail.push(v0 - inst.cost.get(i, j));
                tail.extend_from_slice(&sub.tail);
                Sub {
                    tail,
                    utility: sub.utility,
                    revisit: sub.revisit,
                }
            } else {
                Sub {
                    tail: lowered,
                    utility: lowered_utility,
                    revisit: min_revisit(lowered_revisit, next_i.revisit),
                }
            });
        }
        next = cur;
    }
    next[round.s].take().expect("subpolicy (s+1, s) always exists")
}

/// Utility of sources `start..m` when values from `start` on are `vals`.
fn omb_segment_utility_from(
    inst: &Instance,
    scratch: &mut [f64],
    start: usize,
    vals: &[f64],
    r: usize,
) -> f64 {
    scratch[start..].copy_from_slice(vals);
    omb_segment_utility(inst, scratch, start, Some(r), DEFAULT_TOL)
}

/// Searches OMB policies by dynamic programming. Requires outcome
/// probabilities and costs that are additive and outcome monotonic.
pub fn dp_search(inst: &Instance) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let (canon, perm) = canonicalize(inst)?;
    let prof = cost_profile(&canon, DEFAULT_TOL);
    if !(prof.additive && prof.outcome_monotonic) {
        return Err(SolveError::Precondition(
            "dynamic program needs additive, outcome-monotonic costs".into(),
        ));
    }
    let m = canon.m();
    let mut pi = vec![0.0; m];
    let mut rounds: u64 = 0;

    if let Some(r) = last_positive(&canon) {
        let (mut s, mut v0) = (0, 1.0);
        loop {
            rounds += 1;
            let sub = run_round(&canon, r, s, v0);
            pi[s] = v0;
            let stop = sub.revisit.unwrap_or(m - 1);
            pi[s + 1..=stop].copy_from_slice(&sub.tail[..stop - s]);
            match sub.revisit {
                Some(v) if rounds < m as u64 => {
                    s = v;
                    v0 = pi[v];
                }
                Some(_) => {
                    return Err(SolveError::Precondition(format!(
                        "dynamic program did not settle within {m} rounds"
                    )))
                }
                None => break,
            }
        }
    }

    let policy = Policy::new(pi).unpermuted(&perm);
    let u = utility(inst, &policy);
    let mut out = SolveResult::new(policy, u, started);
    out.rounds = rounds;
    out.iterations = rounds;
    out.approximate = true;
    Ok(out)
}
