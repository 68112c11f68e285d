//! Best-response semantics and the quantities derived from it.
//!
//! An individual at `i` moves to the finite-cost destination `k` maximizing
//! `pi[k] - cost(i, k)`. Staying is always a candidate. Gains within the tie
//! tolerance of the best are broken toward the highest outcome, then the
//! lowest index.

use crate::error::ModelError;
use crate::model::{cost_profile, Instance, Policy, DEFAULT_TOL};

/// Per-source best responses.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseProfile {
    pub target: Vec<usize>,
    pub gain: Vec<f64>,
    /// Sources whose argmax had more than one candidate within tolerance.
    pub tied: Vec<bool>,
}

/// Precomputed reachability for repeated policy evaluation.
///
/// Each source's finite-cost destinations are stored in tie-break order
/// (highest outcome first, then lowest index), so the target is the first
/// destination whose gain is within tolerance of the maximum.
#[derive(Clone, Debug)]
pub struct Evaluator<'a> {
    inst: &'a Instance,
    reach: Vec<Vec<(usize, f64)>>,
    rewards: Vec<f64>,
    tie_tol: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a Instance, tie_tol: f64) -> Self {
        let m = inst.m();
        let order = inst.outcome_order();
        let reach = (0..m)
            .map(|i| {
                order
                    .iter()
                    .filter_map(|&k| {
                        let c = if k == i { 0.0 } else { inst.cost.get(i, k) };
                        c.is_finite().then_some((k, c))
                    })
                    .collect()
            })
            .collect();
        Evaluator {
            inst,
            reach,
            rewards: inst.rewards(),
            tie_tol,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn tie_tol(&self) -> f64 {
        self.tie_tol
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Finite-cost destinations of `source` (staying included), in
    /// tie-break order.
    pub fn reachable(&self, source: usize) -> &[(usize, f64)] {
        &self.reach[source]
    }

    /// Best-response target and gain for one source.
    #[inline]
    pub fn target(&self, pi: &[f64], source: usize) -> (usize, f64) {
        let reach = &self.reach[source];
        let mut best = f64::NEG_INFINITY;
        for &(k, c) in reach {
            let g = pi[k] - c;
            if g > best {
                best = g;
            }
        }
        let cut = best - self.tie_tol;
        for &(k, c) in reach {
            let g = pi[k] - c;
            if g >= cut {
                return (k, g);
            }
        }
        unreachable!("staying is always reachable")
    }

    pub fn profile(&self, pi: &[f64]) -> ResponseProfile {
        let m = self.inst.m();
        let mut out = ResponseProfile {
            target: Vec::with_capacity(m),
            gain: Vec::with_capacity(m),
            tied: Vec::with_capacity(m),
        };
        for i in 0..m {
            let (t, g) = self.target(pi, i);
            out.target.push(t);
            out.gain.push(g);
            out.tied.push(self.count_within(pi, i, self.max_gain(pi, i)) > 1);
        }
        out
    }

    fn max_gain(&self, pi: &[f64], source: usize) -> f64 {
        self.reach[source]
            .iter()
            .map(|&(k, c)| pi[k] - c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn count_within(&self, pi: &[f64], source: usize, best: f64) -> usize {
        self.reach[source]
            .iter()
            .filter(|&&(k, c)| pi[k] - c >= best - self.tie_tol)
            .count()
    }

    pub fn induced(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.inst.m()];
        for (i, &p) in self.inst.p.iter().enumerate() {
            out[self.target(pi, i).0] += p;
        }
        out
    }

    /// Expected profit `sum_i p_i * pi[t_i] * reward[t_i]`.
    pub fn utility(&self, pi: &[f64]) -> f64 {
        let mut u = 0.0;
        for (i, &p) in self.inst.p.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let t = self.target(pi, i).0;
            u += p * pi[t] * self.rewards[t];
        }
        u
    }
}

fn check_policy(inst: &Instance, pol: &Policy) -> Result<(), ModelError> {
    if pol.len() != inst.m() {
        return Err(ModelError::PolicyLength {
            expected: inst.m(),
            got: pol.len(),
        });
    }
    if let Some(index) = pol.values().iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(ModelError::PolicyRange {
            index,
            value: pol[index],
        });
    }
    Ok(())
}

/// Checks that a policy matches the instance size and lies in `[0, 1]`.
pub fn validate_policy(inst: &Instance, pol: &Policy) -> Result<(), ModelError> {
    check_policy(inst, pol)
}

pub fn best_response(inst: &Instance, pol: &Policy, tie_tol: f64) -> ResponseProfile {
    Evaluator::new(inst, tie_tol).profile(pol.values())
}

pub fn induced_distribution(inst: &Instance, pol: &Policy) -> Vec<f64> {
    Evaluator::new(inst, DEFAULT_TOL).induced(pol.values())
}

pub fn utility(inst: &Instance, pol: &Policy) -> f64 {
    Evaluator::new(inst, DEFAULT_TOL).utility(pol.values())
}

/// Accept exactly the feature values with non-negative reward.
pub fn non_strategic_policy(inst: &Instance) -> Policy {
    Policy::new(
        (0..inst.m())
            .map(|i| if inst.reward(i) >= 0.0 { 1.0 } else { 0.0 })
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyReport {
    pub weakly_monotonic: bool,
    pub omb: bool,
    /// Member of the multi-step family used for subadditive costs.
    pub multi_step: bool,
}

/// Checks policy-family membership on a canonically ordered instance.
pub fn policy_family_report(
    inst: &Instance,
    pol: &Policy,
    tol: f64,
) -> Result<FamilyReport, ModelError> {
    if inst.q().is_none() {
        return Err(ModelError::NoOutcomes);
    }
    if !inst.is_canonical() {
        return Err(ModelError::NotCanonical);
    }
    check_policy(inst, pol)?;
    let m = inst.m();
    let key = inst.outcome_keys();
    let pi = pol.values();

    let mut weakly_monotonic = true;
    for i in 0..m {
        for j in i + 1..m {
            if key[i] > key[j] && pi[i] < pi[j] - tol {
                weakly_monotonic = false;
            }
        }
    }

    let same = |a: f64, b: f64| (a - b).abs() <= tol;
    let mut omb = true;
    let mut multi_step = true;
    for i in 1..m {
        if inst.reward(i) <= 0.0 {
            continue;
        }
        let prev = pi[i - 1];
        if !(same(pi[i], prev) || same(pi[i], prev - inst.cost.get(i, i - 1))) {
            omb = false;
        }
        let reach_end = (i..m)
            .rev()
            .find(|&j| prev - inst.cost.get(j, i - 1) > 0.0);
        let stepped = reach_end
            .is_some_and(|k| (i..=k).any(|j| same(pi[i], prev - inst.cost.get(j, i - 1))));
        if !(same(pi[i], prev) || stepped) {
            multi_step = false;
        }
    }
    Ok(FamilyReport {
        weakly_monotonic,
        omb,
        multi_step,
    })
}

/// Index of the last positive-reward feature value in a canonical instance.
pub(crate) fn last_positive(inst: &Instance) -> Option<usize> {
    (0..inst.m()).rev().find(|&i| inst.reward(i) > 0.0)
}

/// Blocking states halt upward movement: the top value, values equal to
/// their predecessor, and values accepted with certainty.
#[inline]
pub(crate) fn is_blocking(pi: &[f64], k: usize, tol: f64) -> bool {
    k == 0 || (pi[k] - pi[k - 1]).abs() <= tol || (pi[k] - 1.0).abs() <= tol
}

/// Structural best response under an OMB policy and additive
/// outcome-monotonic costs, for sources `start..m` with `start` treated as a
/// blocking state. Writes targets into `out[start..]`.
pub(crate) fn omb_targets(
    inst: &Instance,
    pi: &[f64],
    start: usize,
    last_pos: Option<usize>,
    tol: f64,
    out: &mut [usize],
) {
    let m = inst.m();
    let mut block = start;
    #[allow(clippy::needless_range_loop)]
    for i in start..m {
        match last_pos {
            Some(r) if i <= r => {
                if i == start || is_blocking(pi, i, tol) {
                    block = i;
                }
                out[i] = block;
            }
            _ => {
                let climbs = last_pos.is_some_and(|r| r >= start)
                    && pi[block] >= inst.cost.get(i, block) - tol;
                out[i] = if climbs { block } else { i };
            }
        }
    }
}

/// Utility contributed by sources `start..m` under the structural response.
pub(crate) fn omb_segment_utility(
    inst: &Instance,
    pi: &[f64],
    start: usize,
    last_pos: Option<usize>,
    tol: f64,
) -> f64 {
    let m = inst.m();
    let mut block = start;
    let mut u = 0.0;
    for i in start..m {
        let t = match last_pos {
            Some(r) if i <= r => {
                if i == start || is_blocking(pi, i, tol) {
                    block = i;
                }
                block
            }
            _ => {
                let climbs = last_pos.is_some_and(|r| r >= start)
                    && pi[block] >= inst.cost.get(i, block) - tol;
                if climbs {
                    block
                } else {
                    i
                }
            }
        };
        u += inst.p[i] * pi[t] * inst.reward(t);
    }
    u
}

/// Best response computed in one pass from the blocking structure of an OMB
/// policy. Requires a canonical instance with additive outcome-monotonic
/// costs, an OMB policy, and zero acceptance wherever reward is not
/// positive.
pub fn best_response_omb(
    inst: &Instance,
    pol: &Policy,
    tol: f64,
) -> Result<ResponseProfile, ModelError> {
    let family = policy_family_report(inst, pol, tol)?;
    if !family.omb {
        return Err(ModelError::Precondition("policy is not OMB".into()));
    }
    let prof = cost_profile(inst, tol);
    if !(prof.additive && prof.outcome_monotonic) {
        return Err(ModelError::Precondition(
            "costs are not additive and outcome monotonic".into(),
        ));
    }
    let pi = pol.values();
    if let Some(i) = (0..inst.m()).find(|&i| inst.reward(i) <= 0.0 && pi[i] > tol) {
        return Err(ModelError::Precondition(format!(
            "policy accepts feature value {i} whose reward is not positive"
        )));
    }

    let m = inst.m();
    let mut target = vec![0; m];
    omb_targets(inst, pi, 0, last_positive(inst), tol, &mut target);
    let eval = Evaluator::new(inst, tol);
    let gain: Vec<f64> = (0..m)
        .map(|i| pi[target[i]] - if target[i] == i { 0.0 } else { inst.cost.get(i, target[i]) })
        .collect();
    let tied = (0..m)
        .map(|i| eval.count_within(pi, i, eval.max_gain(pi, i)) > 1)
        .collect();
    Ok(ResponseProfile { target, gain, tied })
}
