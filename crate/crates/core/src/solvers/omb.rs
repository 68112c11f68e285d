//! Exhaustive search restricted to OMB policies.

use std::time::Instant;

use super::grid::{common_step_divisions, DEFAULT_MAX_DEN};
use super::{SolveError, SolveResult};
use crate::model::{canonicalize, cost_profile, Instance, Policy, DEFAULT_TOL};
use crate::response::{last_positive, Evaluator};

/// Best OMB policy whose top value lies on the common-step grid.
///
/// Every blocking pattern over the positive-reward values is tried; values
/// past the last positive reward are zero. Patterns that would drive a value
/// negative are skipped.
pub fn best_omb_policy(inst: &Instance, budget: u128) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let (canon, perm) = canonicalize(inst)?;
    let prof = cost_profile(&canon, DEFAULT_TOL);
    if !(prof.additive && prof.outcome_monotonic) {
        return Err(SolveError::Precondition(
            "OMB search needs additive, outcome-monotonic costs".into(),
        ));
    }
    let n = common_step_divisions(&canon, DEFAULT_MAX_DEN)
        .ok_or_else(|| SolveError::Precondition("costs have no common step".into()))?;
    let m = canon.m();
    let eval = Evaluator::new(&canon, DEFAULT_TOL);

    let Some(r) = last_positive(&canon) else {
        let mut out = SolveResult::new(Policy::zeros(m), 0.0, started);
        out.iterations = 1;
        return Ok(out);
    };
    let patterns = 1u128 << r.min(100);
    let count = patterns.saturating_mul(n as u128 + 1);
    if count > budget {
        return Err(SolveError::BudgetExceeded {
            policies: count,
            budget,
        });
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut pi = vec![0.0; m];
    for top in 0..=n {
        pi[0] = top as f64 / n as f64;
        'pattern: for mask in 0..patterns as u64 {
            for k in 1..=r {
                let blocked = mask >> (k - 1) & 1 == 1;
                pi[k] = if blocked {
                    pi[k - 1]
                } else {
                    pi[k - 1] - canon.cost.get(k, k - 1)
                };
                if pi[k] < -DEFAULT_TOL {
                    continue 'pattern;
                }
                pi[k] = pi[k].max(0.0);
            }
            let u = eval.utility(&pi);
            if best.as_ref().is_none_or(|b| u > b.1 + 1e-12) {
                best = Some((pi.clone(), u));
            }
        }
    }

    // The all-blocking pattern never goes negative, so some policy was seen.
    let (pi, _) = best.expect("at least one OMB policy");
    let policy = Policy::new(pi).unpermuted(&perm);
    let u = Evaluator::new(inst, DEFAULT_TOL).utility(policy.values());
    let mut out = SolveResult::new(policy, u, started);
    out.iterations = count as u64;
    Ok(out)
}
