//! Exhaustive search over a regular grid of policy values.
//!
//! When every cost difference is a multiple of `1/N`, some optimal policy
//! takes values in `{0, 1/N, ..., 1}`, so enumerating that grid is exact.

use std::time::Instant;

use num_integer::Integer;
use rayon::prelude::*;

use super::{SolveError, SolveResult};
use crate::model::{Instance, Policy, DEFAULT_TOL};
use crate::response::Evaluator;

/// Largest denominator tried when rationalizing costs.
pub const DEFAULT_MAX_DEN: u64 = 1000;

/// Default cap on the number of enumerated policies.
pub const DEFAULT_BUDGET: u128 = 50_000_000;

const RATIONAL_TOL: f64 = 1e-9;
const IMPROVE_TOL: f64 = 1e-12;
const CHUNK: u64 = 1 << 14;

/// Best rational approximation `num/den` of `x >= 0` with `den <= max_den`,
/// if one lies within tolerance.
fn rationalize(x: f64, max_den: u64) -> Option<(u64, u64)> {
    if !(x.is_finite() && x >= 0.0) {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            return None;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        if (x - h2 as f64 / k2 as f64).abs() <= RATIONAL_TOL {
            return Some((h2, k2));
        }
        let frac = y - a as f64;
        if frac <= 0.0 {
            return None;
        }
        y = 1.0 / frac;
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
    }
    None
}

/// `N` such that `1/N` divides 1 and every finite cost difference, with all
/// denominators bounded by `max_den`.
pub fn common_step_divisions(inst: &Instance, max_den: u64) -> Option<u64> {
    let m = inst.m();
    let mut fracs = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let c = inst.cost.get(i, j);
            if c.is_finite() && c != 0.0 {
                fracs.push(rationalize(c, max_den)?);
            }
        }
    }
    // Differences c(i,j) - c(i,k) are integer combinations of the costs, and
    // each cost is itself a difference against c(i,i) = 0, so the common
    // divisor of the costs is the common divisor of the differences.
    let mut lcm = 1u64;
    for &(_, d) in &fracs {
        lcm = lcm.lcm(&d);
        if lcm > max_den {
            return None;
        }
    }
    let mut g = lcm;
    for &(n, d) in &fracs {
        g = g.gcd(&(n * (lcm / d)));
    }
    Some(lcm / g)
}

/// Largest common step `u` dividing 1 and all finite cost differences.
pub fn common_step(inst: &Instance, max_den: u64) -> Option<f64> {
    common_step_divisions(inst, max_den).map(|n| 1.0 / n as f64)
}

/// `m^(1 + 1/u) - 1`, saturating at `u64::MAX`.
pub fn termination_bound(m: usize, u_bar: f64) -> u64 {
    if m <= 1 {
        return 0;
    }
    let k = (1.0 / u_bar).round();
    if !(k.is_finite() && k >= 0.0 && k < u32::MAX as f64) {
        return u64::MAX;
    }
    match (m as u64).checked_pow(k as u32 + 1) {
        Some(v) => v - 1,
        None => u64::MAX,
    }
}

/// Number of intervals of a step that divides 1.
fn step_divisions(step: f64) -> Result<u64, SolveError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(SolveError::InvalidStep(step));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() > RATIONAL_TOL {
        return Err(SolveError::InvalidStep(step));
    }
    Ok(n as u64)
}

fn space_size(values: usize, coords: usize, budget: u128) -> Result<u64, SolveError> {
    let mut count: u128 = 1;
    for _ in 0..coords {
        count = count.saturating_mul(values as u128);
    }
    if count > budget || count > u64::MAX as u128 {
        return Err(SolveError::BudgetExceeded {
            policies: count,
            budget,
        });
    }
    Ok(count as u64)
}

/// Scans every assignment of `values` to `coords`, the first coordinate
/// most significant and values in the given order. Returns the first
/// maximizer found in that order along with its utility.
fn enumerate(
    eval: &Evaluator,
    base: &[f64],
    coords: &[usize],
    values: &[f64],
    count: u64,
) -> (Vec<f64>, f64) {
    let radix = values.len() as u64;
    let decode = |mut idx: u64, digits: &mut [usize]| {
        for d in digits.iter_mut().rev() {
            *d = (idx % radix) as usize;
            idx /= radix;
        }
    };
    let chunks = count.div_ceil(CHUNK);
    let bests: Vec<(f64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(count);
            let mut digits = vec![0usize; coords.len()];
            decode(start, &mut digits);
            let mut pi = base.to_vec();
            for (&i, &d) in coords.iter().zip(&digits) {
                pi[i] = values[d];
            }
            let mut best = (f64::NEG_INFINITY, start);
            for idx in start..end {
                let u = eval.utility(&pi);
                if u > best.0 + IMPROVE_TOL {
                    best = (u, idx);
                }
                // Advance the odometer, least significant coordinate last.
                for pos in (0..coords.len()).rev() {
                    digits[pos] += 1;
                    if digits[pos] < values.len() {
                        pi[coords[pos]] = values[digits[pos]];
                        break;
                    }
                    digits[pos] = 0;
                    pi[coords[pos]] = values[0];
                }
            }
            best
        })
        .collect();

    let mut best = (f64::NEG_INFINITY, 0);
    for b in bests {
        if b.0 > best.0 + IMPROVE_TOL {
            best = b;
        }
    }
    let mut digits = vec![0usize; coords.len()];
    decode(best.1, &mut digits);
    let mut pi = base.to_vec();
    for (&i, &d) in coords.iter().zip(&digits) {
        pi[i] = values[d];
    }
    (pi, best.0)
}

/// Exhaustive search over policies with values in `{0, step, ..., 1}`.
///
/// Exact when the grid contains the common-step grid of the instance;
/// otherwise the result is flagged approximate.
pub fn brute_force(inst: &Instance, step: f64, budget: u128) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let n = step_divisions(step)?;
    let m = inst.m();
    let count = space_size(n as usize + 1, m, budget)?;
    let values: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let coords: Vec<usize> = (0..m).collect();
    let eval = Evaluator::new(inst, DEFAULT_TOL);
    let (pi, _) = enumerate(&eval, &vec![0.0; m], &coords, &values, count);

    let policy = Policy::new(pi);
    let utility = eval.utility(policy.values());
    let mut out = SolveResult::new(policy, utility, started);
    out.iterations = count;
    out.approximate = !common_step_divisions(inst, DEFAULT_MAX_DEN).is_some_and(|d| n % d == 0);
    Ok(out)
}

/// Exhaustive search over `{0, 1}` on the `free` coordinates, the others
/// held at their values in `base`.
pub fn brute_force_binary(
    inst: &Instance,
    free: &[usize],
    base: &Policy,
    budget: u128,
) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let count = space_size(2, free.len(), budget)?;
    let eval = Evaluator::new(inst, DEFAULT_TOL);
    let (pi, _) = enumerate(&eval, base.values(), free, &[0.0, 1.0], count);
    let policy = Policy::new(pi);
    let utility = eval.utility(policy.values());
    let mut out = SolveResult::new(policy, utility, started);
    out.iterations = count;
    out.approximate = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::CostMatrix;

    #[test]
    fn rationalizes_decimals() {
        assert_eq!(rationalize(0.3, 1000), Some((3, 10)));
        assert_eq!(rationalize(1.2, 1000), Some((6, 5)));
        assert_eq!(rationalize(0.0, 1000), Some((0, 1)));
        assert_eq!(rationalize(std::f64::consts::PI - 3.0, 1000), None);
    }

    #[test]
    fn toy_common_step() {
        assert_eq!(common_step_divisions(&toy(), DEFAULT_MAX_DEN), Some(10));
        assert!((common_step(&toy(), DEFAULT_MAX_DEN).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_costs_have_unit_step() {
        let inst = Instance::new(vec![0.5, 0.5], vec![0.9, 0.1], 0.2, CostMatrix::zeros(2));
        assert_eq!(common_step(&inst, DEFAULT_MAX_DEN), Some(1.0));
    }

    #[test]
    fn irrational_costs_have_no_step() {
        let mut inst = two_value();
        inst.cost.set(1, 0, 1.0 - std::f64::consts::FRAC_1_SQRT_2 / 100.0);
        assert_eq!(common_step(&inst, DEFAULT_MAX_DEN), None);
    }

    #[test]
    fn bound_values() {
        assert_eq!(termination_bound(3, 0.1), 177_146);
        assert_eq!(termination_bound(2, 1.0), 3);
        assert_eq!(termination_bound(1, 0.1), 0);
        assert_eq!(termination_bound(50, 0.001), u64::MAX);
    }

    #[test]
    fn rejects_bad_steps() {
        assert!(matches!(brute_force(&toy(), 0.3, DEFAULT_BUDGET), Err(SolveError::InvalidStep(_))));
        assert!(matches!(brute_force(&toy(), 0.0, DEFAULT_BUDGET), Err(SolveError::InvalidStep(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let err = brute_force(&toy(), 0.1, 1000).unwrap_err();
        assert_eq!(
            err,
            SolveError::BudgetExceeded {
                policies: 1331,
                budget: 1000
            }
        );
    }

    #[test]
    fn toy_optimum() {
        let res = brute_force(&toy(), 0.1, DEFAULT_BUDGET).unwrap();
        assert_eq!(res.policy.values(), &[1.0, 0.7, 0.0]);
        assert!((res.utility - 0.66).abs() < 1e-9);
        assert!(!res.approximate);
        assert_eq!(res.iterations, 1331);
    }

    #[test]
    fn coarse_grid_is_approximate() {
        let res = brute_force(&toy(), 0.5, DEFAULT_BUDGET).unwrap();
        assert!(res.approximate);
        assert!(res.utility <= 0.66 + 1e-12);
    }

    #[test]
    fn single_value() {
        let inst = Instance::new(vec![1.0], vec![0.8], 0.3, CostMatrix::zeros(1));
        let res = brute_force(&inst, 0.1, DEFAULT_BUDGET).unwrap();
        assert_eq!(res.policy.values(), &[1.0]);
        assert!((res.utility - 0.5).abs() < 1e-12);
    }

    #[test]
    fn binary_search_holds_pinned_coordinates() {
        let base = Policy::new(vec![1.0, 0.0, 0.0]);
        let res = brute_force_binary(&toy(), &[1, 2], &base, DEFAULT_BUDGET).unwrap();
        assert_eq!(res.policy[0], 1.0);
        assert_eq!(res.iterations, 4);
        // (1,1,0) pulls the lowest value up one step: 0.09 + 0.24 + 0.30
        assert_eq!(res.policy.values(), &[1.0, 1.0, 0.0]);
        assert!((res.utility - 0.63).abs() < 1e-12);
    }
}
