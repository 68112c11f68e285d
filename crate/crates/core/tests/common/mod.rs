//! Reference implementations written directly from the definitions, kept
//! deliberately naive so they share no code paths with the library.

#![allow(dead_code)]

use stratpol::generators::gen_1d_random;
use stratpol::{CostMatrix, Instance, Policy};

pub const TIE: f64 = 1e-9;

pub fn toy() -> Instance {
    let cost = CostMatrix::from_rows(vec![
        vec![0.0, 0.0, 0.0],
        vec![0.3, 0.0, 0.0],
        vec![1.2, 0.3, 0.0],
    ])
    .unwrap();
    Instance::new(vec![0.1, 0.4, 0.5], vec![1.0, 0.7, 0.4], 0.1, cost)
}

pub fn counterexample() -> Instance {
    let cost = CostMatrix::from_rows(vec![
        vec![0.0, 0.2, 0.3],
        vec![0.3, 0.0, 0.7],
        vec![1.2, 1.1, 0.0],
    ])
    .unwrap();
    Instance::new(vec![0.1, 0.4, 0.5], vec![1.0, 0.7, 0.4], 0.1, cost)
}

fn key(inst: &Instance, k: usize) -> f64 {
    match inst.q() {
        Some(q) => q[k],
        None => inst.reward(k),
    }
}

/// Best response of one source: collect every feasible destination, keep
/// those within the tie tolerance of the best gain, then prefer the highest
/// outcome and the lowest index.
pub fn naive_target(inst: &Instance, pi: &[f64], i: usize) -> usize {
    let m = inst.m();
    let gains: Vec<(usize, f64)> = (0..m)
        .filter_map(|k| {
            let c = if k == i { 0.0 } else { inst.cost.get(i, k) };
            c.is_finite().then(|| (k, pi[k] - c))
        })
        .collect();
    let best = gains.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<usize> = gains
        .iter()
        .filter(|g| g.1 >= best - TIE)
        .map(|g| g.0)
        .collect();
    tied.sort_by(|&a, &b| key(inst, b).partial_cmp(&key(inst, a)).unwrap().then(a.cmp(&b)));
    tied[0]
}

pub fn naive_targets(inst: &Instance, pi: &[f64]) -> Vec<usize> {
    (0..inst.m()).map(|i| naive_target(inst, pi, i)).collect()
}

/// Double sum over (source, destination) pairs.
pub fn naive_utility(inst: &Instance, pi: &[f64]) -> f64 {
    let t = naive_targets(inst, pi);
    let mut u = 0.0;
    for i in 0..inst.m() {
        for j in 0..inst.m() {
            if t[i] == j {
                u += inst.reward(j) * pi[j] * inst.p[i];
            }
        }
    }
    u
}

pub fn naive_induced(inst: &Instance, pi: &[f64]) -> Vec<f64> {
    let t = naive_targets(inst, pi);
    (0..inst.m())
        .map(|j| (0..inst.m()).filter(|&i| t[i] == j).map(|i| inst.p[i]).sum())
        .collect()
}

/// Every policy on the grid `{0, 1/n, ..., 1}^m`, in lexicographic order.
pub fn grid_policies(m: usize, n: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = (n + 1).pow(m as u32);
    (0..total).map(move |mut idx| {
        let mut pi = vec![0.0; m];
        for slot in pi.iter_mut().rev() {
            *slot = (idx % (n + 1)) as f64 / n as f64;
            idx /= n + 1;
        }
        pi
    })
}

/// Maximum utility over the grid by plain enumeration.
pub fn naive_grid_max(inst: &Instance, n: usize) -> f64 {
    grid_policies(inst.m(), n)
        .map(|pi| naive_utility(inst, &pi))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `gen_1d_random` with finite costs rounded up to tenths, so all cost
/// differences are rational with a small common step.
pub fn rounded_random(m: usize, kappa: f64, seed: u64) -> Instance {
    let mut inst = gen_1d_random(m, kappa, 0.3, seed).unwrap();
    for i in 0..m {
        for j in 0..m {
            let c = inst.cost.get(i, j);
            if i != j && c.is_finite() {
                inst.cost.set(i, j, ((c * 10.0).ceil().max(1.0)) / 10.0);
            }
        }
    }
    inst
}

/// Random OMB policy for a canonical instance: top value `top`, each later
/// positive-reward value either repeats its predecessor or steps down by the
/// adjacent cost (repeating when stepping would go negative), zero after.
pub fn omb_policy(inst: &Instance, top: f64, pattern: u64) -> Policy {
    let m = inst.m();
    let mut pi = vec![0.0; m];
    if inst.reward(0) <= 0.0 {
        return Policy::new(pi);
    }
    pi[0] = top;
    for k in 1..m {
        if inst.reward(k) <= 0.0 {
            break;
        }
        let step = pi[k - 1] - inst.cost.get(k, k - 1);
        pi[k] = if pattern >> (k % 64) & 1 == 1 && step >= 0.0 {
            step
        } else {
            pi[k - 1]
        };
    }
    Policy::new(pi)
}
