mod common;

use common::*;
use stratpol::generators::{gen_2d_unimodal_grid, gen_additive_monotonic_quantized};
use stratpol::solvers::{
    best_omb_policy, brute_force, candidate_values, common_step_divisions, dp_search,
    iterative_search, solve_coordinate, DEFAULT_BUDGET, DEFAULT_MAX_DEN, DEFAULT_MAX_SWEEPS,
};
use stratpol::{
    best_response, induced_distribution, transport_plan, utility, CostMatrix, Instance, Policy,
    DEFAULT_TOL,
};

#[test]
fn toy_values_from_reference_evaluator() {
    let inst = toy();
    let pi = [1.0, 0.7, 0.0];
    assert_eq!(naive_targets(&inst, &pi), vec![0, 0, 1]);
    assert!((naive_utility(&inst, &pi) - 0.66).abs() < 1e-12);
    assert!((utility(&inst, &Policy::new(pi.to_vec())) - naive_utility(&inst, &pi)).abs() < 1e-15);
    let d = naive_induced(&inst, &pi);
    assert!((d[0] - 0.5).abs() < 1e-12 && (d[1] - 0.5).abs() < 1e-12 && d[2] == 0.0);
    assert!((naive_utility(&inst, &[1.0, 1.0, 1.0]) - 0.48).abs() < 1e-12);
}

#[test]
fn toy_transport_objective() {
    // Row-wise best gains: x1 keeps 1, x2 gets 0.7, x3 gets 0.7 - 0.3.
    let inst = toy();
    let pol = Policy::new(vec![1.0, 0.7, 0.0]);
    let expected = 0.1 * 1.0 + 0.4 * 0.7 + 0.5 * 0.4;
    assert!((transport_plan(&inst, &pol).objective - expected).abs() < 1e-12);
}

#[test]
fn toy_candidates_match_reference_sweep() {
    let inst = toy();
    let base = [1.0, 0.0, 0.0];
    let cands = candidate_values(&inst, &Policy::new(base.to_vec()), 1);
    let utilities: Vec<f64> = cands
        .iter()
        .map(|&v| naive_utility(&inst, &[1.0, v, 0.0]))
        .collect();
    let expected = [0.45, 0.54, 0.66, 0.63];
    assert_eq!(utilities.len(), 4);
    for (u, e) in utilities.iter().zip(expected) {
        assert!((u - e).abs() < 1e-12, "{utilities:?}");
    }
    let (v, u) = solve_coordinate(&inst, &Policy::new(base.to_vec()), 1);
    assert!((v - 0.7).abs() < 1e-12 && (u - 0.66).abs() < 1e-12);
}

#[test]
fn toy_iterative_reaches_brute_force() {
    let inst = toy();
    let brute = brute_force(&inst, 0.1, DEFAULT_BUDGET).unwrap();
    let iter = iterative_search(&inst, &Policy::zeros(3), DEFAULT_MAX_SWEEPS);
    assert!(iter.utility >= 0.48);
    assert!((iter.utility - brute.utility).abs() < 1e-12);
}

#[test]
fn counterexample_first_optimum() {
    let res = brute_force(&counterexample(), 0.1, DEFAULT_BUDGET).unwrap();
    assert_eq!(res.policy.values(), &[1.0, 0.0, 1.0]);
}

#[test]
fn zero_policy_targets_under_free_worsening() {
    // Outcome-monotonic costs: every candidate ties at gain 0, and the
    // source itself has the highest outcome among those it can reach freely.
    let inst = toy();
    assert_eq!(naive_targets(&inst, &[0.0; 3]), vec![0, 1, 2]);
    assert_eq!(best_response(&inst, &Policy::zeros(3), DEFAULT_TOL).target, vec![0, 1, 2]);
}

#[test]
fn dp_two_value_options() {
    let cost = CostMatrix::from_rows(vec![vec![0.0, 0.0], vec![0.3, 0.0]]).unwrap();
    let inst = Instance::new(vec![0.5, 0.5], vec![0.9, 0.5], 0.2, cost);
    // The two OMB candidates with pi(x1) = 1.
    assert!((naive_utility(&inst, &[1.0, 1.0]) - 0.5).abs() < 1e-12);
    assert!((naive_utility(&inst, &[1.0, 0.7]) - 0.7).abs() < 1e-12);
    let res = dp_search(&inst).unwrap();
    assert!((res.utility - 0.7).abs() < 1e-12);
}

#[test]
fn dp_against_exact_search() {
    let mut multi_round = 0;
    let mut exact = 0;
    for seed in 0..150u64 {
        let m = 3 + (seed as usize % 4);
        let kappa = [0.2, 0.5, 1.0][seed as usize % 3];
        let inst = gen_additive_monotonic_quantized(m, kappa, 0.15, 0.2, seed).unwrap();
        let n = common_step_divisions(&inst, DEFAULT_MAX_DEN).unwrap();
        let best = naive_grid_max(&inst, n as usize);
        let dp = dp_search(&inst).unwrap();
        assert!(dp.utility <= best + 1e-12, "seed {seed}");
        assert!(dp.utility >= 0.0, "seed {seed}");
        if (best - dp.utility).abs() < 1e-9 {
            exact += 1;
        }
        if dp.rounds > 1 {
            multi_round += 1;
        }
        let omb = best_omb_policy(&inst, DEFAULT_BUDGET).unwrap();
        assert!((omb.utility - best).abs() < 1e-9, "seed {seed}");
    }
    assert!(exact >= 140, "dp exact on {exact}/150");
    assert!(multi_round > 0, "no instance needed a second round");
}

#[test]
fn isolated_iterative_recovers_threshold_rule() {
    let mut inst = toy();
    inst.cost = CostMatrix::unreachable(3);
    inst.gamma = 0.5;
    let res = iterative_search(&inst, &Policy::zeros(3), DEFAULT_MAX_SWEEPS);
    assert_eq!(res.policy.values(), &[1.0, 1.0, 0.0]);
    assert_eq!(res.iterations, 1);
}

#[test]
fn unimodal_grid_induced_mass_is_conserved() {
    let inst = gen_2d_unimodal_grid(2.0, 0.2).unwrap();
    let res = iterative_search(&inst, &Policy::zeros(inst.m()), DEFAULT_MAX_SWEEPS);
    let d = induced_distribution(&inst, &res.policy);
    assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let reference = naive_utility(&inst, res.policy.values());
    assert!((res.utility - reference).abs() < 1e-12);
}
