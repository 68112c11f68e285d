//! One-dimensional random families.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use super::{meta, rng, GenError, RNG_NAME};
use crate::model::{CostMatrix, Instance};

fn check_common(m: usize, gamma: f64) -> Result<(), GenError> {
    if m == 0 {
        return Err(GenError::InvalidParam("m must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GenError::InvalidParam(format!("gamma {gamma} outside (0, 1)")));
    }
    Ok(())
}

/// Masses from Normal(0.5, 0.1) truncated below at zero, normalized.
fn masses<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let normal = Normal::new(0.5, 0.1).expect("valid normal");
    let mut t: Vec<f64> = (0..m)
        .map(|_| loop {
            let x: f64 = normal.sample(rng);
            if x > 0.0 {
                break x;
            }
        })
        .collect();
    let total: f64 = t.iter().sum();
    t.iter_mut().for_each(|x| *x /= total);
    t
}

/// Random masses and outcomes; a fraction `kappa` of the ordered
/// off-diagonal pairs get Uniform[0, 1) costs, the rest are unreachable.
pub fn gen_1d_random(m: usize, kappa: f64, gamma: f64, seed: u64) -> Result<Instance, GenError> {
    check_common(m, gamma)?;
    if !(0.0..=1.0).contains(&kappa) {
        return Err(GenError::InvalidParam(format!("kappa {kappa} outside [0, 1]")));
    }
    let mut rng = rng(seed);
    let p = masses(&mut rng, m);
    let q: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();

    let mut cost = CostMatrix::unreachable(m);
    let pairs = m * (m - 1);
    let chosen = ((kappa * pairs as f64).round() as usize).min(pairs);
    let mut picked = sample(&mut rng, pairs.max(1), chosen).into_vec();
    picked.sort_unstable();
    for idx in picked {
        let i = idx / (m - 1);
        let k = idx % (m - 1);
        let j = if k >= i { k + 1 } else { k };
        // Zero would make an improving move free; redraw on that null event.
        let c = loop {
            let c: f64 = rng.random();
            if c > 0.0 {
                break c;
            }
        };
        cost.set(i, j, c);
    }

    let mut inst = Instance::new(p, q, gamma, cost);
    inst.meta = meta(
        "1d-random",
        &[
            ("m", json!(m)),
            ("kappa", json!(kappa)),
            ("gamma", json!(gamma)),
            ("seed", json!(seed)),
            ("rng", json!(RNG_NAME)),
        ],
    );
    Ok(inst)
}

/// Additive outcome-monotonic costs from a potential: feature values are in
/// decreasing outcome order, `c(i, j) = phi[j] - phi[i]` for `j < i` and
/// worsening is free. `phi` comes from `m - 1` sorted Uniform[0, 1/kappa)
/// draws with `phi[m-1] = 0`.
pub fn gen_additive_monotonic(
    m: usize,
    kappa: f64,
    gamma: f64,
    seed: u64,
) -> Result<Instance, GenError> {
    build_additive(m, kappa, gamma, None, seed)
}

/// [`gen_additive_monotonic`] with every draw rounded up to a positive
/// multiple of `quantum` (distinct multiples, redrawn on collision), so all
/// cost differences are multiples of `quantum` and exact grid search
/// applies.
pub fn gen_additive_monotonic_quantized(
    m: usize,
    kappa: f64,
    gamma: f64,
    quantum: f64,
    seed: u64,
) -> Result<Instance, GenError> {
    if !(quantum > 0.0 && quantum.is_finite()) {
        return Err(GenError::InvalidParam(format!("cost quantum {quantum} must be positive")));
    }
    let levels = (1.0 / kappa / quantum).ceil();
    if levels < (m as f64 - 1.0) {
        return Err(GenError::InvalidParam(format!(
            "cost quantum {quantum} leaves {levels} levels for {} costs",
            m - 1
        )));
    }
    build_additive(m, kappa, gamma, Some(quantum), seed)
}

fn build_additive(
    m: usize,
    kappa: f64,
    gamma: f64,
    quantum: Option<f64>,
    seed: u64,
) -> Result<Instance, GenError> {
    check_common(m, gamma)?;
    if m < 2 {
        return Err(GenError::InvalidParam("m must be at least 2".into()));
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(GenError::InvalidParam(format!("kappa {kappa} outside (0, 1]")));
    }
    let mut rng = rng(seed);
    let p = masses(&mut rng, m);
    let mut q: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    q.sort_by(|a, b| b.total_cmp(a));

    let upper = 1.0 / kappa;
    // Potentials as integer levels when quantized, raw draws otherwise.
    let mut draws: Vec<f64> = Vec::with_capacity(m - 1);
    while draws.len() < m - 1 {
        let u = rng.random::<f64>() * upper;
        let v = match quantum {
            Some(qt) => (u / qt).ceil().max(1.0),
            None => u,
        };
        if v > 0.0 && !draws.contains(&v) {
            draws.push(v);
        }
    }
    draws.sort_by(f64::total_cmp);
    // phi[m-1] = 0; phi[i] grows as i decreases.
    let mut phi = vec![0.0; m];
    for (k, &d) in draws.iter().enumerate() {
        phi[m - 2 - k] = d;
    }
    let scale = quantum.unwrap_or(1.0);
    let mut cost = CostMatrix::zeros(m);
    for i in 0..m {
        for j in 0..i {
            cost.set(i, j, (phi[j] - phi[i]) * scale);
        }
    }

    let mut inst = Instance::new(p, q, gamma, cost);
    let mut params = vec![
        ("m", json!(m)),
        ("kappa", json!(kappa)),
        ("gamma", json!(gamma)),
        ("seed", json!(seed)),
        ("rng", json!(RNG_NAME)),
    ];
    if let Some(qt) = quantum {
        params.push(("cost_quantum", json!(qt)));
    }
    inst.meta = meta("additive-monotonic", &params);
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cost_profile, validate_instance, DEFAULT_TOL};
    use crate::solvers::{common_step_divisions, DEFAULT_MAX_DEN};

    #[test]
    fn kappa_zero_is_isolated() {
        let inst = gen_1d_random(6, 0.0, 0.3, 1).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(inst.cost.get(i, j).is_finite(), i == j);
            }
        }
    }

    #[test]
    fn kappa_one_fills_every_pair() {
        let inst = gen_1d_random(5, 1.0, 0.3, 7).unwrap();
        let finite = (0..5)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && inst.cost.get(i, j).is_finite())
            .count();
        assert_eq!(finite, 20);
        assert!((0..5).all(|i| (0..5).all(|j| inst.cost.get(i, j) <= 1.0)));
    }

    #[test]
    fn random_instances_validate() {
        for seed in 0..20 {
            let inst = gen_1d_random(12, 0.5, 0.3, seed).unwrap();
            assert!(validate_instance(&inst, DEFAULT_TOL).is_valid(), "seed {seed}");
        }
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let a = gen_1d_random(8, 0.5, 0.3, 11).unwrap();
        let b = gen_1d_random(8, 0.5, 0.3, 11).unwrap();
        let c = gen_1d_random(8, 0.5, 0.3, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.p, c.p);
        assert_eq!(a.meta["rng"], "chacha20");
    }

    #[test]
    fn large_configuration() {
        let inst = gen_1d_random(200, 0.75, 0.3, 0).unwrap();
        assert_eq!(inst.m(), 200);
        let finite = (0..200)
            .map(|i| (0..200).filter(|&j| j != i && inst.cost.get(i, j).is_finite()).count())
            .sum::<usize>();
        assert_eq!(finite, (0.75f64 * 200.0 * 199.0).round() as usize);
    }

    #[test]
    fn additive_two_values() {
        let inst = gen_additive_monotonic(2, 0.5, 0.15, 3).unwrap();
        let c = inst.cost.get(1, 0);
        assert!(c > 0.0 && c < 2.0);
        assert_eq!(inst.cost.get(0, 1), 0.0);
    }

    #[test]
    fn additive_profile() {
        for seed in 0..30 {
            let inst = gen_additive_monotonic(10, 0.4, 0.15, seed).unwrap();
            let prof = cost_profile(&inst, DEFAULT_TOL);
            assert!(prof.additive && prof.outcome_monotonic, "seed {seed}");
            assert!(inst.is_canonical());
            assert!(validate_instance(&inst, DEFAULT_TOL).is_valid());
        }
    }

    #[test]
    fn quantized_costs_share_a_step() {
        let inst = gen_additive_monotonic_quantized(6, 0.5, 0.15, 0.25, 9).unwrap();
        let n = common_step_divisions(&inst, DEFAULT_MAX_DEN).unwrap();
        assert_eq!(4 % n, 0);
        let prof = cost_profile(&inst, DEFAULT_TOL);
        assert!(prof.additive && prof.outcome_monotonic);
        assert!(gen_additive_monotonic_quantized(6, 1.0, 0.15, 0.5, 9).is_err());
    }
}
