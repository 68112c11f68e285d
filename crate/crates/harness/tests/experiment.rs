mod common;

use std::fs;
use std::path::Path;

use common::TOY_JSON;
use stratpol::utility;
use stratpol_harness::{load_instance, load_policy, run_experiment, ExperimentSpec};

fn spec(json: &str) -> ExperimentSpec {
    serde_json::from_str(json).unwrap()
}

/// CSV text with the wall_ms column dropped.
fn csv_without_timing(path: &Path) -> String {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let skip = headers.iter().position(|h| h == "wall_ms").unwrap();
    let mut out = String::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let fields: Vec<&str> = rec.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, f)| f).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[test]
fn toy_brute_cell() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.json"), TOY_JSON).unwrap();
    let s = spec(r#"{"family": "file", "instance": "toy.json", "algorithms": ["brute", "nonstrategic"], "brute_step": 0.1}"#);
    let out = dir.path().join("out");
    let records = run_experiment(&s, dir.path(), &out).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].algorithm, "brute");
    assert!((records[0].utility.unwrap() - 0.66).abs() < 1e-9);
    assert_eq!(records[0].iterations, Some(1331));
    assert!((records[1].utility.unwrap() - 0.48).abs() < 1e-9);

    let text = fs::read_to_string(out.join("results.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "algorithm,seed,m,kappa,alpha,gamma,utility,iterations,converged,wall_ms,error"
    );
    let pol = load_policy(out.join("policies/v000-r000-brute.json")).unwrap();
    assert_eq!(pol.values(), &[1.0, 0.7, 0.0]);
}

#[test]
fn sweep_is_ordered_and_reproducible() {
    let s = spec(
        r#"{"family": "1d-random", "m": 12, "repetitions": 3, "seed": 11,
            "sweep": {"param": "kappa", "values": [0.25, 1.0]},
            "algorithms": ["nonstrategic", "iter", "par-iter"]}"#,
    );
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_experiment(&s, a.path(), a.path()).unwrap();
    run_experiment(&s, b.path(), b.path()).unwrap();
    assert_eq!(ra.len(), 2 * 3 * 3);
    let algs: Vec<&str> = ra.iter().take(3).map(|r| r.algorithm.as_str()).collect();
    assert_eq!(algs, ["nonstrategic", "iter", "par-iter"]);
    assert!(ra[..9].iter().all(|r| r.kappa == Some(0.25)));
    assert!(ra[9..].iter().all(|r| r.kappa == Some(1.0)));
    assert_ne!(ra[0].seed, ra[3].seed);
    assert_eq!(ra[0].seed, ra[9].seed);
    assert!(ra.iter().all(|r| r.error.is_empty()));
    assert_eq!(
        csv_without_timing(&a.path().join("results.csv")),
        csv_without_timing(&b.path().join("results.csv"))
    );
}

#[test]
fn persisted_policies_reproduce_utilities() {
    let s = spec(
        r#"{"family": "additive-monotonic", "m": 6, "repetitions": 2, "seed": 3, "cost_quantum": 0.2,
            "sweep": {"param": "kappa", "values": [0.5, 1.0]},
            "algorithms": ["iter", "dp", "brute"]}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    let records = run_experiment(&s, dir.path(), dir.path()).unwrap();
    let names = ["v000-r000", "v000-r001", "v001-r000", "v001-r001"];
    for (k, rec) in records.iter().enumerate() {
        assert!(rec.error.is_empty(), "{rec:?}");
        let cell = names[k / 3];
        let inst = load_instance(dir.path().join(format!("instances/{cell}.json"))).unwrap();
        let pol = load_policy(dir.path().join(format!("policies/{cell}-{}.json", rec.algorithm))).unwrap();
        assert!((utility(&inst, &pol) - rec.utility.unwrap()).abs() <= 1e-9);
    }
    // Brute force over the common step is exact, so nothing beats it.
    for cell in records.chunks(3) {
        let brute = cell[2].utility.unwrap();
        assert!(cell[0].utility.unwrap() <= brute + 1e-12);
        assert!(cell[1].utility.unwrap() <= brute + 1e-12);
    }
}

#[test]
fn failing_cells_do_not_stop_the_sweep() {
    // The toy costs are not additive, so the dynamic program refuses them;
    // a tiny budget makes brute force fail too.
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.json"), TOY_JSON).unwrap();
    let s = spec(
        r#"{"family": "file", "instance": "toy.json", "algorithms": ["dp", "brute", "iter"], "brute_budget": 5}"#,
    );
    let records = run_experiment(&s, dir.path(), dir.path()).unwrap();
    assert!(records[0].error.contains("additive"));
    assert!(records[1].error.contains("budget"));
    assert!(records[0].utility.is_none());
    assert!((records[2].utility.unwrap() - 0.66).abs() < 1e-9);

    // Generator failures are recorded per cell as well.
    let bad = spec(
        r#"{"family": "1d-random", "sweep": {"param": "m", "values": [4, 0]}, "algorithms": ["iter"]}"#,
    );
    assert!(run_experiment(&bad, dir.path(), dir.path()).is_err());
    let bad_kappa = spec(
        r#"{"family": "1d-random", "m": 4, "sweep": {"param": "kappa", "values": [0.5, -1]}, "algorithms": ["iter"]}"#,
    );
    let records = run_experiment(&bad_kappa, dir.path(), dir.path()).unwrap();
    assert!(records[0].error.is_empty());
    assert!(!records[1].error.is_empty());
}

#[test]
fn grid_family_sweeps_alpha() {
    let s = spec(
        r#"{"family": "mixture-grid", "sweep": {"param": "alpha", "values": [0.9, 7]}, "algorithms": ["iter"]}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    let records = run_experiment(&s, dir.path(), dir.path()).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[1].alpha, Some(7.0));
    assert_eq!(records[1].m, 49);
    assert!(records.iter().all(|r| r.kappa.is_none() && r.seed.is_none()));
}
