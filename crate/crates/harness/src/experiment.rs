//! Parameter sweeps with seeded repetitions and CSV output.
//!
//! A sweep runs every (parameter value, repetition, algorithm) cell. The
//! instance for a (value, repetition) pair is generated once and shared by
//! its algorithms. Cells run on the rayon pool; rows come back in
//! (value, repetition, algorithm) order regardless of scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stratpol::generators::{split_seed, Family, GenSpec};
use stratpol::solvers::{DEFAULT_BUDGET, DEFAULT_MAX_SWEEPS, PARALLEL_SWEEP_CAP};
use stratpol::{validate_instance, Instance, DEFAULT_TOL};
use thiserror::Error;

use crate::files::{load_instance, save_instance, save_policy, FileError, PolicyRecord};
use crate::solve::{run_algorithm, Algorithm, SolveOptions};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing results: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    M,
    Kappa,
    Alpha,
    Gamma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// How repetition seeds derive from the base seed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedScheme {
    /// splitmix64 of (seed, repetition).
    #[default]
    Splitmix64,
    /// seed + repetition.
    Offset,
}

impl SeedScheme {
    pub fn seed(self, base: u64, rep: u64) -> u64 {
        match self {
            SeedScheme::Splitmix64 => split_seed(base, rep),
            SeedScheme::Offset => base.wrapping_add(rep),
        }
    }
}

fn one() -> u64 {
    1
}

fn default_max_sweeps() -> u64 {
    DEFAULT_MAX_SWEEPS
}

fn default_par_max_sweeps() -> u64 {
    PARALLEL_SWEEP_CAP
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// A generator family name, or `file` to sweep solvers over one
    /// instance file.
    pub family: String,
    /// Instance path for the `file` family, relative to the spec file.
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub cost_quantum: Option<f64>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default = "one")]
    pub repetitions: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub seed_scheme: SeedScheme,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: u64,
    #[serde(default = "default_par_max_sweeps")]
    pub par_max_sweeps: u64,
    #[serde(default)]
    pub brute_step: Option<f64>,
    #[serde(default = "default_budget")]
    pub brute_budget: u64,
}

/// One CSV row. Parameters a family ignores are left empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub algorithm: String,
    pub seed: Option<u64>,
    pub m: usize,
    pub kappa: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: f64,
    pub utility: Option<f64>,
    pub iterations: Option<u64>,
    pub converged: Option<bool>,
    pub wall_ms: Option<f64>,
    pub error: String,
}

enum Source {
    Generated(Family),
    File(Instance),
}

/// Parameters of one (value, repetition) cell.
struct Cell {
    index: usize,
    rep: u64,
    gen: GenSpec,
}

fn check_spec(spec: &ExperimentSpec) -> Result<(), ExperimentError> {
    let bad = |msg: String| Err(ExperimentError::Spec(msg));
    if spec.algorithms.is_empty() {
        return bad("no algorithms listed".into());
    }
    if spec.repetitions == 0 {
        return bad("repetitions must be positive".into());
    }
    if let Some(sweep) = &spec.sweep {
        if sweep.values.is_empty() {
            return bad("sweep has no values".into());
        }
        if spec.family == "file" {
            return bad("the file family cannot sweep generator parameters".into());
        }
        if sweep.param == SweepParam::M {
            if let Some(v) = sweep.values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
                return bad(format!("m values must be positive integers, got {v}"));
            }
        }
    }
    if spec.family == "file" {
        if spec.instance.is_none() {
            return bad("the file family needs `instance`".into());
        }
        if spec.repetitions != 1 {
            return bad("the file family takes a single repetition".into());
        }
    } else if spec.instance.is_some() {
        return bad("`instance` only applies to the file family".into());
    }
    Ok(())
}

fn source(spec: &ExperimentSpec, base_dir: &Path) -> Result<Source, ExperimentError> {
    if spec.family == "file" {
        let rel = spec.instance.as_ref().expect("checked");
        return Ok(Source::File(load_instance(base_dir.join(rel))?));
    }
    Family::parse(&spec.family)
        .map(Source::Generated)
        .ok_or_else(|| ExperimentError::Spec(format!("unknown family `{}`", spec.family)))
}

fn cells(spec: &ExperimentSpec, family: Family) -> Vec<Cell> {
    let mut base = GenSpec::new(family);
    if let Some(m) = spec.m {
        base.m = m;
    }
    if let Some(k) = spec.kappa {
        base.kappa = k;
    }
    if let Some(a) = spec.alpha {
        base.alpha = a;
    }
    if let Some(g) = spec.gamma {
        base.gamma = g;
    }
    base.cost_quantum = spec.cost_quantum;

    let values: Vec<Option<f64>> = match &spec.sweep {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut out = Vec::new();
    for (index, value) in values.into_iter().enumerate() {
        for rep in 0..spec.repetitions {
            let mut gen = base.clone();
            if let (Some(v), Some(sweep)) = (value, &spec.sweep) {
                match sweep.param {
                    SweepParam::M => gen.m = v as usize,
                    SweepParam::Kappa => gen.kappa = v,
                    SweepParam::Alpha => gen.alpha = v,
                    SweepParam::Gamma => gen.gamma = v,
                }
            }
            gen.seed = spec.seed_scheme.seed(spec.seed, rep);
            out.push(Cell { index, rep, gen });
        }
    }
    out
}

fn cell_name(index: usize, rep: u64) -> String {
    format!("v{index:03}-r{rep:03}")
}

/// Runs every algorithm on one instance, writing artifacts under `out_dir`.
fn run_cell(
    spec: &ExperimentSpec,
    inst: Result<Instance, String>,
    template: ExperimentRecord,
    name: &str,
    out_dir: &Path,
) -> Vec<ExperimentRecord> {
    let failed = |alg: Algorithm, error: String| ExperimentRecord {
        algorithm: alg.name().into(),
        error,
        ..template.clone()
    };
    let inst = match inst {
        Ok(inst) => inst,
        Err(e) => return spec.algorithms.iter().map(|&a| failed(a, e.clone())).collect(),
    };
    let inst_file = format!("{name}.json");
    if let Err(e) = save_instance(&inst, out_dir.join("instances").join(&inst_file)) {
        return spec.algorithms.iter().map(|&a| failed(a, e.to_string())).collect();
    }
    let opts = SolveOptions {
        step: spec.brute_step,
        max_sweeps: spec.max_sweeps,
        par_max_sweeps: spec.par_max_sweeps,
        budget: spec.brute_budget as u128,
        init: None,
    };
    spec.algorithms
        .iter()
        .map(|&alg| match run_algorithm(&inst, alg, &opts) {
            Ok(res) => {
                let record = PolicyRecord {
                    pi: res.policy.values().to_vec(),
                    utility: Some(res.utility),
                    algorithm: Some(alg.name().into()),
                    instance: Some(format!("../instances/{inst_file}")),
                };
                let path = out_dir.join("policies").join(format!("{name}-{alg}.json"));
                let error = save_policy(&record, path).err().map(|e| e.to_string()).unwrap_or_default();
                ExperimentRecord {
                    algorithm: alg.name().into(),
                    m: inst.m(),
                    utility: Some(res.utility),
                    iterations: Some(res.iterations),
                    converged: Some(res.converged),
                    wall_ms: Some(res.wall_ms),
                    error,
                    ..template.clone()
                }
            }
            Err(e) => failed(alg, e.to_string()),
        })
        .collect()
}

fn validated(inst: Instance) -> Result<Instance, String> {
    let v = validate_instance(&inst, DEFAULT_TOL);
    let first = v.errors().next().map(|d| format!("invalid instance: {}", d.message));
    match first {
        None => Ok(inst),
        Some(e) => Err(e),
    }
}

/// Runs the sweep and writes `results.csv`, `instances/` and `policies/`
/// under `out_dir`. Instance files named by the spec resolve against
/// `base_dir`.
pub fn run_experiment(
    spec: &ExperimentSpec,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    check_spec(spec)?;
    let source = source(spec, base_dir)?;
    for sub in ["instances", "policies"] {
        let dir = out_dir.join(sub);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    }

    let records: Vec<ExperimentRecord> = match source {
        Source::File(inst) => {
            let template = ExperimentRecord {
                algorithm: String::new(),
                seed: inst.meta.get("seed").and_then(|v| v.as_u64()),
                m: inst.m(),
                kappa: inst.meta.get("kappa").and_then(|v| v.as_f64()),
                alpha: inst.meta.get("alpha").and_then(|v| v.as_f64()),
                gamma: inst.gamma,
                utility: None,
                iterations: None,
                converged: None,
                wall_ms: None,
                error: String::new(),
            };
            run_cell(spec, validated(inst), template, &cell_name(0, 0), out_dir)
        }
        Source::Generated(family) => {
            let uses_kappa = matches!(family, Family::Random1d | Family::AdditiveMonotonic);
            cells(spec, family)
                .into_par_iter()
                .map(|cell| {
                    let g = &cell.gen;
                    let template = ExperimentRecord {
                        algorithm: String::new(),
                        seed: uses_kappa.then_some(g.seed),
                        m: g.m,
                        kappa: uses_kappa.then_some(g.kappa),
                        alpha: (!uses_kappa).then_some(g.alpha),
                        gamma: g.gamma,
                        utility: None,
                        iterations: None,
                        converged: None,
                        wall_ms: None,
                        error: String::new(),
                    };
                    let inst = g.generate().map_err(|e| e.to_string()).and_then(validated);
                    run_cell(spec, inst, template, &cell_name(cell.index, cell.rep), out_dir)
                })
                .flatten()
                .collect()
        }
    };

    let path = out_dir.join("results.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for r in &records {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(records)
}

/// Reads a spec file, reporting the JSON path of any bad field.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let at = e.path().to_string();
        ExperimentError::Spec(format!("{}: at `{at}`: {}", path.display(), e.into_inner()))
    })
}
