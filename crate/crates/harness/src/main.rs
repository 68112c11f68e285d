//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input (unreadable or
//! malformed files, failed validation, unmet solver preconditions), 3 search
//! budget exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand};
use stratpol::generators::{
    decode_assignment, from_sat, rewarded_values, Family, GenError, GenSpec, DEFAULT_EPSILON,
};
use stratpol::response::validate_policy;
use stratpol::solvers::{brute_force_binary, DEFAULT_BUDGET, DEFAULT_MAX_SWEEPS, PARALLEL_SWEEP_CAP};
use stratpol::{
    check_transport_consistency, cost_profile, fmt_value, transport_plan, utility,
    validate_instance, Instance, ModelError, Policy, SolveError, DEFAULT_TOL,
};
use stratpol_harness::{
    format_assignment, instance_json, load_instance, load_policy, load_spec, parse_dimacs,
    run_algorithm, run_experiment, save_instance, save_policy, Algorithm, DimacsError,
    ExperimentError, FileError, PolicyRecord, SolveOptions,
};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "stratpol", version, about = "Decision policies for strategically responding populations")]
struct Cli {
    /// Worker threads for parallel solvers and sweeps.
    #[arg(long, global = true, env = "STRATPOL_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and report its cost structure.
    Validate {
        file: PathBuf,
    },
    /// Compute a policy for an instance.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum)]
        alg: Algorithm,
        /// Grid step for brute force; defaults to the costs' common step.
        #[arg(long)]
        step: Option<f64>,
        /// Sweep limit for coordinate search.
        #[arg(long)]
        max_sweeps: Option<u64>,
        /// Largest number of policies brute force may enumerate.
        #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
        budget: u64,
        /// Starting policy file for coordinate search.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Write the policy and its utility to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic instance.
    Gen {
        #[arg(value_parser = PossibleValuesParser::new(Family::ALL.map(Family::name)))]
        family: String,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 0.75)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Defaults to the family's usual decision cost.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Round additive costs to multiples of this quantum.
        #[arg(long)]
        cost_quantum: Option<f64>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a JSON spec.
    Experiment {
        spec: PathBuf,
        /// Directory for results.csv, instances/ and policies/.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the transport plan of a policy and check it against the
    /// induced distribution.
    Transport {
        file: PathBuf,
        policy: PathBuf,
    },
    /// Build the policy-search instance for a DIMACS CNF formula.
    Sat {
        cnf: PathBuf,
        /// Search binary policies over the rewarded values.
        #[arg(long)]
        solve: bool,
        /// Read a truth assignment off the policy.
        #[arg(long)]
        decode: bool,
        /// Policy to decode instead of solving.
        #[arg(long, conflicts_with = "solve")]
        policy: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
        budget: u64,
        /// Write the instance to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Budget(_) => 3,
        }
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<DimacsError> for Failure {
    fn from(e: DimacsError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::InvalidParam(_) => Failure::Usage(e.to_string()),
            GenError::InvalidFormula(_) => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            SolveError::InvalidStep(_) => Failure::Usage(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Loads an instance and refuses it if validation finds errors.
fn load_valid(path: &Path) -> Result<Instance, Failure> {
    let inst = load_instance(path)?;
    let v = validate_instance(&inst, DEFAULT_TOL);
    if v.is_valid() {
        return Ok(inst);
    }
    let msgs: Vec<String> = v.errors().map(ToString::to_string).collect();
    Err(Failure::Invalid(format!("{}: {}", path.display(), msgs.join("; "))))
}

fn cmd_validate(file: &Path) -> CliResult {
    let inst = load_instance(file)?;
    let v = validate_instance(&inst, DEFAULT_TOL);
    for d in &v.diagnostics {
        println!("{d}");
    }
    let form = if inst.q().is_some() { "outcome" } else { "reward" };
    println!("m: {}, {form} form, gamma {}", inst.m(), fmt_value(inst.gamma));
    if v.is_valid() {
        let prof = cost_profile(&inst, DEFAULT_TOL);
        println!(
            "costs: triangle {}, additive {}, outcome-monotonic {}",
            yes_no(prof.triangle),
            yes_no(prof.additive),
            yes_no(prof.outcome_monotonic)
        );
        println!("valid");
        Ok(())
    } else {
        Err(Failure::Invalid(format!(
            "{}: {} error(s)",
            file.display(),
            v.errors().count()
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    file: &Path,
    alg: Algorithm,
    step: Option<f64>,
    max_sweeps: Option<u64>,
    budget: u64,
    init: Option<&Path>,
    output: Option<&Path>,
) -> CliResult {
    let inst = load_valid(file)?;
    let init = init.map(load_policy).transpose()?;
    if let Some(p) = &init {
        validate_policy(&inst, p)?;
    }
    let default_sweeps = match alg {
        Algorithm::ParIter => PARALLEL_SWEEP_CAP,
        _ => DEFAULT_MAX_SWEEPS,
    };
    let sweeps = max_sweeps.unwrap_or(default_sweeps);
    let opts = SolveOptions {
        step,
        max_sweeps: sweeps,
        par_max_sweeps: sweeps,
        budget: budget as u128,
        init,
    };
    let res = run_algorithm(&inst, alg, &opts)?;
    println!("algorithm: {alg}");
    println!("policy: {}", res.policy);
    println!("utility: {}", fmt_value(res.utility));
    println!("iterations: {}", res.iterations);
    println!("converged: {}", res.converged);
    println!("approximate: {}", res.approximate);
    println!("wall_ms: {:.3}", res.wall_ms);
    if let Some(out) = output {
        let record = PolicyRecord {
            pi: res.policy.values().to_vec(),
            utility: Some(res.utility),
            algorithm: Some(alg.name().into()),
            instance: Some(file.display().to_string()),
        };
        save_policy(&record, out)?;
    }
    Ok(())
}

fn cmd_gen(spec: GenSpec, output: Option<&Path>) -> CliResult {
    let inst = spec.generate()?;
    match output {
        Some(path) => {
            save_instance(&inst, path)?;
            eprintln!("wrote {} ({} values)", path.display(), inst.m());
        }
        None => println!("{}", instance_json(&inst)),
    }
    Ok(())
}

fn cmd_experiment(spec_path: &Path, output: &Path) -> CliResult {
    let spec = load_spec(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let records = run_experiment(&spec, base, output)?;
    let failed = records.iter().filter(|r| !r.error.is_empty()).count();
    println!(
        "{} rows ({failed} failed) written to {}",
        records.len(),
        output.join("results.csv").display()
    );
    Ok(())
}

fn cmd_transport(file: &Path, policy: &Path) -> CliResult {
    let inst = load_valid(file)?;
    let pol = load_policy(policy)?;
    validate_policy(&inst, &pol)?;
    let plan = transport_plan(&inst, &pol);
    println!("flow:");
    for (i, row) in plan.rows().iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            if f > 0.0 {
                println!("  {i} -> {j}: {}", fmt_value(f));
            }
        }
    }
    println!("objective: {}", fmt_value(plan.objective));
    println!("utility: {}", fmt_value(utility(&inst, &pol)));
    let consistent = check_transport_consistency(&inst, &pol);
    println!("consistent: {}", yes_no(consistent));
    if consistent {
        Ok(())
    } else {
        Err(Failure::Invalid("plan marginals differ from the induced distribution".into()))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sat(
    cnf: &Path,
    solve: bool,
    decode: bool,
    policy: Option<&Path>,
    epsilon: f64,
    budget: u64,
    output: Option<&Path>,
) -> CliResult {
    if decode && !solve && policy.is_none() {
        return Err(Failure::Usage("--decode needs --solve or --policy".into()));
    }
    let text = std::fs::read_to_string(cnf)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", cnf.display())))?;
    let formula = parse_dimacs(&text)?;
    let inst = from_sat(&formula, epsilon)?;
    println!(
        "c {} variables, {} clauses, {} feature values",
        formula.num_vars,
        formula.clauses.len(),
        inst.m()
    );
    if let Some(path) = output {
        save_instance(&inst, path)?;
    }

    let pol = if solve {
        let free = rewarded_values(formula.num_vars);
        let res = brute_force_binary(&inst, &free, &Policy::zeros(inst.m()), budget as u128)?;
        println!("c utility {}", fmt_value(res.utility));
        Some(res.policy)
    } else if let Some(path) = policy {
        let p = load_policy(path)?;
        validate_policy(&inst, &p)?;
        println!("c utility {}", fmt_value(utility(&inst, &p)));
        Some(p)
    } else {
        None
    };

    if decode {
        let pol = pol.expect("checked above");
        match decode_assignment(&inst, &pol).filter(|a| formula.satisfied_by(a)) {
            Some(a) => {
                println!("s SATISFIABLE");
                println!("{}", format_assignment(&a));
            }
            // An optimal policy decodes whenever the formula is satisfiable;
            // an arbitrary policy proves nothing.
            None if solve => println!("s UNSATISFIABLE"),
            None => println!("s UNKNOWN"),
        }
    } else if let Some(pol) = pol {
        println!("c policy {pol}");
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Solve {
            file,
            alg,
            step,
            max_sweeps,
            budget,
            init,
            output,
        } => cmd_solve(&file, alg, step, max_sweeps, budget, init.as_deref(), output.as_deref()),
        Command::Gen {
            family,
            m,
            kappa,
            alpha,
            gamma,
            seed,
            cost_quantum,
            output,
        } => {
            let fam = Family::parse(&family).expect("clap restricts the family");
            let spec = GenSpec {
                family: fam,
                m,
                kappa,
                alpha,
                gamma: gamma.unwrap_or(fam.default_gamma()),
                cost_quantum,
                seed,
            };
            cmd_gen(spec, output.as_deref())
        }
        Command::Experiment { spec, output } => cmd_experiment(&spec, &output),
        Command::Transport { file, policy } => cmd_transport(&file, &policy),
        Command::Sat {
            cnf,
            solve,
            decode,
            policy,
            epsilon,
            budget,
            output,
        } => cmd_sat(&cnf, solve, decode, policy.as_deref(), epsilon, budget, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
