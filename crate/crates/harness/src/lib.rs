//! File formats, solver dispatch and experiment sweeps behind the
//! `stratpol` command-line tool.

pub mod dimacs;
pub mod experiment;
pub mod files;
pub mod solve;

pub use dimacs::{format_assignment, parse_dimacs, DimacsError};
pub use experiment::{
    load_spec, run_experiment, ExperimentError, ExperimentRecord, ExperimentSpec, SeedScheme,
    Sweep, SweepParam,
};
pub use files::{
    instance_json, load_instance, load_policy, load_policy_file, parse_instance, save_instance,
    save_policy, FileError, InstanceFile, PolicyFile, PolicyRecord,
};
pub use solve::{run_algorithm, Algorithm, SolveOptions};
