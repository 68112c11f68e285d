//! Decision policies for populations that strategically best-respond.
//!
//! Individuals at feature value `i` move to whichever value `k` maximizes
//! `pi[k] - cost(i, k)`; the decision maker picks `pi` to maximize expected
//! profit on the induced population. This crate holds the population model,
//! the best-response semantics, the transport view of that response, exact and
//! heuristic policy solvers, and seeded instance generators.

pub mod error;
pub mod generators;
pub mod model;
pub mod response;
pub mod solvers;
pub mod transport;

pub use error::ModelError;
pub use model::{
    canonicalize, cost_profile, validate_instance, CostMatrix, CostProfile, Diagnostic,
    DiagnosticKind, Instance, Outcome, Policy, Severity, Validation, DEFAULT_TOL,
};
pub use response::{
    best_response, best_response_omb, induced_distribution, non_strategic_policy,
    policy_family_report, utility, Evaluator, FamilyReport, ResponseProfile,
};
pub use solvers::{SolveError, SolveResult};
pub use transport::{check_transport_consistency, transport_plan, TransportPlan};

/// Formats a value with at most 12 decimals and no trailing zeros, so
/// accumulated rounding noise like `0.6600000000000001` prints as `0.66`.
pub fn fmt_value(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}
