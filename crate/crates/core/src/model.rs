//! Population model: feature-value masses, outcomes (or explicit rewards),
//! movement costs and decision policies.
//!
//! Feature values are indexed `0..m`. Costs are stored as a dense row-major
//! matrix where `cost(i, j)` is what an individual at `i` pays to present
//! feature value `j`; `f64::INFINITY` marks moves that are impossible.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde_json::{Map, Value};

use crate::error::ModelError;

/// Default absolute tolerance for comparisons that gate behavior.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Masses must sum to one within this bound.
pub const MASS_TOL: f64 = 1e-12;

/// Free-form provenance attached to an instance.
pub type Meta = Map<String, Value>;

/// Per-feature-value outcome description.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    /// `P(y = 1 | x_i)`; the reward of accepting `x_i` is `q_i - gamma`.
    Probabilities(Vec<f64>),
    /// Explicit per-acceptance rewards, for instances (such as hardness
    /// reductions) whose rewards are not of the form `q_i - gamma`.
    Rewards(Vec<f64>),
}

impl Outcome {
    pub fn len(&self) -> usize {
        match self {
            Outcome::Probabilities(v) | Outcome::Rewards(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Dense `m x m` cost matrix with `+inf` for forbidden moves.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    m: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    /// Matrix with zero diagonal and every off-diagonal move forbidden.
    pub fn unreachable(m: usize) -> Self {
        let mut data = vec![f64::INFINITY; m * m];
        for i in 0..m {
            data[i * m + i] = 0.0;
        }
        CostMatrix { m, data }
    }

    pub fn zeros(m: usize) -> Self {
        CostMatrix {
            m,
            data: vec![0.0; m * m],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let m = rows.len();
        let mut data = Vec::with_capacity(m * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::Shape(format!(
                    "cost row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(CostMatrix { m, data })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.m + to]
    }

    #[inline]
    pub fn set(&mut self, from: usize, to: usize, value: f64) {
        self.data[from * self.m + to] = value;
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.data[from * self.m..(from + 1) * self.m]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| self.row(i).to_vec()).collect()
    }

    /// Relabels rows and columns so that new index `k` is old index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.m;
        let mut out = CostMatrix::zeros(m);
        for (a, &i) in perm.iter().enumerate() {
            for (b, &j) in perm.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }
}

/// A population of individuals over `m` discrete feature values.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    /// Mass `P(x_i)` of each feature value.
    pub p: Vec<f64>,
    pub outcome: Outcome,
    /// Cost of a positive decision, in units of favorable outcomes.
    pub gamma: f64,
    pub cost: CostMatrix,
    pub meta: Meta,
}

impl Instance {
    /// Instance in outcome form (`reward_i = q_i - gamma`).
    pub fn new(p: Vec<f64>, q: Vec<f64>, gamma: f64, cost: CostMatrix) -> Self {
        Instance {
            p,
            outcome: Outcome::Probabilities(q),
            gamma,
            cost,
            meta: Meta::new(),
        }
    }

    /// Instance with an explicit reward vector.
    pub fn with_rewards(p: Vec<f64>, rewards: Vec<f64>, gamma: f64, cost: CostMatrix) -> Self {
        Instance {
            p,
            outcome: Outcome::Rewards(rewards),
            gamma,
            cost,
            meta: Meta::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn q(&self) -> Option<&[f64]> {
        match &self.outcome {
            Outcome::Probabilities(q) => Some(q),
            Outcome::Rewards(_) => None,
        }
    }

    #[inline]
    pub fn reward(&self, i: usize) -> f64 {
        match &self.outcome {
            Outcome::Probabilities(q) => q[i] - self.gamma,
            Outcome::Rewards(r) => r[i],
        }
    }

    pub fn rewards(&self) -> Vec<f64> {
        (0..self.m()).map(|i| self.reward(i)).collect()
    }

    /// Quantity that orders feature values by outcome: `q` when present,
    /// otherwise the reward (which is `q - gamma` up to a shift).
    #[inline]
    pub fn outcome_key(&self, i: usize) -> f64 {
        match &self.outcome {
            Outcome::Probabilities(q) => q[i],
            Outcome::Rewards(r) => r[i],
        }
    }

    pub fn outcome_keys(&self) -> Vec<f64> {
        (0..self.m()).map(|i| self.outcome_key(i)).collect()
    }

    /// Indices sorted by non-increasing outcome, stable on ties.
    pub fn outcome_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.m()).collect();
        order.sort_by(|&a, &b| self.outcome_key(b).total_cmp(&self.outcome_key(a)));
        order
    }

    /// Whether indices are already in non-increasing outcome order.
    pub fn is_canonical(&self) -> bool {
        (1..self.m()).all(|i| self.outcome_key(i - 1) >= self.outcome_key(i))
    }

    /// Relabels feature values so that new index `k` is old index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let pick = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let outcome = match &self.outcome {
            Outcome::Probabilities(q) => Outcome::Probabilities(pick(q)),
            Outcome::Rewards(r) => Outcome::Rewards(pick(r)),
        };
        Instance {
            p: pick(&self.p),
            outcome,
            gamma: self.gamma,
            cost: self.cost.permuted(perm),
            meta: self.meta.clone(),
        }
    }
}

/// Acceptance probability per feature value.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy(Vec<f64>);

impl Policy {
    pub fn new(values: Vec<f64>) -> Self {
        Policy(values)
    }

    pub fn zeros(m: usize) -> Self {
        Policy(vec![0.0; m])
    }

    pub fn constant(m: usize, value: f64) -> Self {
        Policy(vec![value; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Inverse of [`Instance::permuted`]: maps a policy over the relabeled
    /// instance back to the original labels.
    pub fn unpermuted(&self, perm: &[usize]) -> Self {
        let mut out = vec![0.0; self.0.len()];
        for (k, &i) in perm.iter().enumerate() {
            out[i] = self.0[k];
        }
        Policy(out)
    }

    /// Deterministic rule `1(pi >= threshold)`.
    pub fn thresholded(&self, threshold: f64) -> Self {
        Policy(
            self.0
                .iter()
                .map(|&v| if v >= threshold { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

impl Index<usize> for Policy {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Policy {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for Policy {
    fn from(v: Vec<f64>) -> Self {
        Policy(v)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", crate::fmt_value(*v))?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Shape,
    NonFinite,
    MassNegative,
    MassSum,
    OutcomeRange,
    GammaRange,
    CostDiagonal,
    CostNegative,
    /// Improving (or level) moves must have strictly positive cost.
    FreeImprovement,
    Triangle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Outcome of [`validate_instance`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Validation {
    pub diagnostics: Vec<Diagnostic>,
}

impl Validation {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Warning)
    }

    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn has(&self, kind: DiagnosticKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }

    fn push(&mut self, severity: Severity, kind: DiagnosticKind, message: String) {
        self.diagnostics.push(Diagnostic {
            severity,
            kind,
            message,
        });
    }
}

/// Checks the instance invariants and the cost assumptions.
///
/// Triangle-inequality violations are warnings. Zero-cost improving moves
/// are errors for outcome-form instances and warnings for reward-form ones,
/// whose constructions may rely on them.
pub fn validate_instance(inst: &Instance, tol: f64) -> Validation {
    use DiagnosticKind::*;
    use Severity::*;

    let mut out = Validation::default();
    let m = inst.m();
    if m == 0 {
        out.push(Error, Shape, "instance has no feature values".into());
        return out;
    }
    if inst.outcome.len() != m || inst.cost.size() != m {
        out.push(
            Error,
            Shape,
            format!(
                "inconsistent sizes: {m} masses, {} outcomes, {}x{} costs",
                inst.outcome.len(),
                inst.cost.size(),
                inst.cost.size()
            ),
        );
        return out;
    }

    if inst.p.iter().any(|v| !v.is_finite()) {
        out.push(Error, NonFinite, "mass vector has non-finite entries".into());
    }
    if let Some(i) = inst.p.iter().position(|&v| v < 0.0) {
        out.push(
            Error,
            MassNegative,
            format!("mass of feature value {i} is negative ({})", inst.p[i]),
        );
    }
    let total: f64 = inst.p.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        out.push(Error, MassSum, format!("mass sums to {total}"));
    }

    match &inst.outcome {
        Outcome::Probabilities(q) => {
            if let Some(i) = q.iter().position(|v| !(0.0..=1.0).contains(v)) {
                out.push(
                    Error,
                    OutcomeRange,
                    format!("outcome of feature value {i} is outside [0, 1] ({})", q[i]),
                );
            }
        }
        Outcome::Rewards(r) => {
            if r.iter().any(|v| !v.is_finite()) {
                out.push(Error, NonFinite, "reward vector has non-finite entries".into());
            }
        }
    }
    if !(inst.gamma > 0.0 && inst.gamma < 1.0) {
        out.push(
            Error,
            GammaRange,
            format!("gamma must lie in (0, 1), got {}", inst.gamma),
        );
    }

    let cost = &inst.cost;
    for i in 0..m {
        if cost.get(i, i) != 0.0 {
            out.push(
                Error,
                CostDiagonal,
                format!("cost({i},{i}) must be zero, got {}", cost.get(i, i)),
            );
        }
        for j in 0..m {
            let c = cost.get(i, j);
            if c.is_nan() || c < 0.0 || c == f64::NEG_INFINITY {
                out.push(
                    Error,
                    CostNegative,
                    format!("cost({i},{j}) must be non-negative, got {c}"),
                );
            }
        }
    }

    let free_severity = match inst.outcome {
        Outcome::Probabilities(_) => Error,
        Outcome::Rewards(_) => Warning,
    };
    let mut free_count = 0usize;
    let mut first_free = None;
    for i in 0..m {
        for j in 0..m {
            if i != j && inst.reward(j) >= inst.reward(i) && cost.get(i, j) <= tol {
                free_count += 1;
                first_free.get_or_insert((i, j));
            }
        }
    }
    if let Some((i, j)) = first_free {
        out.push(
            free_severity,
            FreeImprovement,
            format!(
                "{free_count} non-worsening move(s) have zero cost, e.g. cost({i},{j}) = {}",
                cost.get(i, j)
            ),
        );
    }

    if let Some((count, (i, k, j))) = triangle_violations(cost, tol) {
        out.push(
            Warning,
            Triangle,
            format!(
                "{count} triangle-inequality violation(s), e.g. cost({i},{j}) = {} > cost({i},{k}) + cost({k},{j}) = {}",
                cost.get(i, j),
                cost.get(i, k) + cost.get(k, j)
            ),
        );
    }
    out
}

fn triangle_violations(cost: &CostMatrix, tol: f64) -> Option<(usize, (usize, usize, usize))> {
    let m = cost.size();
    let mut count = 0;
    let mut first = None;
    for i in 0..m {
        for k in 0..m {
            let cik = cost.get(i, k);
            if !cik.is_finite() {
                continue;
            }
            for j in 0..m {
                let via = cik + cost.get(k, j);
                if cost.get(i, j) > via + tol {
                    count += 1;
                    first.get_or_insert((i, k, j));
                }
            }
        }
    }
    first.map(|f| (count, f))
}

/// Relabels the instance by non-increasing outcome. Returns the relabeled
/// instance and `perm` with `perm[new] = old`.
pub fn canonicalize(inst: &Instance) -> Result<(Instance, Vec<usize>), ModelError> {
    if inst.q().is_none() {
        return Err(ModelError::NoOutcomes);
    }
    let perm = inst.outcome_order();
    Ok((inst.permuted(&perm), perm))
}

/// Structural classification of a cost matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostProfile {
    pub triangle: bool,
    pub additive: bool,
    pub outcome_monotonic: bool,
    pub positive_improvement: bool,
    pub tolerance: f64,
}

/// Classifies the cost matrix relative to the instance's outcome order.
///
/// `additive` requires exact additivity along every chain that is
/// monotone in the outcome order, plus the triangle inequality.
/// `outcome_monotonic` requires: improving further costs strictly more,
/// worsening is free, and non-worsening moves are never free.
pub fn cost_profile(inst: &Instance, tol: f64) -> CostProfile {
    let m = inst.m();
    let cost = &inst.cost;
    let key = inst.outcome_keys();
    let triangle = triangle_violations(cost, tol).is_none();

    let close = |a: f64, b: f64| {
        if a.is_infinite() || b.is_infinite() {
            a == b
        } else {
            (a - b).abs() <= tol
        }
    };

    // Positions along the outcome order, highest outcome first.
    let order = inst.outcome_order();
    let mut chain_additive = true;
    'outer: for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let (hi, mid, lo) = (order[a], order[b], order[c]);
                let up = close(cost.get(lo, hi), cost.get(lo, mid) + cost.get(mid, hi));
                let down = close(cost.get(hi, lo), cost.get(hi, mid) + cost.get(mid, lo));
                if !(up && down) {
                    chain_additive = false;
                    break 'outer;
                }
            }
        }
    }

    let mut positive_improvement = true;
    let mut worsening_free = true;
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let c = cost.get(i, j);
            if key[j] >= key[i] {
                if c <= tol {
                    positive_improvement = false;
                }
            } else if c > tol {
                worsening_free = false;
            }
        }
    }

    let mut chains_monotone = true;
    'mono: for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                if i == j || j == k || i == k {
                    continue;
                }
                // Source i climbs to j or further to k.
                if key[i] < key[j] && key[j] < key[k] && cost.get(i, j) >= cost.get(i, k) - tol {
                    chains_monotone = false;
                    break 'mono;
                }
                // Destination i reached from j or from further below, k.
                if key[i] > key[j] && key[j] > key[k] && cost.get(j, i) >= cost.get(k, i) - tol {
                    chains_monotone = false;
                    break 'mono;
                }
            }
        }
    }

    CostProfile {
        triangle,
        additive: triangle && chain_additive,
        outcome_monotonic: chains_monotone && worsening_free && positive_improvement,
        positive_improvement,
        tolerance: tol,
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn toy_instance_has_no_errors() {
        let v = validate_instance(&toy(), DEFAULT_TOL);
        assert!(v.is_valid(), "{:?}", v.diagnostics);
        // 1.2 > 0.3 + 0.3: reported, but only as a warning.
        assert!(v.has(DiagnosticKind::Triangle));
    }

    #[test]
    fn mass_sum_violation() {
        let inst = Instance::new(vec![0.5, 0.6], vec![0.4, 0.9], 0.1, CostMatrix::unreachable(2));
        let v = validate_instance(&inst, DEFAULT_TOL);
        let err = v.errors().find(|d| d.kind == DiagnosticKind::MassSum).unwrap();
        assert_eq!(err.message, "mass sums to 1.1");
    }

    #[test]
    fn free_improvement_is_an_error_for_outcome_instances() {
        let mut cost = CostMatrix::unreachable(2);
        cost.set(0, 1, 0.0);
        let inst = Instance::new(vec![0.5, 0.5], vec![0.4, 0.9], 0.1, cost.clone());
        let v = validate_instance(&inst, DEFAULT_TOL);
        assert!(!v.is_valid());
        assert!(v.has(DiagnosticKind::FreeImprovement));

        let inst = Instance::with_rewards(vec![0.5, 0.5], vec![0.3, 0.8], 0.1, cost);
        let v = validate_instance(&inst, DEFAULT_TOL);
        assert!(v.is_valid());
        assert!(v.has(DiagnosticKind::FreeImprovement));
    }

    #[test]
    fn range_and_diagonal_errors() {
        let mut cost = CostMatrix::unreachable(2);
        cost.set(1, 1, 0.5);
        cost.set(0, 1, -1.0);
        let inst = Instance::new(vec![0.5, 0.5], vec![1.5, 0.2], 1.0, cost);
        let v = validate_instance(&inst, DEFAULT_TOL);
        for kind in [
            DiagnosticKind::OutcomeRange,
            DiagnosticKind::GammaRange,
            DiagnosticKind::CostDiagonal,
            DiagnosticKind::CostNegative,
        ] {
            assert!(v.has(kind), "missing {kind:?}");
        }
    }

    #[test]
    fn canonical_order() {
        let inst = Instance::new(
            vec![0.2, 0.3, 0.5],
            vec![0.4, 1.0, 0.7],
            0.1,
            CostMatrix::unreachable(3),
        );
        let (c, perm) = canonicalize(&inst).unwrap();
        assert_eq!(perm, vec![1, 2, 0]);
        assert_eq!(c.q().unwrap(), &[1.0, 0.7, 0.4]);
        assert_eq!(c.p, vec![0.3, 0.5, 0.2]);

        let (_, perm) = canonicalize(&toy()).unwrap();
        assert_eq!(perm, vec![0, 1, 2]);

        let tied = Instance::new(vec![0.5, 0.5], vec![0.5, 0.5], 0.1, CostMatrix::unreachable(2));
        assert_eq!(canonicalize(&tied).unwrap().1, vec![0, 1]);
    }

    #[test]
    fn canonicalize_permutes_costs() {
        let mut cost = CostMatrix::unreachable(3);
        cost.set(0, 1, 0.25);
        cost.set(2, 0, 0.75);
        let inst = Instance::new(vec![0.2, 0.3, 0.5], vec![0.4, 1.0, 0.7], 0.1, cost);
        let (c, perm) = canonicalize(&inst).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(c.cost.get(a, b), inst.cost.get(perm[a], perm[b]));
            }
        }
    }

    #[test]
    fn canonicalize_rejects_reward_form() {
        let inst = Instance::with_rewards(vec![1.0], vec![0.5], 0.1, CostMatrix::zeros(1));
        assert!(matches!(canonicalize(&inst), Err(ModelError::NoOutcomes)));
    }

    #[test]
    fn counterexample_costs_are_not_monotonic() {
        let prof = cost_profile(&counterexample(), DEFAULT_TOL);
        assert!(!prof.outcome_monotonic);
        let prof = cost_profile(&toy(), DEFAULT_TOL);
        assert!(prof.outcome_monotonic);
        assert!(!prof.triangle);
        assert!(!prof.additive);
    }

    #[test]
    fn zero_costs_have_no_positive_improvement() {
        let inst = Instance::new(
            vec![0.5, 0.5],
            vec![0.9, 0.5],
            0.2,
            CostMatrix::zeros(2),
        );
        let prof = cost_profile(&inst, DEFAULT_TOL);
        assert!(!prof.positive_improvement);
        assert!(!prof.outcome_monotonic);
        assert!(prof.triangle);
    }

    #[test]
    fn additive_chain_is_detected() {
        // potentials 1.0 > 0.6 > 0.0 along the outcome order
        let phi = [1.0, 0.6, 0.0];
        let mut cost = CostMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..i {
                cost.set(i, j, phi[j] - phi[i]);
            }
        }
        let inst = Instance::new(vec![0.3, 0.3, 0.4], vec![0.9, 0.6, 0.3], 0.15, cost);
        let prof = cost_profile(&inst, DEFAULT_TOL);
        assert!(prof.additive && prof.triangle && prof.outcome_monotonic);
    }

    #[test]
    fn policy_permutation_round_trip() {
        let perm = vec![2, 0, 1];
        let pol = Policy::new(vec![0.1, 0.2, 0.3]);
        let back = pol.unpermuted(&perm);
        assert_eq!(back.values(), &[0.2, 0.3, 0.1]);
    }
}
