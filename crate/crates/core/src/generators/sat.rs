//! Reduction from CNF satisfiability to policy search.
//!
//! For `l` variables and `s` clauses the instance has `7l + s` feature
//! values laid out as `y_i, ybar_i, a_i, b_i, z1_i, z2_i, z3_i` (each block
//! of length `l`) followed by one value per clause. Only the `z` and clause
//! values carry mass; only `y`, `ybar`, `a`, `b` carry reward. A policy that
//! accepts exactly one of `y_i`, `ybar_i` for every variable and as many
//! clause-literals as possible encodes a satisfying assignment.

use serde_json::json;

use super::{meta, GenError};
use crate::model::{CostMatrix, Instance, Policy};

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Placeholder decision cost; rewards are explicit in these instances.
const SAT_GAMMA: f64 = 0.5;
/// Cost of edges that no policy value in [0, 1] can make attractive.
const INACTIVE: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    /// Literals as signed 1-based variable indices.
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, GenError> {
        let f = CnfFormula { num_vars, clauses };
        f.check()?;
        Ok(f)
    }

    pub fn check(&self) -> Result<(), GenError> {
        if self.clauses.is_empty() {
            return Err(GenError::InvalidFormula("formula has no clauses".into()));
        }
        for (c, clause) in self.clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(GenError::InvalidFormula(format!("clause {} is empty", c + 1)));
            }
            if let Some(&lit) = clause
                .iter()
                .find(|&&lit| lit == 0 || lit.unsigned_abs() as usize > self.num_vars)
            {
                return Err(GenError::InvalidFormula(format!(
                    "literal {lit} in clause {} is outside 1..={}",
                    c + 1,
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|&lit| assignment[lit.unsigned_abs() as usize - 1] == (lit > 0))
        })
    }

    /// Exhaustive satisfiability check; for small formulas only.
    pub fn is_satisfiable(&self) -> bool {
        let l = self.num_vars;
        (0u64..1 << l).any(|bits| {
            let a: Vec<bool> = (0..l).map(|v| bits >> v & 1 == 1).collect();
            self.satisfied_by(&a)
        })
    }
}

struct Layout {
    l: usize,
}

impl Layout {
    fn y(&self, i: usize) -> usize {
        i
    }
    fn ybar(&self, i: usize) -> usize {
        self.l + i
    }
    fn a(&self, i: usize) -> usize {
        2 * self.l + i
    }
    fn b(&self, i: usize) -> usize {
        3 * self.l + i
    }
    fn z(&self, kind: usize, i: usize) -> usize {
        (4 + kind) * self.l + i
    }
    fn clause(&self, c: usize) -> usize {
        7 * self.l + c
    }
}

/// Builds the reduction instance for `formula`.
///
/// Masses keep the reduction's ratios (`3(s+1)` for each `z1`, 1 for every
/// `z2`, `z3` and clause) normalized by their actual total.
pub fn from_sat(formula: &CnfFormula, epsilon: f64) -> Result<Instance, GenError> {
    formula.check()?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(GenError::InvalidParam(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let l = formula.num_vars;
    let s = formula.clauses.len();
    let at = Layout { l };
    let m = 7 * l + s;
    let heavy = 3.0 * (s as f64 + 1.0);
    let total = heavy * l as f64 + 2.0 * l as f64 + s as f64;

    let mut p = vec![0.0; m];
    let mut reward = vec![0.0; m];
    for i in 0..l {
        p[at.z(0, i)] = heavy / total;
        p[at.z(1, i)] = 1.0 / total;
        p[at.z(2, i)] = 1.0 / total;
        reward[at.y(i)] = 1.0;
        reward[at.ybar(i)] = 1.0;
        reward[at.a(i)] = 2.0 * (s as f64 + 1.0);
        reward[at.b(i)] = 2.0 * (s as f64 + 1.0);
    }
    for c in 0..s {
        p[at.clause(c)] = 1.0 / total;
    }

    let mut cost = CostMatrix::unreachable(m);
    for i in 0..l {
        for j in 0..l {
            let own = i == j;
            let z1 = at.z(0, i);
            let z2 = at.z(1, i);
            let z3 = at.z(2, i);
            let pick = |c: f64| if own { c } else { INACTIVE };
            cost.set(z1, at.y(j), pick(0.0));
            cost.set(z1, at.ybar(j), pick(0.0));
            cost.set(z1, at.a(j), INACTIVE);
            cost.set(z1, at.b(j), INACTIVE);
            cost.set(z2, at.y(j), pick(0.0));
            cost.set(z2, at.a(j), pick(1.0 - epsilon));
            cost.set(z2, at.ybar(j), INACTIVE);
            cost.set(z2, at.b(j), INACTIVE);
            cost.set(z3, at.ybar(j), pick(0.0));
            cost.set(z3, at.b(j), pick(1.0 - epsilon));
            cost.set(z3, at.y(j), INACTIVE);
            cost.set(z3, at.a(j), INACTIVE);
        }
    }
    for (c, clause) in formula.clauses.iter().enumerate() {
        let k = at.clause(c);
        for j in 0..l {
            cost.set(k, at.y(j), INACTIVE);
            cost.set(k, at.ybar(j), INACTIVE);
            cost.set(k, at.a(j), INACTIVE);
            cost.set(k, at.b(j), INACTIVE);
        }
        for &lit in clause {
            let v = lit.unsigned_abs() as usize - 1;
            let dest = if lit > 0 { at.y(v) } else { at.ybar(v) };
            cost.set(k, dest, 0.0);
        }
    }

    let mut labels = Vec::with_capacity(m);
    for prefix in ["y", "ybar", "a", "b", "z1", "z2", "z3"] {
        labels.extend((1..=l).map(|i| format!("{prefix}{i}")));
    }
    labels.extend((1..=s).map(|c| format!("k{c}")));

    let mut inst = Instance::with_rewards(p, reward, SAT_GAMMA, cost);
    inst.meta = meta(
        "sat",
        &[
            ("sat_num_vars", json!(l)),
            ("sat_num_clauses", json!(s)),
            ("epsilon", json!(epsilon)),
            ("labels", json!(labels)),
        ],
    );
    Ok(inst)
}

/// Indices of the `y`, `ybar`, `a` and `b` values, the only ones with
/// positive reward.
pub fn rewarded_values(num_vars: usize) -> Vec<usize> {
    (0..4 * num_vars).collect()
}

/// Reads `v_i = pi(y_i) >= 0.5`. Returns `None` unless the instance came
/// from [`from_sat`] and every pair `pi(y_i)`, `pi(ybar_i)` is complementary.
pub fn decode_assignment(inst: &Instance, pol: &Policy) -> Option<Vec<bool>> {
    let l = inst.meta.get("sat_num_vars")?.as_u64()? as usize;
    if pol.len() != inst.m() || inst.m() < 7 * l {
        return None;
    }
    let at = Layout { l };
    (0..l)
        .map(|i| {
            let (y, ybar) = (pol[at.y(i)], pol[at.ybar(i)]);
            ((y + ybar - 1.0).abs() <= 1e-9).then_some(y >= 0.5)
        })
        .collect()
}
