//! Best response as an optimal transport of mass.
//!
//! The transport objective `sum_ij f_ij (pi_j - c_ij)` only couples a row to
//! its own mass constraint, so sending each row's whole mass to that row's
//! best-response target is optimal.

use crate::model::{Instance, Policy, DEFAULT_TOL};
use crate::response::Evaluator;

#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    m: usize,
    flow: Vec<f64>,
    pub objective: f64,
}

impl TransportPlan {
    pub fn size(&self) -> usize {
        self.m
    }

    pub fn flow(&self, from: usize, to: usize) -> f64 {
        self.flow[from * self.m + to]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.flow.chunks(self.m.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.flow.chunks(self.m.max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for row in self.flow.chunks(self.m.max(1)) {
            for (o, f) in out.iter_mut().zip(row) {
                *o += f;
            }
        }
        out
    }

    /// Objective of an arbitrary flow matrix under the same policy and costs.
    pub fn objective_of(inst: &Instance, pol: &Policy, flow: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for (i, row) in flow.iter().enumerate() {
            for (j, &f) in row.iter().enumerate() {
                if f > 0.0 {
                    total += f * (pol[j] - inst.cost.get(i, j));
                }
            }
        }
        total
    }
}

pub fn transport_plan(inst: &Instance, pol: &Policy) -> TransportPlan {
    let m = inst.m();
    let eval = Evaluator::new(inst, DEFAULT_TOL);
    let mut flow = vec![0.0; m * m];
    let mut objective = 0.0;
    for (i, &p) in inst.p.iter().enumerate() {
        let (t, gain) = eval.target(pol.values(), i);
        flow[i * m + t] = p;
        objective += p * gain;
    }
    TransportPlan { m, flow, objective }
}

/// Whether the plan's column marginals match the induced distribution.
pub fn check_transport_consistency(inst: &Instance, pol: &Policy) -> bool {
    let plan = transport_plan(inst, pol);
    let induced = Evaluator::new(inst, DEFAULT_TOL).induced(pol.values());
    plan.column_sums()
        .iter()
        .zip(&induced)
        .all(|(a, b)| (a - b).abs() <= 1e-9)
}
