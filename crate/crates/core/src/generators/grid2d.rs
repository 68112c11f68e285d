//! Two-dimensional populations discretized onto a 7x7 grid.
//!
//! Cell `(a, b)` has index `7a + b`. Its mass is the density at the cell
//! center (cell areas are equal and cancel), renormalized over the grid.
//! Moving between cells costs the L1 grid distance divided by `alpha`.

use serde_json::json;

use super::{meta, GenError};
use crate::model::{CostMatrix, Instance};

pub const GRID_SIDE: usize = 7;

/// Isotropic Gaussian density up to the shared normalizing constant.
fn gauss(x: (f64, f64), mean: (f64, f64), var: f64) -> f64 {
    let d = (x.0 - mean.0).powi(2) + (x.1 - mean.1).powi(2);
    (-d / (2.0 * var)).exp() / var
}

struct Layout {
    x1: (f64, f64),
    x2: (f64, f64),
}

impl Layout {
    fn center(&self, a: usize, b: usize) -> (f64, f64) {
        let n = GRID_SIDE as f64;
        (
            self.x1.0 + (a as f64 + 0.5) * (self.x1.1 - self.x1.0) / n,
            self.x2.0 + (b as f64 + 0.5) * (self.x2.1 - self.x2.0) / n,
        )
    }
}

fn build(
    family: &str,
    alpha: f64,
    gamma: f64,
    layout: Layout,
    density: impl Fn((f64, f64)) -> f64,
    outcome: impl Fn(f64, f64) -> f64,
) -> Result<Instance, GenError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(GenError::InvalidParam(format!("alpha {alpha} must be positive")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GenError::InvalidParam(format!("gamma {gamma} outside (0, 1)")));
    }
    let n = GRID_SIDE;
    let m = n * n;
    let mut p = Vec::with_capacity(m);
    let mut q = Vec::with_capacity(m);
    for a in 0..n {
        for b in 0..n {
            p.push(density(layout.center(a, b)));
            q.push(outcome(a as f64, b as f64));
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);

    let mut cost = CostMatrix::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let (ai, bi) = (i / n, i % n);
            let (aj, bj) = (j / n, j % n);
            let d = ai.abs_diff(aj) + bi.abs_diff(bj);
            cost.set(i, j, d as f64 / alpha);
        }
    }
    let mut inst = Instance::new(p, q, gamma, cost);
    inst.meta = meta(
        family,
        &[
            ("alpha", json!(alpha)),
            ("gamma", json!(gamma)),
            ("grid_side", json!(n)),
        ],
    );
    Ok(inst)
}

/// Equal mixture of N([4,4], I) and N([7,10], I) over x1 in [2,3],
/// x2 in [3,14].
pub fn gen_2d_mixture_grid(alpha: f64, gamma: f64) -> Result<Instance, GenError> {
    build(
        "mixture-grid",
        alpha,
        gamma,
        Layout {
            x1: (2.0, 3.0),
            x2: (3.0, 14.0),
        },
        |x| 0.5 * gauss(x, (4.0, 4.0), 1.0) + 0.5 * gauss(x, (7.0, 10.0), 1.0),
        |a, b| (a.abs() + (3.0 - b).abs()) / 24.0 + (a.abs() + (7.0 - b).abs()) / 24.0,
    )
}

/// N([2.5,2.5], 1.4 I) over x1 in [-3, 6.3], x2 in [-1, 7.5].
pub fn gen_2d_unimodal_grid(alpha: f64, gamma: f64) -> Result<Instance, GenError> {
    build(
        "unimodal-grid",
        alpha,
        gamma,
        Layout {
            x1: (-3.0, 6.3),
            x2: (-1.0, 7.5),
        },
        |x| gauss(x, (2.5, 2.5), 1.4),
        |a, b| ((a + b) / 12.0).max(((6.0 - a).abs() + (6.0 - b).abs()) / 12.0),
    )
}
