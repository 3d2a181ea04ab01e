//! Dense linear-programming and minimum-norm kernels.

mod minnorm;
mod simplex;

pub use minnorm::{min_norm_point, MinNormOutcome, MinNormPoint, MinNormProblem};
pub use simplex::{lp_feasible, lp_solve, Bound, LinearProgram, LpOutcome, LpStatus};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// `tol` bounds residuals and reduced costs; `pivot_tol` is the smallest
/// magnitude accepted as a pivot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tol: f64,
    pub pivot_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-9, pivot_tol: 1e-10 }
    }
}

impl SolverSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Minimum-norm least-squares solution of `a x = b` through the SVD.
pub(crate) fn pinv_solve(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if a.ncols() == 0 {
        return Some(DVector::zeros(0));
    }
    if a.nrows() == 0 {
        return Some(DVector::zeros(a.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Some(DVector::zeros(svd.v_t.as_ref().map_or(0, |v| v.ncols())));
    }
    let eps = smax * 1e-12 * (svd.singular_values.len() as f64);
    // The bidiagonal SVD can lose several digits on small, badly scaled
    // systems; a few refinement steps against the original matrix recover them.
    let mut x = svd.solve(b, eps).ok()?;
    for _ in 0..3 {
        let r = b - &a * &x;
        if r.norm() <= 1e-15 * (1.0 + b.norm()) {
            break;
        }
        let dx = svd.solve(&r, eps).ok()?;
        x += dx;
    }
    Some(x)
}

/// Projects `d` onto the null space of the given rows.
pub(crate) fn project_to_nullspace(rows: &[Vec<f64>], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    if rows.is_empty() || n == 0 {
        return d.to_vec();
    }
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let mut out = DVector::from_column_slice(d);
    if smax == 0.0 {
        return d.to_vec();
    }
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > smax * 1e-10 {
            let v = v_t.row(k).transpose();
            let c = v.dot(&out);
            out -= v * c;
        }
    }
    out.iter().copied().collect()
}
