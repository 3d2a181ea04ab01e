//! Minimum Euclidean norm point of `conv{v_1, ..., v_K}` intersected with
//! coordinate sign constraints.
//!
//! The feasible set is the polytope
//!
//! ```text
//! Q = { sum_k w_k v_k : w >= 0, sum_k w_k = 1, (sum_k w_k v_k)_j >= 0 for j in S }
//! ```
//!
//! and its minimum-norm point is found with Wolfe's algorithm. Each major
//! iteration minimizes `<x, y>` over `Q` with the simplex solver, which also
//! supplies `y` as a combination of the input vertices. The minor iterations
//! keep an affinely independent set of such points (the corral) and move to
//! the affine minimum-norm point of the corral whenever it lies inside the
//! hull. Weights over the input vertices are carried along, so the result is
//! an explicit convex combination. The point is unique; the weights need not be.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{lp_solve, pinv_solve, Bound, LinearProgram, LpStatus, SolverSettings};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNormProblem {
    pub vertices: Vec<Vec<f64>>,
    /// Coordinates of the combined point that must be nonnegative.
    pub nonnegative: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNormPoint {
    pub point: Vec<f64>,
    /// Convex weights over the input vertices, in input order.
    pub weights: Vec<f64>,
    pub norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MinNormOutcome {
    Solved(MinNormPoint),
    Infeasible,
}

impl MinNormOutcome {
    pub fn solved(self) -> Option<MinNormPoint> {
        match self {
            MinNormOutcome::Solved(p) => Some(p),
            MinNormOutcome::Infeasible => None,
        }
    }
}

/// A point of `Q` together with its weights over the input vertices.
struct CorralPoint {
    point: Vec<f64>,
    weights: Vec<f64>,
}

pub fn min_norm_point(prob: &MinNormProblem, settings: &SolverSettings) -> Result<MinNormOutcome> {
    let k_count = prob.vertices.len();
    if k_count == 0 {
        return Err(Error::InvalidInput("min-norm problem needs at least one vertex".into()));
    }
    let dim = prob.vertices[0].len();
    for v in &prob.vertices {
        check_len("vertex", dim, v.len())?;
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("vertex".into()));
        }
    }
    let mut signs = prob.nonnegative.clone();
    signs.sort_unstable();
    signs.dedup();
    if let Some(&j) = signs.iter().find(|&&j| j >= dim) {
        return Err(Error::InvalidInput(format!("sign constraint on coordinate {j} of a {dim}-vector")));
    }

    // Work with vertices scaled into the unit box.
    let scale = prob
        .vertices
        .iter()
        .flatten()
        .fold(0.0_f64, |a, v| a.max(v.abs()))
        .max(1e-300);
    let verts: Vec<Vec<f64>> = prob
        .vertices
        .iter()
        .map(|v| v.iter().map(|x| x / scale).collect())
        .collect();
    let oracle = LinearOracle { verts: &verts, signs: &signs, settings };

    let Some(start) = oracle.start()? else {
        return Ok(MinNormOutcome::Infeasible);
    };
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    // Optimality gap `|x|^2 - min_y <x, y>` accepted as zero, in scaled units.
    let gap_tol = 1e-14_f64.max(1e-3 * settings.tol / (scale * scale)).min(1e-12);
    let cap = 50 * (k_count + signs.len() + 1);
    let mut iterations = 0;

    let mut previous = f64::INFINITY;
    loop {
        let x = combine_points(&corral, &lambda, dim);
        let xx = dot(&x, &x);
        // No progress over a whole major cycle: x is optimal to rounding.
        if xx >= previous * (1.0 - 1e-13) {
            break;
        }
        previous = xx;
        let y = oracle.minimize(&x)?;
        if xx - dot(&x, &y.point) <= gap_tol || corral.len() > dim + 1 {
            break;
        }
        if corral.iter().any(|c| c.point.iter().zip(&y.point).all(|(a, b)| (a - b).abs() <= 1e-15)) {
            break;
        }
        // Step from x toward y first so the new point enters with positive
        // weight even when the corral is nearly affinely dependent.
        let step = {
            let d: Vec<f64> = y.point.iter().zip(&x).map(|(a, b)| a - b).collect();
            ((xx - dot(&x, &y.point)) / dot(&d, &d)).clamp(0.0, 1.0)
        };
        lambda.iter_mut().for_each(|l| *l *= 1.0 - step);
        corral.push(y);
        lambda.push(step);

        // Minor cycle: restore "x is the affine minimizer of a corral in
        // whose relative interior it lies".
        loop {
            iterations += 1;
            if iterations > cap {
                return Err(Error::NumericalFailure(format!("min-norm iteration cap of {cap} reached")));
            }
            let alpha = affine_minimizer(&corral)?;
            if alpha.iter().all(|&a| a > 1e-14) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= 1e-14 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            // Drop the points whose coefficient reached zero; at least one does.
            let smallest = (0..lambda.len())
                .min_by(|&a, &b| lambda[a].total_cmp(&lambda[b]))
                .expect("corral is nonempty");
            let mut keep = 0;
            for t in 0..corral.len() {
                if t != smallest && lambda[t] > 1e-14 {
                    corral.swap(keep, t);
                    lambda.swap(keep, t);
                    keep += 1;
                }
            }
            corral.truncate(keep);
            lambda.truncate(keep);
            if corral.is_empty() {
                return Err(Error::NumericalFailure("min-norm corral became empty".into()));
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
    }

    let mut w = vec![0.0; k_count];
    for (c, l) in corral.iter().zip(&lambda) {
        for (wk, ck) in w.iter_mut().zip(&c.weights) {
            *wk += l * ck;
        }
    }
    Ok(MinNormOutcome::Solved(finish(&prob.vertices, w)))
}

struct LinearOracle<'a> {
    verts: &'a [Vec<f64>],
    signs: &'a [usize],
    settings: &'a SolverSettings,
}

impl LinearOracle<'_> {
    fn program(&self, objective: Vec<f64>) -> LinearProgram {
        let k_count = self.verts.len();
        let mut lp = LinearProgram::new(k_count);
        lp.objective = objective;
        lp.bounds = vec![Bound::NONNEG; k_count];
        lp.add_eq(vec![1.0; k_count], 1.0);
        for &j in self.signs {
            lp.add_ge(self.verts.iter().map(|v| v[j]).collect(), 0.0);
        }
        lp
    }

    fn point(&self, weights: Vec<f64>) -> CorralPoint {
        let mut w = weights;
        w.iter_mut().for_each(|x| *x = x.max(0.0));
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let dim = self.verts[0].len();
        let point = (0..dim).map(|i| w.iter().zip(self.verts).map(|(wk, v)| wk * v[i]).sum()).collect();
        CorralPoint { point, weights: w }
    }

    /// The smallest feasible vertex if there is one, otherwise a basic
    /// feasible point of `Q`, or `None` when `Q` is empty.
    fn start(&self) -> Result<Option<CorralPoint>> {
        let k_count = self.verts.len();
        let best_vertex = self
            .verts
            .iter()
            .enumerate()
            .filter(|(_, v)| self.signs.iter().all(|&j| v[j] >= 0.0))
            .min_by(|a, b| dot(a.1, a.1).total_cmp(&dot(b.1, b.1)))
            .map(|(k, _)| k);
        if let Some(k) = best_vertex {
            let mut w = vec![0.0; k_count];
            w[k] = 1.0;
            return Ok(Some(self.point(w)));
        }
        let out = lp_solve(&self.program(vec![0.0; k_count]), self.settings)?;
        Ok(out.solution.map(|w| self.point(w)))
    }

    /// A point of `Q` minimizing `<x, y>`.
    fn minimize(&self, x: &[f64]) -> Result<CorralPoint> {
        let objective = self.verts.iter().map(|v| dot(v, x)).collect();
        let out = lp_solve(&self.program(objective), self.settings)?;
        match (out.status, out.solution) {
            (LpStatus::Optimal, Some(w)) => Ok(self.point(w)),
            _ => Err(Error::NumericalFailure("linear minimization over a nonempty polytope failed".into())),
        }
    }
}

fn combine_points(corral: &[CorralPoint], lambda: &[f64], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for (c, l) in corral.iter().zip(lambda) {
        for (xi, yi) in x.iter_mut().zip(&c.point) {
            *xi += l * yi;
        }
    }
    x
}

/// Coefficients `alpha` with `sum alpha = 1` minimizing `|sum alpha_t y_t|`.
/// Solved as the least-squares problem `min |y_0 + D beta|` with columns
/// `y_t - y_0`, which avoids squaring the conditioning through a Gram matrix.
fn affine_minimizer(corral: &[CorralPoint]) -> Result<Vec<f64>> {
    let t = corral.len();
    if t == 1 {
        return Ok(vec![1.0]);
    }
    let dim = corral[0].point.len();
    let base = &corral[0].point;
    let diffs = DMatrix::from_fn(dim, t - 1, |i, c| corral[c + 1].point[i] - base[i]);
    let rhs = -DVector::from_column_slice(base);
    let beta = pinv_solve(diffs, &rhs).ok_or_else(|| Error::NumericalFailure("affine minimizer SVD failed".into()))?;
    let mut alpha = Vec::with_capacity(t);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta.iter().copied());
    Ok(alpha)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |s, (x, y)| s + x * y)
}

fn finish(vertices: &[Vec<f64>], mut w: Vec<f64>) -> MinNormPoint {
    w.iter_mut().for_each(|x| *x = x.max(0.0));
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let dim = vertices[0].len();
    let mut point = vec![0.0; dim];
    for (wk, v) in w.iter().zip(vertices) {
        for (pi, vi) in point.iter_mut().zip(v) {
            *pi += wk * vi;
        }
    }
    let norm_sq = dot(&point, &point);
    MinNormPoint { point, weights: w, norm_sq }
}
