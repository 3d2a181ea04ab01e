//! Dense two-phase primal simplex with Bland's rule.
//!
//! Problems are brought into standard form `A x = b, x >= 0` by shifting,
//! reflecting or splitting variables according to their bounds and adding
//! slacks to inequality rows. Phase one minimizes the sum of artificial
//! variables; phase two starts from the resulting basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SolverSettings;
use crate::error::{check_len, Error, Result};

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bound {
    pub const FREE: Bound = Bound { lower: None, upper: None };
    pub const NONNEG: Bound = Bound { lower: Some(0.0), upper: None };

    pub fn at_least(v: f64) -> Self {
        Bound { lower: Some(v), upper: None }
    }

    pub fn at_most(v: f64) -> Self {
        Bound { lower: None, upper: Some(v) }
    }

    pub fn between(lo: f64, hi: f64) -> Self {
        Bound { lower: Some(lo), upper: Some(hi) }
    }

    pub fn fixed(v: f64) -> Self {
        Bound::between(v, v)
    }
}

/// `min c^T z` subject to `E z = e`, `A z <= b` and variable bounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ineq_matrix: Vec<Vec<f64>>,
    pub ineq_rhs: Vec<f64>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    /// A program over `d` free variables with zero objective and no rows.
    pub fn new(d: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; d],
            bounds: vec![Bound::FREE; d],
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.ineq_matrix.push(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        check_len("bounds", d, self.bounds.len())?;
        check_len("equality rhs", self.eq_matrix.len(), self.eq_rhs.len())?;
        check_len("inequality rhs", self.ineq_matrix.len(), self.ineq_rhs.len())?;
        for row in self.eq_matrix.iter().chain(&self.ineq_matrix) {
            check_len("constraint row", d, row.len())?;
        }
        let finite = self
            .objective
            .iter()
            .chain(self.eq_rhs.iter())
            .chain(self.ineq_rhs.iter())
            .chain(self.eq_matrix.iter().flatten())
            .chain(self.ineq_matrix.iter().flatten())
            .chain(self.bounds.iter().flat_map(|b| b.lower.iter().chain(b.upper.iter())))
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("linear program".into()));
        }
        Ok(())
    }

    /// Largest constraint or bound violation of `z`.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, rhs) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            worst = worst.max((dot(row, z) - rhs).abs());
        }
        for (row, rhs) in self.ineq_matrix.iter().zip(&self.ineq_rhs) {
            worst = worst.max(dot(row, z) - rhs);
        }
        for (b, v) in self.bounds.iter().zip(z) {
            if let Some(lo) = b.lower {
                worst = worst.max(lo - v);
            }
            if let Some(hi) = b.upper {
                worst = worst.max(v - hi);
            }
        }
        worst
    }

    fn scale(&self) -> f64 {
        self.eq_rhs
            .iter()
            .chain(&self.ineq_rhs)
            .chain(self.eq_matrix.iter().flatten())
            .chain(self.ineq_matrix.iter().flatten())
            .fold(1.0_f64, |acc, v| acc.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub solution: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
}

impl LpOutcome {
    fn without_solution(status: LpStatus) -> Self {
        LpOutcome { status, solution: None, objective_value: None }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |s, (x, y)| s + x * y)
}

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shift { col: usize, lower: f64 },
    Reflect { col: usize, upper: f64 },
    Split { pos: usize, neg: usize },
}

struct StdRow {
    coeffs: Vec<f64>,
    rhs: f64,
    is_le: bool,
}

/// Solves a linear program.
///
/// Returns `NumericalFailure` when the iteration cap of
/// `50 * (columns + rows)` pivots is hit or the final point fails to verify.
pub fn lp_solve(lp: &LinearProgram, settings: &SolverSettings) -> Result<LpOutcome> {
    lp.validate()?;

    // Column layout.
    let mut maps = Vec::with_capacity(lp.dim());
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        let map = match (b.lower, b.upper) {
            (Some(lower), upper) => {
                if let Some(upper) = upper {
                    extra_rows.push((ncols, upper - lower));
                }
                VarMap::Shift { col: ncols, lower }
            }
            (None, Some(upper)) => VarMap::Reflect { col: ncols, upper },
            (None, None) => {
                ncols += 1;
                VarMap::Split { pos: ncols - 1, neg: ncols }
            }
        };
        ncols += 1;
        maps.push(map);
    }
    let nstruct = ncols;

    let translate = |row: &[f64], rhs: f64, is_le: bool| {
        let mut coeffs = vec![0.0; nstruct];
        let mut rhs = rhs;
        for (a, map) in row.iter().zip(&maps) {
            match *map {
                VarMap::Shift { col, lower } => {
                    coeffs[col] += a;
                    rhs -= a * lower;
                }
                VarMap::Reflect { col, upper } => {
                    coeffs[col] -= a;
                    rhs -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        StdRow { coeffs, rhs, is_le }
    };

    let mut rows: Vec<StdRow> = Vec::new();
    for (row, rhs) in lp.eq_matrix.iter().zip(&lp.eq_rhs) {
        rows.push(translate(row, *rhs, false));
    }
    for (row, rhs) in lp.ineq_matrix.iter().zip(&lp.ineq_rhs) {
        rows.push(translate(row, *rhs, true));
    }
    for (col, width) in extra_rows {
        let mut coeffs = vec![0.0; nstruct];
        coeffs[col] = 1.0;
        rows.push(StdRow { coeffs, rhs: width, is_le: true });
    }

    let mut cost = vec![0.0; nstruct];
    let mut cost_offset = 0.0;
    for (c, map) in lp.objective.iter().zip(&maps) {
        match *map {
            VarMap::Shift { col, lower } => {
                cost[col] += c;
                cost_offset += c * lower;
            }
            VarMap::Reflect { col, upper } => {
                cost[col] -= c;
                cost_offset += c * upper;
            }
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let x = match Tableau::build(&rows, nstruct, settings).solve(&cost)? {
        StdOutcome::Optimal(x) => x,
        StdOutcome::Infeasible => return Ok(LpOutcome::without_solution(LpStatus::Infeasible)),
        StdOutcome::Unbounded => return Ok(LpOutcome::without_solution(LpStatus::Unbounded)),
    };

    let z: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lower } => lower + x[col],
            VarMap::Reflect { col, upper } => upper - x[col],
            VarMap::Split { pos, neg } => x[pos] - x[neg],
        })
        .collect();

    let violation = lp.max_violation(&z);
    if violation > settings.tol * lp.scale() * (1.0 + z.iter().fold(0.0_f64, |a, v| a.max(v.abs()))) {
        return Err(Error::NumericalFailure(format!(
            "simplex solution violates constraints by {violation:e}"
        )));
    }
    let value = dot(&lp.objective, &z);
    debug_assert!((value - (dot(&cost, &x[..nstruct]) + cost_offset)).abs() <= 1e-6 * (1.0 + value.abs()));
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        solution: Some(z),
        objective_value: Some(value),
    })
}

/// Zero-objective feasibility problem. An empty system over free variables
/// returns the origin.
pub fn lp_feasible(
    eq_matrix: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    ineq_matrix: Vec<Vec<f64>>,
    ineq_rhs: Vec<f64>,
    bounds: Vec<Bound>,
    settings: &SolverSettings,
) -> Result<LpOutcome> {
    let lp = LinearProgram {
        objective: vec![0.0; bounds.len()],
        eq_matrix,
        eq_rhs,
        ineq_matrix,
        ineq_rhs,
        bounds,
    };
    lp_solve(&lp, settings)
}

enum StdOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Rows of `[A | b]`.
    rows: Vec<Vec<f64>>,
    /// The rows as built, before any pivoting, and the original index of
    /// each current row.
    original: Vec<Vec<f64>>,
    row_ids: Vec<usize>,
    basis: Vec<usize>,
    ncols: usize,
    nstruct: usize,
    /// First artificial column; artificials occupy `first_artificial..ncols`.
    first_artificial: usize,
    iterations: usize,
    max_iterations: usize,
    settings: SolverSettings,
}

impl Tableau {
    fn build(std_rows: &[StdRow], nstruct: usize, settings: &SolverSettings) -> Self {
        let nslack = std_rows.iter().filter(|r| r.is_le).count();
        let mut needs_artificial = Vec::with_capacity(std_rows.len());
        for r in std_rows {
            needs_artificial.push(!(r.is_le && r.rhs >= 0.0));
        }
        let nart = needs_artificial.iter().filter(|&&a| a).count();
        let first_artificial = nstruct + nslack;
        let ncols = first_artificial + nart;

        let mut rows = Vec::with_capacity(std_rows.len());
        let mut basis = Vec::with_capacity(std_rows.len());
        let mut slack = nstruct;
        let mut art = first_artificial;
        for (r, &artificial) in std_rows.iter().zip(&needs_artificial) {
            let mut row = vec![0.0; ncols + 1];
            row[..nstruct].copy_from_slice(&r.coeffs);
            row[ncols] = r.rhs;
            let slack_col = if r.is_le {
                row[slack] = 1.0;
                slack += 1;
                Some(slack - 1)
            } else {
                None
            };
            if r.rhs < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            if artificial {
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            } else {
                basis.push(slack_col.expect("slack-basic rows are inequalities"));
            }
            rows.push(row);
        }

        Tableau {
            max_iterations: 50 * (ncols + rows.len()).max(1),
            original: rows.clone(),
            row_ids: (0..rows.len()).collect(),
            rows,
            basis,
            ncols,
            nstruct,
            first_artificial,
            iterations: 0,
            settings: *settings,
        }
    }

    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.ncols]
    }

    fn solve(mut self, cost: &[f64]) -> Result<StdOutcome> {
        if self.first_artificial < self.ncols {
            let mut phase_one = vec![0.0; self.ncols];
            phase_one[self.first_artificial..].iter_mut().for_each(|c| *c = 1.0);
            match self.optimize(&phase_one, self.ncols)? {
                true => {}
                false => {
                    return Err(Error::NumericalFailure(
                        "phase one reported an unbounded auxiliary problem".into(),
                    ))
                }
            }
            let infeasibility: f64 = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= self.first_artificial)
                .map(|(r, _)| self.rhs(r).abs())
                .sum();
            if infeasibility > self.settings.tol {
                return Ok(StdOutcome::Infeasible);
            }
            self.drive_out_artificials();
        }

        let mut phase_two = vec![0.0; self.ncols];
        phase_two[..self.nstruct].copy_from_slice(cost);
        if !self.optimize(&phase_two, self.first_artificial)? {
            return Ok(StdOutcome::Unbounded);
        }

        let mut x = vec![0.0; self.ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.rows[r][self.ncols].max(0.0);
        }
        if let Some(refined) = self.refactored_basic_values() {
            for (&b, v) in self.basis.iter().zip(refined) {
                x[b] = v.max(0.0);
            }
        }
        x.truncate(self.nstruct);
        Ok(StdOutcome::Optimal(x))
    }

    /// Basic values recomputed from the original rows with the final basis,
    /// which removes the rounding accumulated over the pivots. `None` if the
    /// basis matrix is singular or the result is clearly worse.
    fn refactored_basic_values(&self) -> Option<Vec<f64>> {
        let m = self.rows.len();
        if m == 0 {
            return None;
        }
        let b_mat = DMatrix::from_fn(m, m, |i, j| self.original[self.row_ids[i]][self.basis[j]]);
        let rhs = DVector::from_fn(m, |i, _| self.original[self.row_ids[i]][self.ncols]);
        let values = b_mat.lu().solve(&rhs)?;
        let scale = 1.0 + values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if values.iter().all(|v| v.is_finite() && *v >= -1e-7 * scale) {
            Some(values.iter().copied().collect())
        } else {
            None
        }
    }

    /// Minimizes `cost^T x` with entering columns restricted to `0..eligible`.
    /// Returns `false` on an unbounded ray.
    fn optimize(&mut self, cost: &[f64], eligible: usize) -> Result<bool> {
        let ncols = self.ncols;
        let mut reduced = cost.to_vec();
        reduced.push(0.0);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (j, v) in self.rows[r].iter().enumerate() {
                    reduced[j] -= cb * v;
                }
            }
        }

        let opt_tol = self.settings.tol;
        let pivot_tol = self.settings.pivot_tol;
        loop {
            let Some(enter) = (0..eligible).find(|&j| reduced[j] < -opt_tol) else {
                return Ok(true);
            };

            // Two-pass ratio test: rows within a small feasibility slack of
            // the minimum ratio are near-ties, and among those the pivot
            // element must not be tiny relative to the largest one. Bland's
            // smallest-index rule breaks the remaining ties.
            let slack = opt_tol;
            let bound = self
                .rows
                .iter()
                .filter(|row| row[enter] > pivot_tol)
                .map(|row| (row[ncols].max(0.0) + slack) / row[enter])
                .fold(f64::INFINITY, f64::min);
            if bound == f64::INFINITY {
                return Ok(false);
            }
            let near: Vec<usize> = (0..self.rows.len())
                .filter(|&r| {
                    let a = self.rows[r][enter];
                    a > pivot_tol && self.rows[r][ncols].max(0.0) / a <= bound
                })
                .collect();
            let largest = near.iter().map(|&r| self.rows[r][enter]).fold(0.0_f64, f64::max);
            let leave = near
                .iter()
                .copied()
                .filter(|&r| self.rows[r][enter] >= 1e-3 * largest)
                .min_by_key(|&r| self.basis[r])
                .expect("the largest pivot qualifies");

            self.pivot(leave, enter)?;
            let factor = reduced[enter];
            if factor != 0.0 {
                for (v, p) in reduced.iter_mut().zip(&self.rows[leave]) {
                    *v -= factor * p;
                }
            }
            reduced[enter] = 0.0;
        }
    }

    fn pivot(&mut self, leave: usize, enter: usize) -> Result<()> {
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(Error::NumericalFailure(format!(
                "simplex iteration cap of {} reached",
                self.max_iterations
            )));
        }
        let inv = 1.0 / self.rows[leave][enter];
        self.rows[leave].iter_mut().for_each(|v| *v *= inv);
        self.rows[leave][enter] = 1.0;
        let pivot_row = self.rows[leave].clone();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == leave {
                continue;
            }
            let factor = row[enter];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[enter] = 0.0;
            }
        }
        self.basis[leave] = enter;
        Ok(())
    }

    /// Pivots zero-level artificials out of the basis; rows where that is
    /// impossible are linearly dependent and get dropped.
    fn drive_out_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.first_artificial {
                r += 1;
                continue;
            }
            let candidate = (0..self.first_artificial)
                .filter(|&j| self.rows[r][j].abs() > self.settings.pivot_tol)
                .max_by(|&a, &b| self.rows[r][a].abs().total_cmp(&self.rows[r][b].abs()));
            match candidate {
                Some(j) if self.pivot(r, j).is_ok() => r += 1,
                _ => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                    self.row_ids.remove(r);
                }
            }
        }
    }
}
