//! Point data, index-set classification and feasibility for programs of the form
//!
//! ```text
//! min f(x)  s.t.  g(x) <= 0,  h(x) = 0,  G(x) >= 0,  H(x) >= 0,  G(x)^T H(x) = 0.
//! ```
//!
//! Everything downstream works with [`FirstOrderData`]: the constraint values and
//! gradients at a fixed point. [`AffineInstance`] is a convenience layer that
//! produces such data for affine constraints and a quadratic objective.
//!
//! Activity is decided with an absolute threshold, so data should be scaled to
//! order one before classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Values and gradients of `f, g, h, G, H` at a point.
///
/// Gradients are stored row-wise: `grad_g[i]` is the gradient of `g_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderData {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub p: usize,
    pub grad_f: Vec<f64>,
    pub g_vals: Vec<f64>,
    pub grad_g: Vec<Vec<f64>>,
    pub h_vals: Vec<f64>,
    pub grad_h: Vec<Vec<f64>>,
    pub comp_g_vals: Vec<f64>,
    pub grad_comp_g: Vec<Vec<f64>>,
    pub comp_h_vals: Vec<f64>,
    pub grad_comp_h: Vec<Vec<f64>>,
}

impl FirstOrderData {
    /// Data with no constraints at all.
    pub fn unconstrained(grad_f: Vec<f64>) -> Self {
        Self {
            n: grad_f.len(),
            l: 0,
            m: 0,
            p: 0,
            grad_f,
            g_vals: Vec::new(),
            grad_g: Vec::new(),
            h_vals: Vec::new(),
            grad_h: Vec::new(),
            comp_g_vals: Vec::new(),
            grad_comp_g: Vec::new(),
            comp_h_vals: Vec::new(),
            grad_comp_h: Vec::new(),
        }
    }

    pub fn with_inequalities(mut self, vals: Vec<f64>, grads: Vec<Vec<f64>>) -> Self {
        self.l = vals.len();
        self.g_vals = vals;
        self.grad_g = grads;
        self
    }

    pub fn with_equalities(mut self, vals: Vec<f64>, grads: Vec<Vec<f64>>) -> Self {
        self.m = vals.len();
        self.h_vals = vals;
        self.grad_h = grads;
        self
    }

    pub fn with_complementarity(
        mut self,
        g_vals: Vec<f64>,
        g_grads: Vec<Vec<f64>>,
        h_vals: Vec<f64>,
        h_grads: Vec<Vec<f64>>,
    ) -> Self {
        self.p = g_vals.len();
        self.comp_g_vals = g_vals;
        self.grad_comp_g = g_grads;
        self.comp_h_vals = h_vals;
        self.grad_comp_h = h_grads;
        self
    }

    /// Checks declared counts against vector lengths and rejects NaN/infinity.
    pub fn validate(&self) -> Result<()> {
        check_len("grad_f", self.n, self.grad_f.len())?;
        check_block("g", self.n, self.l, &self.g_vals, &self.grad_g)?;
        check_block("h", self.n, self.m, &self.h_vals, &self.grad_h)?;
        check_block("G", self.n, self.p, &self.comp_g_vals, &self.grad_comp_g)?;
        check_block("H", self.n, self.p, &self.comp_h_vals, &self.grad_comp_h)?;
        if !self.grad_f.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("grad_f".into()));
        }
        Ok(())
    }
}

fn check_block(name: &str, n: usize, count: usize, vals: &[f64], grads: &[Vec<f64>]) -> Result<()> {
    check_len(&format!("{name} values"), count, vals.len())?;
    check_len(&format!("{name} gradients"), count, grads.len())?;
    for (i, row) in grads.iter().enumerate() {
        check_len(&format!("gradient of {name}_{}", i + 1), n, row.len())?;
        if !row.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient of {name}_{}", i + 1)));
        }
    }
    if !vals.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(format!("{name} values")));
    }
    Ok(())
}

/// Affine constraints with a quadratic objective `0.5 x^T Q x + c^T x`.
///
/// Matrices are row-major, one row per constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineInstance {
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub a_g: Vec<Vec<f64>>,
    pub b_g: Vec<f64>,
    pub a_h: Vec<Vec<f64>>,
    pub b_h: Vec<f64>,
    pub a_comp_g: Vec<Vec<f64>>,
    pub b_comp_g: Vec<f64>,
    pub a_comp_h: Vec<Vec<f64>>,
    pub b_comp_h: Vec<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl AffineInstance {
    /// Linear objective `c^T x` and no constraints.
    pub fn linear(c: Vec<f64>) -> Self {
        let n = c.len();
        Self {
            q: vec![vec![0.0; n]; n],
            c,
            a_g: Vec::new(),
            b_g: Vec::new(),
            a_h: Vec::new(),
            b_h: Vec::new(),
            a_comp_g: Vec::new(),
            b_comp_g: Vec::new(),
            a_comp_h: Vec::new(),
            b_comp_h: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        check_len("Q rows", n, self.q.len())?;
        for (i, row) in self.q.iter().enumerate() {
            check_len("Q columns", n, row.len())?;
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite("Q".into()));
                }
                if (v - self.q[j][i]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "Q is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        check_affine_block("g", n, &self.a_g, &self.b_g)?;
        check_affine_block("h", n, &self.a_h, &self.b_h)?;
        check_affine_block("G", n, &self.a_comp_g, &self.b_comp_g)?;
        check_affine_block("H", n, &self.a_comp_h, &self.b_comp_h)?;
        check_len("H rows", self.b_comp_g.len(), self.b_comp_h.len())?;
        if !self.c.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("c".into()));
        }
        Ok(())
    }
}

fn check_affine_block(name: &str, n: usize, a: &[Vec<f64>], b: &[f64]) -> Result<()> {
    check_len(&format!("A_{name} rows"), b.len(), a.len())?;
    for row in a {
        check_len(&format!("A_{name} columns"), n, row.len())?;
        if !row.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("A_{name}")));
        }
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(format!("b_{name}")));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |s, (x, y)| s + x * y)
}

fn affine_map(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(row, bi)| dot(row, x) + bi).collect()
}

/// Evaluates an affine instance at `x`.
pub fn evaluate_affine(inst: &AffineInstance, x: &[f64]) -> Result<FirstOrderData> {
    inst.validate()?;
    check_len("x", inst.n(), x.len())?;
    let grad_f = inst
        .q
        .iter()
        .zip(&inst.c)
        .map(|(row, ci)| dot(row, x) + ci)
        .collect();
    Ok(FirstOrderData {
        n: inst.n(),
        l: inst.b_g.len(),
        m: inst.b_h.len(),
        p: inst.b_comp_g.len(),
        grad_f,
        g_vals: affine_map(&inst.a_g, &inst.b_g, x),
        grad_g: inst.a_g.clone(),
        h_vals: affine_map(&inst.a_h, &inst.b_h, x),
        grad_h: inst.a_h.clone(),
        comp_g_vals: affine_map(&inst.a_comp_g, &inst.b_comp_g, x),
        grad_comp_g: inst.a_comp_g.clone(),
        comp_h_vals: affine_map(&inst.a_comp_h, &inst.b_comp_h, x),
        grad_comp_h: inst.a_comp_h.clone(),
    })
}

/// A problem as supplied by the user: point data directly, or an affine
/// instance together with the point to analyze.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProblemData {
    PointData(FirstOrderData),
    Affine { instance: AffineInstance, x_bar: Vec<f64> },
}

impl ProblemData {
    pub fn first_order_data(&self) -> Result<FirstOrderData> {
        match self {
            ProblemData::PointData(data) => {
                data.validate()?;
                Ok(data.clone())
            }
            ProblemData::Affine { instance, x_bar } => evaluate_affine(instance, x_bar),
        }
    }
}

/// Numerical thresholds. Defaults match the CLI defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub active_tol: f64,
    pub feas_tol: f64,
    pub solver_tol: f64,
    pub cert_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            active_tol: 1e-8,
            feas_tol: 1e-8,
            solver_tol: 1e-9,
            cert_tol: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.active_tol, self.feas_tol, self.solver_tol, self.cert_tol];
        if all.iter().all(|t| t.is_finite() && *t >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidInput("tolerances must be finite and nonnegative".into()))
        }
    }
}

/// A single constraint, 0-based. Displays 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintRef {
    Ineq(usize),
    Eq(usize),
    CompG(usize),
    CompH(usize),
    Complementarity(usize),
}

impl fmt::Display for ConstraintRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintRef::Ineq(i) => write!(f, "g_{}", i + 1),
            ConstraintRef::Eq(i) => write!(f, "h_{}", i + 1),
            ConstraintRef::CompG(i) => write!(f, "G_{}", i + 1),
            ConstraintRef::CompH(i) => write!(f, "H_{}", i + 1),
            ConstraintRef::Complementarity(i) => write!(f, "G_{0}*H_{0}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintRef,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Every constraint with a strictly positive violation.
    pub violations: Vec<Violation>,
    pub max_violation: f64,
    pub worst: Option<ConstraintRef>,
    pub feasible: bool,
}

/// Measures constraint violation. Complementarity is measured per pair as
/// `min(max(G_i, 0), max(H_i, 0))`.
pub fn check_feasibility(data: &FirstOrderData, tol: &Tolerances) -> FeasibilityReport {
    let mut violations = Vec::new();
    let mut push = |constraint, amount: f64| {
        if amount > 0.0 || amount.is_nan() {
            violations.push(Violation { constraint, amount });
        }
    };
    for (i, v) in data.g_vals.iter().enumerate() {
        push(ConstraintRef::Ineq(i), v.max(0.0));
    }
    for (i, v) in data.h_vals.iter().enumerate() {
        push(ConstraintRef::Eq(i), v.abs());
    }
    for (i, (gv, hv)) in data.comp_g_vals.iter().zip(&data.comp_h_vals).enumerate() {
        push(ConstraintRef::CompG(i), (-gv).max(0.0));
        push(ConstraintRef::CompH(i), (-hv).max(0.0));
        push(ConstraintRef::Complementarity(i), gv.max(0.0).min(hv.max(0.0)));
    }

    let mut max_violation = 0.0;
    let mut worst = None;
    for v in &violations {
        if v.amount > max_violation || v.amount.is_nan() {
            max_violation = v.amount;
            worst = Some(v.constraint);
        }
    }
    FeasibilityReport {
        feasible: max_violation <= tol.feas_tol,
        violations,
        max_violation,
        worst,
    }
}

/// Active structure at a feasible point. Indices are 0-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IndexSets {
    pub active_g: Vec<usize>,
    pub plus_zero: Vec<usize>,
    pub zero_plus: Vec<usize>,
    pub zero_zero: Vec<usize>,
}

impl IndexSets {
    pub fn is_active_g(&self, i: usize) -> bool {
        self.active_g.binary_search(&i).is_ok()
    }

    pub fn is_biactive(&self, i: usize) -> bool {
        self.zero_zero.binary_search(&i).is_ok()
    }

    pub fn kind(&self, i: usize) -> Option<PairKind> {
        if self.zero_zero.binary_search(&i).is_ok() {
            Some(PairKind::ZeroZero)
        } else if self.plus_zero.binary_search(&i).is_ok() {
            Some(PairKind::PlusZero)
        } else if self.zero_plus.binary_search(&i).is_ok() {
            Some(PairKind::ZeroPlus)
        } else {
            None
        }
    }

    /// True iff the three complementarity sets partition `0..p`.
    pub fn partitions(&self, p: usize) -> bool {
        let mut seen = vec![0u8; p];
        for &i in self.plus_zero.iter().chain(&self.zero_plus).chain(&self.zero_zero) {
            if i >= p {
                return false;
            }
            seen[i] += 1;
        }
        seen.iter().all(|&c| c == 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    PlusZero,
    ZeroPlus,
    ZeroZero,
}

/// Splits the constraints into active inequalities and the three
/// complementarity classes. Values at or below `active_tol` count as zero.
pub fn classify_indices(data: &FirstOrderData, tol: &Tolerances) -> Result<IndexSets> {
    data.validate()?;
    tol.validate()?;
    let report = check_feasibility(data, tol);
    if !report.feasible {
        return Err(Error::InfeasiblePoint {
            worst: report.worst.expect("infeasible report names a constraint"),
            violation: report.max_violation,
        });
    }

    let zero = |v: f64| v <= tol.active_tol;
    let mut sets = IndexSets {
        active_g: data
            .g_vals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() <= tol.active_tol)
            .map(|(i, _)| i)
            .collect(),
        ..IndexSets::default()
    };
    for (i, (&gv, &hv)) in data.comp_g_vals.iter().zip(&data.comp_h_vals).enumerate() {
        match (zero(gv), zero(hv)) {
            (true, true) => sets.zero_zero.push(i),
            (false, true) => sets.plus_zero.push(i),
            (true, false) => sets.zero_plus.push(i),
            (false, false) => unreachable!("feasible pair with both sides positive"),
        }
    }
    Ok(sets)
}
