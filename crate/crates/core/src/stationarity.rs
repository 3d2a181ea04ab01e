//! Stationarity systems, per-branch multipliers and their combination into an
//! M-stationary multiplier.
//!
//! The certification route is constructive:
//!
//! 1. for every branch `alpha` over the biactive set, find multipliers of
//!    `-grad f` in the polar of the branch cone (one LP per branch);
//! 2. for every `alpha`, take the minimum-norm point (in the `(mu, nu)`
//!    coordinates) of the convex hull of all branch multipliers, restricted to
//!    the sign region of `alpha`;
//! 3. among these minima pick one of largest norm.
//!
//! The selected point satisfies, at every biactive index, either
//! `mu_i > 0 && nu_i > 0` or `mu_i * nu_i = 0`. Because it is a convex
//! combination of multipliers that all satisfy the sign-free part of the
//! stationarity system, so does the combination.
//!
//! Floating-point convention: "> 0" means "> cert_tol" and "= 0" means
//! "|.| <= cert_tol".

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{polar_branch_membership, BranchAssignment, LinearizedCone, PolarMembership};
use crate::error::{check_len, Error, Result};
use crate::model::{check_feasibility, classify_indices, FirstOrderData, IndexSets, Tolerances};
use crate::solvers::{min_norm_point, MinNormProblem, SolverSettings};

/// Multipliers `(lambda, eta, mu, nu)` for `g`, `h`, `G` and `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierVector {
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl MultiplierVector {
    pub fn zeros(l: usize, m: usize, p: usize) -> Self {
        Self {
            lambda: vec![0.0; l],
            eta: vec![0.0; m],
            mu: vec![0.0; p],
            nu: vec![0.0; p],
        }
    }

    pub fn p(&self) -> usize {
        self.mu.len()
    }

    pub fn check_dims(&self, data: &FirstOrderData) -> Result<()> {
        check_len("lambda", data.l, self.lambda.len())?;
        check_len("eta", data.m, self.eta.len())?;
        check_len("mu", data.p, self.mu.len())?;
        check_len("nu", data.p, self.nu.len())?;
        let finite = self
            .lambda
            .iter()
            .chain(&self.eta)
            .chain(&self.mu)
            .chain(&self.nu)
            .all(|v| v.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite("multipliers".into()))
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.lambda.len() == other.lambda.len()
            && self.eta.len() == other.eta.len()
            && self.mu.len() == other.mu.len()
            && self.nu.len() == other.nu.len()
    }

    /// `(mu, nu)` stacked into one vector of length `2p`.
    pub fn mu_nu(&self) -> Vec<f64> {
        self.mu.iter().chain(&self.nu).copied().collect()
    }

    pub fn mu_nu_norm_sq(&self) -> f64 {
        self.mu.iter().chain(&self.nu).fold(0.0, |a, v| a + v * v)
    }

    /// `sum_k weights[k] * items[k]`, blockwise.
    pub fn combine(items: &[&MultiplierVector], weights: &[f64]) -> MultiplierVector {
        let first = items[0];
        let mut out = MultiplierVector::zeros(first.lambda.len(), first.eta.len(), first.mu.len());
        for (item, &w) in items.iter().zip(weights) {
            let pairs = [
                (&mut out.lambda, &item.lambda),
                (&mut out.eta, &item.eta),
                (&mut out.mu, &item.mu),
                (&mut out.nu, &item.nu),
            ];
            for (acc, src) in pairs {
                for (a, s) in acc.iter_mut().zip(src) {
                    *a += w * s;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiactivePair {
    pub index: usize,
    pub mu: f64,
    pub nu: f64,
}

/// Residuals of the sign-free part of the stationarity system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Infinity norm of `grad f + sum lambda grad g + sum eta grad h - sum (mu grad G + nu grad H)`.
    pub gradient: f64,
    /// Smallest `lambda_i` over active inequalities, if any are active.
    pub lambda_active_min: Option<f64>,
    /// Largest `|lambda_i|` over inactive inequalities.
    pub lambda_inactive_max: f64,
    /// Largest `|mu_i|` over `I^+0`.
    pub mu_plus_zero_max: f64,
    /// Largest `|nu_i|` over `I^0+`.
    pub nu_zero_plus_max: f64,
    pub biactive: Vec<BiactivePair>,
}

impl ResidualReport {
    pub fn max_violation(&self) -> f64 {
        let lambda_neg = self.lambda_active_min.map_or(0.0, |v| (-v).max(0.0));
        self.gradient
            .max(lambda_neg)
            .max(self.lambda_inactive_max)
            .max(self.mu_plus_zero_max)
            .max(self.nu_zero_plus_max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        map.insert("gradient".to_string(), self.gradient);
        map.insert("lambda_active_min".to_string(), self.lambda_active_min.unwrap_or(0.0));
        map.insert("lambda_inactive_max".to_string(), self.lambda_inactive_max);
        map.insert("mu_plus_zero_max".to_string(), self.mu_plus_zero_max);
        map.insert("nu_zero_plus_max".to_string(), self.nu_zero_plus_max);
        map.insert("max_violation".to_string(), self.max_violation());
        map
    }
}

fn max_abs<'a>(vals: impl Iterator<Item = &'a f64>) -> f64 {
    vals.fold(0.0_f64, |a, v| a.max(v.abs()))
}

pub fn check_stationarity_system(
    data: &FirstOrderData,
    sets: &IndexSets,
    mult: &MultiplierVector,
) -> Result<ResidualReport> {
    data.validate()?;
    mult.check_dims(data)?;

    let mut grad = data.grad_f.clone();
    let mut add = |rows: &[Vec<f64>], coefs: &[f64], sign: f64| {
        for (row, c) in rows.iter().zip(coefs) {
            for (gj, rj) in grad.iter_mut().zip(row) {
                *gj += sign * c * rj;
            }
        }
    };
    add(&data.grad_g, &mult.lambda, 1.0);
    add(&data.grad_h, &mult.eta, 1.0);
    add(&data.grad_comp_g, &mult.mu, -1.0);
    add(&data.grad_comp_h, &mult.nu, -1.0);

    let lambda_active_min = sets
        .active_g
        .iter()
        .map(|&i| mult.lambda[i])
        .min_by(|a, b| a.total_cmp(b));
    let lambda_inactive_max = max_abs(
        mult.lambda
            .iter()
            .enumerate()
            .filter(|(i, _)| !sets.is_active_g(*i))
            .map(|(_, v)| v),
    );
    Ok(ResidualReport {
        gradient: max_abs(grad.iter()),
        lambda_active_min,
        lambda_inactive_max,
        mu_plus_zero_max: max_abs(sets.plus_zero.iter().map(|&i| &mult.mu[i])),
        nu_zero_plus_max: max_abs(sets.zero_plus.iter().map(|&i| &mult.nu[i])),
        biactive: sets
            .zero_zero
            .iter()
            .map(|&i| BiactivePair { index: i, mu: mult.mu[i], nu: mult.nu[i] })
            .collect(),
    })
}

/// Stationarity classes, ordered from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MultiplierClass {
    /// The sign-free system holds but some biactive pair has both signs negative.
    WeakOnly,
    A,
    M,
    S,
}

impl MultiplierClass {
    pub fn label(&self) -> &'static str {
        match self {
            MultiplierClass::WeakOnly => "W-only",
            MultiplierClass::A => "A",
            MultiplierClass::M => "M",
            MultiplierClass::S => "S",
        }
    }
}

/// `(mu > tol && nu > tol) || |mu * nu| <= tol`.
pub fn m_condition(mu: f64, nu: f64, tol: f64) -> bool {
    (mu > tol && nu > tol) || (mu * nu).abs() <= tol
}

fn s_condition(mu: f64, nu: f64, tol: f64) -> bool {
    mu >= -tol && nu >= -tol
}

fn a_condition(mu: f64, nu: f64, tol: f64) -> bool {
    mu >= -tol || nu >= -tol
}

/// Strongest class whose condition holds for one biactive pair. Each level
/// includes the stronger ones, and M additionally requires the A signs, so
/// the result is monotone even where the tolerance bands of the raw
/// conditions do not nest (`mu = -1.5e-7, nu = -0.5` has a product below
/// `tol` but is not A).
pub fn pair_class(mu: f64, nu: f64, tol: f64) -> MultiplierClass {
    if s_condition(mu, nu, tol) {
        MultiplierClass::S
    } else if m_condition(mu, nu, tol) && a_condition(mu, nu, tol) {
        MultiplierClass::M
    } else if a_condition(mu, nu, tol) {
        MultiplierClass::A
    } else {
        MultiplierClass::WeakOnly
    }
}

/// Biactive indices where the raw tolerance conditions fail to nest, e.g.
/// `mu = 5e-8, nu = 5` with `tol = 1e-7` satisfies the S signs but neither M
/// disjunct. Such pairs are classified by their strongest class and listed here.
pub fn tolerance_gaps(sets: &IndexSets, mult: &MultiplierVector, tol: f64) -> Vec<usize> {
    sets.zero_zero
        .iter()
        .copied()
        .filter(|&i| {
            let (mu, nu) = (mult.mu[i], mult.nu[i]);
            let s = s_condition(mu, nu, tol);
            let m = m_condition(mu, nu, tol);
            let a = a_condition(mu, nu, tol);
            (s && !m) || (m && !a)
        })
        .collect()
}

/// Strongest of S, M, A (or W-only) certified by `mult`. Errors with
/// `SystemViolated` if the sign-free conditions fail beyond `tol`.
pub fn classify_multiplier(
    data: &FirstOrderData,
    sets: &IndexSets,
    mult: &MultiplierVector,
    tol: f64,
) -> Result<MultiplierClass> {
    let report = check_stationarity_system(data, sets, mult)?;
    if !report.within(tol) {
        return Err(Error::SystemViolated { max_residual: report.max_violation() });
    }
    Ok(report
        .biactive
        .iter()
        .map(|pair| pair_class(pair.mu, pair.nu, tol))
        .min()
        .unwrap_or(MultiplierClass::S))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BranchMultipliers {
    Feasible(MultiplierVector),
    /// `-grad f` is not in the polar of this branch cone; `separator` is a
    /// branch-cone direction with `-grad f^T d = value > 0`.
    Infeasible { separator: Vec<f64>, value: f64 },
}

/// Multipliers for one branch: `-grad f` expressed in the polar of the branch
/// cone for `alpha`.
pub fn synthesize_branch_multipliers(
    data: &FirstOrderData,
    sets: &IndexSets,
    alpha: &BranchAssignment,
    settings: &SolverSettings,
) -> Result<BranchMultipliers> {
    let cone = LinearizedCone::new(data, sets)?;
    let w: Vec<f64> = data.grad_f.iter().map(|v| -v).collect();
    Ok(match polar_branch_membership(&cone, alpha, &w, settings)? {
        PolarMembership::Member(m) => BranchMultipliers::Feasible(m),
        PolarMembership::NotInPolar { separator, value } => BranchMultipliers::Infeasible { separator, value },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchMinimum {
    pub alpha: BranchAssignment,
    pub norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub multipliers: MultiplierVector,
    /// Weights over the input points, in input order.
    pub weights: Vec<f64>,
    /// Minimum squared `(mu, nu)`-norm per branch, in lexicographic branch order.
    pub branch_minima: Vec<BranchMinimum>,
    pub selected: BranchAssignment,
}

/// Combines one multiplier per branch into a point satisfying the M condition
/// on `biactive`.
///
/// `points` must contain exactly one entry for every assignment over the
/// biactive indices, and each point's `(mu, nu)` must lie in its own sign
/// region within `cert_tol`. The norm is taken over `(mu, nu)` only; `lambda`
/// and `eta` follow with the same weights.
pub fn schinabeck_combine(
    points: &[(MultiplierVector, BranchAssignment)],
    biactive: &[usize],
    cert_tol: f64,
    settings: &SolverSettings,
) -> Result<Combination> {
    let Some((first, _)) = points.first() else {
        return Err(Error::InvalidInput("no points to combine".into()));
    };
    let p = first.p();
    if points.iter().any(|(m, a)| !m.same_shape(first) || a.len() != p) {
        return Err(Error::InvalidInput("points have inconsistent dimensions".into()));
    }
    if biactive.windows(2).any(|w| w[0] >= w[1]) || biactive.iter().any(|&i| i >= p) {
        return Err(Error::InvalidInput("biactive indices must be sorted, distinct and < p".into()));
    }
    let expected = 1usize.checked_shl(biactive.len() as u32).unwrap_or(0);
    let mut by_pattern: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for (k, (m, alpha)) in points.iter().enumerate() {
        let pattern = alpha.restricted(biactive);
        if by_pattern.insert(pattern, k).is_some() {
            return Err(Error::InvalidInput(format!("branch {alpha} given more than once")));
        }
        for &i in biactive {
            let signed = if alpha.choice(i) == 1 { m.mu[i] } else { m.nu[i] };
            if signed < -cert_tol {
                return Err(Error::InvalidInput(format!(
                    "point for branch {alpha} violates its sign region at index {}",
                    i + 1
                )));
            }
        }
    }
    if by_pattern.len() != expected {
        return Err(Error::InvalidInput(format!(
            "expected {expected} branch points, got {}",
            by_pattern.len()
        )));
    }

    let vertices: Vec<Vec<f64>> = points.iter().map(|(m, _)| m.mu_nu()).collect();
    let branches: Vec<usize> = by_pattern.values().copied().collect();
    let minima = branches
        .par_iter()
        .map(|&k| {
            let alpha = &points[k].1;
            let nonnegative = biactive
                .iter()
                .map(|&i| if alpha.choice(i) == 1 { i } else { p + i })
                .collect();
            let prob = MinNormProblem { vertices: vertices.clone(), nonnegative };
            min_norm_point(&prob, settings)?.solved().ok_or_else(|| {
                Error::NumericalFailure(format!("branch {alpha}: sign region empty despite its own point"))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Branches whose minimum norm ties the largest one (up to rounding), in
    // lexicographic order; the first that passes the M check is selected.
    let top = minima.iter().map(|m| m.norm_sq).fold(f64::NEG_INFINITY, f64::max);
    let near_top = |norm_sq: f64| norm_sq >= top - 1e-9 * top.max(1.0);
    let holds = |point: &[f64]| biactive.iter().all(|&i| m_condition(point[i], point[p + i], cert_tol));
    let chosen = (0..branches.len())
        .filter(|&c| near_top(minima[c].norm_sq))
        .find(|&c| holds(&minima[c].point))
        .ok_or_else(|| {
            Error::PostconditionViolated(format!(
                "no branch minimum of maximal norm satisfies the M condition at cert_tol {cert_tol:e}"
            ))
        })?;

    let weights = minima[chosen].weights.clone();
    let refs: Vec<&MultiplierVector> = points.iter().map(|(m, _)| m).collect();
    Ok(Combination {
        multipliers: MultiplierVector::combine(&refs, &weights),
        weights,
        branch_minima: branches
            .iter()
            .zip(&minima)
            .map(|(&k, min)| BranchMinimum { alpha: points[k].1.clone(), norm_sq: min.norm_sq })
            .collect(),
        selected: points[branches[chosen]].1.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub tol: Tolerances,
    /// Largest biactive set for which all `2^k` branches are enumerated.
    pub branch_cap: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), branch_cap: 12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    M,
    S,
    BranchInfeasible,
    NumericalFailure,
}

impl VerdictKind {
    pub fn label(&self) -> &'static str {
        match self {
            VerdictKind::M => "M",
            VerdictKind::S => "S",
            VerdictKind::BranchInfeasible => "BranchInfeasible",
            VerdictKind::NumericalFailure => "NumericalFailure",
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, VerdictKind::M | VerdictKind::S)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub alpha: BranchAssignment,
    pub outcome: BranchMultipliers,
}

impl BranchRecord {
    pub fn multipliers(&self) -> Option<&MultiplierVector> {
        match &self.outcome {
            BranchMultipliers::Feasible(m) => Some(m),
            BranchMultipliers::Infeasible { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityVerdict {
    pub kind: VerdictKind,
    pub witness: Option<MultiplierVector>,
    pub failed_branch: Option<BranchAssignment>,
    pub residuals: BTreeMap<String, f64>,
    pub sets: IndexSets,
    /// One record per branch, in lexicographic order.
    pub branches: Vec<BranchRecord>,
    pub combination: Option<Combination>,
    pub note: Option<String>,
}

/// Certifies M-stationarity of the point described by `data`.
///
/// Enumerates the `2^|I^00|` branches, solves one polar LP per branch and, if
/// all succeed, combines the branch multipliers. A failed branch is reported
/// as `BranchInfeasible` naming the first such branch; this happens exactly
/// when the point is not a local minimizer satisfying MPCC-GCQ, though the two
/// causes cannot be told apart from first-order data.
///
/// With an empty biactive set the verdict is `M`; `S` is reported only when
/// the witness also has nonnegative biactive multipliers on a nonempty set.
pub fn certify_m_stationarity(data: &FirstOrderData, opts: &CertifyOptions) -> Result<StationarityVerdict> {
    let tol = &opts.tol;
    data.validate()?;
    tol.validate()?;
    let feas = check_feasibility(data, tol);
    if !feas.feasible {
        return Err(Error::InfeasiblePoint {
            worst: feas.worst.expect("infeasible report names a constraint"),
            violation: feas.max_violation,
        });
    }
    let sets = classify_indices(data, tol)?;
    let biactive = sets.zero_zero.clone();
    if biactive.len() > opts.branch_cap {
        return Err(Error::BranchBudgetExceeded { biactive: biactive.len(), cap: opts.branch_cap });
    }

    let settings = SolverSettings::with_tol(tol.solver_tol);
    let alphas = BranchAssignment::enumerate(data.p, &biactive);
    let branches = alphas
        .into_par_iter()
        .map(|alpha| {
            let outcome = synthesize_branch_multipliers(data, &sets, &alpha, &settings)?;
            Ok(BranchRecord { alpha, outcome })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut verdict = StationarityVerdict {
        kind: VerdictKind::BranchInfeasible,
        witness: None,
        failed_branch: None,
        residuals: BTreeMap::new(),
        sets,
        branches,
        combination: None,
        note: None,
    };

    if let Some(failed) = verdict.branches.iter().find(|b| b.multipliers().is_none()) {
        verdict.failed_branch = Some(failed.alpha.clone());
        return Ok(verdict);
    }

    let points: Vec<(MultiplierVector, BranchAssignment)> = verdict
        .branches
        .iter()
        .map(|b| (b.multipliers().expect("all branches feasible").clone(), b.alpha.clone()))
        .collect();
    let combination = match schinabeck_combine(&points, &biactive, tol.cert_tol, &settings) {
        Ok(c) => c,
        Err(Error::PostconditionViolated(msg)) => {
            verdict.kind = VerdictKind::NumericalFailure;
            verdict.note = Some(msg);
            return Ok(verdict);
        }
        Err(e) => return Err(e),
    };

    let witness = combination.multipliers.clone();
    let report = check_stationarity_system(data, &verdict.sets, &witness)?;
    verdict.residuals = report.to_map();
    let class = report
        .biactive
        .iter()
        .map(|pair| pair_class(pair.mu, pair.nu, tol.cert_tol))
        .min();
    if !report.within(tol.cert_tol) || class.is_some_and(|c| c < MultiplierClass::M) {
        verdict.kind = VerdictKind::NumericalFailure;
        verdict.note = Some(format!(
            "combined witness fails verification (max residual {:e})",
            report.max_violation()
        ));
        verdict.combination = Some(combination);
        return Ok(verdict);
    }

    let strong = class == Some(MultiplierClass::S);
    verdict.kind = if strong { VerdictKind::S } else { VerdictKind::M };
    verdict.witness = Some(witness);
    verdict.combination = Some(combination);
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corner(grad_f: Vec<f64>) -> FirstOrderData {
        FirstOrderData::unconstrained(grad_f).with_complementarity(
            vec![0.0],
            vec![vec![1.0, 0.0]],
            vec![0.0],
            vec![vec![0.0, 1.0]],
        )
    }

    fn mv(mu: f64, nu: f64) -> MultiplierVector {
        MultiplierVector { lambda: vec![], eta: vec![], mu: vec![mu], nu: vec![nu] }
    }

    fn alpha(c: u8) -> BranchAssignment {
        BranchAssignment::new(vec![c]).unwrap()
    }

    fn sets_of(data: &FirstOrderData) -> IndexSets {
        classify_indices(data, &Tolerances::default()).unwrap()
    }

    #[test]
    fn residual_examples() {
        let data = corner(vec![1.0, 1.0]);
        let sets = sets_of(&data);
        let r = check_stationarity_system(&data, &sets, &mv(1.0, 1.0)).unwrap();
        assert_eq!(r.max_violation(), 0.0);
        let r = check_stationarity_system(&data, &sets, &mv(0.0, 0.0)).unwrap();
        assert_eq!(r.gradient, 1.0);

        let data = FirstOrderData::unconstrained(vec![1.0]).with_inequalities(vec![0.0], vec![vec![1.0]]);
        let sets = sets_of(&data);
        let m = MultiplierVector { lambda: vec![-1.0], eta: vec![], mu: vec![], nu: vec![] };
        let r = check_stationarity_system(&data, &sets, &m).unwrap();
        assert_eq!(r.lambda_active_min, Some(-1.0));
        assert_eq!(r.max_violation(), 1.0);
    }

    #[test]
    fn classify_examples() {
        // grad f chosen so each multiplier pair satisfies the gradient identity.
        let tol = 1e-7;
        let cases = [
            ((1.0, 1.0), MultiplierClass::S),
            ((0.0, -5.0), MultiplierClass::M),
            ((0.5, -0.5), MultiplierClass::A),
            ((-0.5, -0.5), MultiplierClass::WeakOnly),
        ];
        for ((mu, nu), expected) in cases {
            let data = corner(vec![mu, nu]);
            let sets = sets_of(&data);
            assert_eq!(classify_multiplier(&data, &sets, &mv(mu, nu), tol).unwrap(), expected);
        }
        let data = corner(vec![1.0, 1.0]);
        let sets = sets_of(&data);
        assert!(matches!(
            classify_multiplier(&data, &sets, &mv(0.0, 0.0), tol),
            Err(Error::SystemViolated { .. })
        ));
    }

    #[test]
    fn tolerance_gap_is_reported() {
        let data = corner(vec![5e-8, 5.0]);
        let sets = sets_of(&data);
        let m = mv(5e-8, 5.0);
        assert_eq!(classify_multiplier(&data, &sets, &m, 1e-7).unwrap(), MultiplierClass::S);
        assert_eq!(tolerance_gaps(&sets, &m, 1e-7), vec![0]);
        assert!(tolerance_gaps(&sets, &mv(1.0, 1.0), 1e-7).is_empty());
    }

    #[test]
    fn synthesize_examples() {
        let s = SolverSettings::default();
        let data = corner(vec![1.0, 1.0]);
        let sets = sets_of(&data);
        for c in [1, 2] {
            match synthesize_branch_multipliers(&data, &sets, &alpha(c), &s).unwrap() {
                BranchMultipliers::Feasible(m) => {
                    assert!((m.mu[0] - 1.0).abs() < 1e-12 && (m.nu[0] - 1.0).abs() < 1e-12)
                }
                other => panic!("{other:?}"),
            }
        }

        let data = corner(vec![0.0, 0.0]);
        let sets = sets_of(&data);
        for c in [1, 2] {
            assert_eq!(
                synthesize_branch_multipliers(&data, &sets, &alpha(c), &s).unwrap(),
                BranchMultipliers::Feasible(mv(0.0, 0.0))
            );
        }

        let data = corner(vec![-1.0, 0.0]);
        let sets = sets_of(&data);
        match synthesize_branch_multipliers(&data, &sets, &alpha(2), &s).unwrap() {
            BranchMultipliers::Feasible(m) => {
                assert!((m.mu[0] + 1.0).abs() < 1e-12 && m.nu[0].abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            synthesize_branch_multipliers(&data, &sets, &alpha(1), &s).unwrap(),
            BranchMultipliers::Infeasible { .. }
        ));
    }

    fn combine2(a: (f64, f64), b: (f64, f64)) -> Combination {
        let points = vec![(mv(a.0, a.1), alpha(1)), (mv(b.0, b.1), alpha(2))];
        schinabeck_combine(&points, &[0], 1e-7, &SolverSettings::default()).unwrap()
    }

    #[test]
    fn combine_examples() {
        let c = combine2((1.0, -1.0), (-1.0, 1.0));
        assert!(c.multipliers.mu[0].abs() < 1e-12 && c.multipliers.nu[0].abs() < 1e-12);

        let c = combine2((2.0, 1.0), (2.0, 1.0));
        assert!((c.multipliers.mu[0] - 2.0).abs() < 1e-12 && (c.multipliers.nu[0] - 1.0).abs() < 1e-12);

        let c = combine2((3.0, -2.0), (-1.0, 4.0));
        assert!((c.multipliers.mu[0] - 15.0 / 13.0).abs() < 1e-12);
        assert!((c.multipliers.nu[0] - 10.0 / 13.0).abs() < 1e-12);
        assert_eq!(c.branch_minima.len(), 2);
        for min in &c.branch_minima {
            assert!((min.norm_sq - 325.0 / 169.0).abs() < 1e-12);
        }
        // Exact tie: the lexicographically smallest branch wins.
        assert_eq!(c.selected, alpha(1));
    }

    #[test]
    fn combine_rejects_bad_inputs() {
        let s = SolverSettings::default();
        let dup = vec![(mv(1.0, 1.0), alpha(1)), (mv(1.0, 1.0), alpha(1))];
        assert!(matches!(schinabeck_combine(&dup, &[0], 1e-7, &s), Err(Error::InvalidInput(_))));
        let missing = vec![(mv(1.0, 1.0), alpha(1))];
        assert!(matches!(schinabeck_combine(&missing, &[0], 1e-7, &s), Err(Error::InvalidInput(_))));
        let wrong_sign = vec![(mv(-1.0, 1.0), alpha(1)), (mv(1.0, 1.0), alpha(2))];
        assert!(matches!(schinabeck_combine(&wrong_sign, &[0], 1e-7, &s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn certify_examples() {
        let opts = CertifyOptions::default();
        let v = certify_m_stationarity(&corner(vec![1.0, 1.0]), &opts).unwrap();
        assert_eq!(v.kind, VerdictKind::S);
        let w = v.witness.unwrap();
        assert!((w.mu[0] - 1.0).abs() < 1e-9 && (w.nu[0] - 1.0).abs() < 1e-9);
        assert_eq!(v.branches.len(), 2);

        let kkt = FirstOrderData::unconstrained(vec![1.0]).with_inequalities(vec![0.0], vec![vec![-1.0]]);
        let v = certify_m_stationarity(&kkt, &opts).unwrap();
        assert_eq!(v.kind, VerdictKind::M);
        assert!((v.witness.unwrap().lambda[0] - 1.0).abs() < 1e-12);
        assert_eq!(v.branches.len(), 1);

        let v = certify_m_stationarity(&corner(vec![-1.0, 0.0]), &opts).unwrap();
        assert_eq!(v.kind, VerdictKind::BranchInfeasible);
        assert_eq!(v.failed_branch, Some(alpha(1)));
        assert!(v.witness.is_none());
    }

    #[test]
    fn certify_errors() {
        let infeasible = FirstOrderData::unconstrained(vec![1.0, 1.0]).with_complementarity(
            vec![1.0],
            vec![vec![1.0, 0.0]],
            vec![1.0],
            vec![vec![0.0, 1.0]],
        );
        assert!(matches!(
            certify_m_stationarity(&infeasible, &CertifyOptions::default()),
            Err(Error::InfeasiblePoint { .. })
        ));
        let opts = CertifyOptions { branch_cap: 0, ..CertifyOptions::default() };
        assert!(matches!(
            certify_m_stationarity(&corner(vec![1.0, 1.0]), &opts),
            Err(Error::BranchBudgetExceeded { biactive: 1, cap: 0 })
        ));
    }
}
