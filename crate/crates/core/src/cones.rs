//! The MPCC-linearized tangent cone, its convex branch cones, and polar
//! membership of a vector in a branch cone.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{dot, FirstOrderData, IndexSets};
use crate::solvers::{lp_feasible, lp_solve, project_to_nullspace, Bound, LinearProgram, SolverSettings};
use crate::stationarity::MultiplierVector;

/// Per complementarity index, which side keeps its sign in a branch:
/// `1` leaves `mu_i >= 0` (and `grad H_i^T d = 0` in the primal cone),
/// `2` leaves `nu_i >= 0` (and `grad G_i^T d = 0`). Entries outside the
/// biactive set are carried but ignored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BranchAssignment(Vec<u8>);

impl BranchAssignment {
    pub fn new(choices: Vec<u8>) -> Result<Self> {
        if let Some(bad) = choices.iter().find(|c| !matches!(c, 1 | 2)) {
            return Err(Error::InvalidInput(format!("branch entries must be 1 or 2, got {bad}")));
        }
        Ok(Self(choices))
    }

    /// All-ones assignment of length `p`.
    pub fn ones(p: usize) -> Self {
        Self(vec![1; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn choice(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Entries at the given indices.
    pub fn restricted(&self, indices: &[usize]) -> Vec<u8> {
        indices.iter().map(|&i| self.0[i]).collect()
    }

    /// Every assignment over `indices`, with ones elsewhere, in lexicographic
    /// order (first index most significant, 1 before 2).
    pub fn enumerate(p: usize, indices: &[usize]) -> Vec<BranchAssignment> {
        let k = indices.len();
        (0..1usize << k)
            .map(|code| {
                let mut choices = vec![1u8; p];
                for (pos, &i) in indices.iter().enumerate() {
                    if (code >> (k - 1 - pos)) & 1 == 1 {
                        choices[i] = 2;
                    }
                }
                BranchAssignment(choices)
            })
            .collect()
    }
}

impl TryFrom<Vec<u8>> for BranchAssignment {
    type Error = Error;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        BranchAssignment::new(v)
    }
}

impl From<BranchAssignment> for Vec<u8> {
    fn from(a: BranchAssignment) -> Self {
        a.0
    }
}

impl fmt::Display for BranchAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Homogeneous linear system `eq_rows d = 0`, `ge_rows d >= 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConeSystem {
    pub eq_rows: Vec<Vec<f64>>,
    pub ge_rows: Vec<Vec<f64>>,
}

impl ConeSystem {
    pub fn contains(&self, d: &[f64], tol: f64) -> bool {
        self.eq_rows.iter().all(|r| dot(r, d).abs() <= tol) && self.ge_rows.iter().all(|r| dot(r, d) >= -tol)
    }
}

/// View of the linearized cone at a point.
#[derive(Debug, Clone, Copy)]
pub struct LinearizedCone<'a> {
    data: &'a FirstOrderData,
    sets: &'a IndexSets,
}

impl<'a> LinearizedCone<'a> {
    pub fn new(data: &'a FirstOrderData, sets: &'a IndexSets) -> Result<Self> {
        data.validate()?;
        if !sets.partitions(data.p) || sets.active_g.iter().any(|&i| i >= data.l) {
            return Err(Error::InvalidInput("index sets do not match the point data".into()));
        }
        Ok(Self { data, sets })
    }

    pub fn data(&self) -> &'a FirstOrderData {
        self.data
    }

    pub fn sets(&self) -> &'a IndexSets {
        self.sets
    }

    fn check_alpha(&self, alpha: &BranchAssignment) -> Result<()> {
        check_len("branch assignment", self.data.p, alpha.len())
    }

    /// Rows shared by the full cone and every branch cone.
    fn common_system(&self) -> ConeSystem {
        let data = self.data;
        let mut sys = ConeSystem::default();
        for &i in &self.sets.active_g {
            sys.ge_rows.push(data.grad_g[i].iter().map(|v| -v).collect());
        }
        sys.eq_rows.extend(data.grad_h.iter().cloned());
        for &i in &self.sets.zero_plus {
            sys.eq_rows.push(data.grad_comp_g[i].clone());
        }
        for &i in &self.sets.plus_zero {
            sys.eq_rows.push(data.grad_comp_h[i].clone());
        }
        sys
    }

    /// Linear system describing the branch cone for `alpha`.
    pub fn branch_system(&self, alpha: &BranchAssignment) -> Result<ConeSystem> {
        self.check_alpha(alpha)?;
        let mut sys = self.common_system();
        for &i in &self.sets.zero_zero {
            let (g_row, h_row) = (&self.data.grad_comp_g[i], &self.data.grad_comp_h[i]);
            if alpha.choice(i) == 1 {
                sys.eq_rows.push(h_row.clone());
                sys.ge_rows.push(g_row.clone());
            } else {
                sys.eq_rows.push(g_row.clone());
                sys.ge_rows.push(h_row.clone());
            }
        }
        Ok(sys)
    }

    /// Membership in the linearized cone. The biactive product condition is
    /// tested as `|(grad G_i^T d)(grad H_i^T d)| <= tol`.
    pub fn tmpcclin_contains(&self, d: &[f64], tol: f64) -> Result<bool> {
        check_len("direction", self.data.n, d.len())?;
        if !self.common_system().contains(d, tol) {
            return Ok(false);
        }
        Ok(self.sets.zero_zero.iter().all(|&i| {
            let a = dot(&self.data.grad_comp_g[i], d);
            let b = dot(&self.data.grad_comp_h[i], d);
            a >= -tol && b >= -tol && (a * b).abs() <= tol
        }))
    }

    pub fn branch_cone_contains(&self, alpha: &BranchAssignment, d: &[f64], tol: f64) -> Result<bool> {
        check_len("direction", self.data.n, d.len())?;
        Ok(self.branch_system(alpha)?.contains(d, tol))
    }

    /// Maximizes `objective^T d` over the branch cone intersected with the box
    /// `[-1, 1]^n`. The box keeps the LP bounded; the maximizer is a cone
    /// direction.
    pub fn maximize_over_branch(
        &self,
        alpha: &BranchAssignment,
        objective: &[f64],
        settings: &SolverSettings,
    ) -> Result<Vec<f64>> {
        check_len("objective", self.data.n, objective.len())?;
        let sys = self.branch_system(alpha)?;
        let n = self.data.n;
        let mut lp = LinearProgram::new(n);
        lp.objective = objective.iter().map(|v| -v).collect();
        lp.bounds = vec![Bound::between(-1.0, 1.0); n];
        for row in sys.eq_rows {
            lp.add_eq(row, 0.0);
        }
        for row in sys.ge_rows {
            lp.add_ge(row, 0.0);
        }
        lp_solve(&lp, settings)?
            .solution
            .ok_or_else(|| Error::NumericalFailure("box-bounded cone LP has no solution".into()))
    }
}

/// Result of testing `w` against the polar of a branch cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolarMembership {
    /// Multipliers representing `w` as an element of the polar.
    Member(MultiplierVector),
    /// `w` is not in the polar; `separator` is a branch-cone direction in the
    /// unit box maximizing `w^T d`.
    NotInPolar { separator: Vec<f64>, value: f64 },
}

/// Decides whether `w` lies in the polar of the branch cone for `alpha`,
/// i.e. whether
///
/// ```text
/// w = sum_{I^g} lambda_i grad g_i + sum eta_i grad h_i
///     - sum_{I^0+ u I^00} mu_i grad G_i - sum_{I^+0 u I^00} nu_i grad H_i
/// ```
///
/// with `lambda >= 0`, `mu_i >= 0` where `alpha_i = 1` and `nu_i >= 0` where
/// `alpha_i = 2` on the biactive set. Multipliers outside their supports are
/// zero. The returned multipliers are a basic solution of that system.
pub fn polar_branch_membership(
    cone: &LinearizedCone<'_>,
    alpha: &BranchAssignment,
    w: &[f64],
    settings: &SolverSettings,
) -> Result<PolarMembership> {
    let data = cone.data;
    let sets = cone.sets;
    cone.check_alpha(alpha)?;
    check_len("polar candidate", data.n, w.len())?;

    enum Slot {
        Lambda(usize),
        Eta(usize),
        Mu(usize),
        Nu(usize),
    }
    let mut slots = Vec::new();
    let mut bounds = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();

    for &i in &sets.active_g {
        slots.push(Slot::Lambda(i));
        bounds.push(Bound::NONNEG);
        columns.push(data.grad_g[i].clone());
    }
    for i in 0..data.m {
        slots.push(Slot::Eta(i));
        bounds.push(Bound::FREE);
        columns.push(data.grad_h[i].clone());
    }
    for i in 0..data.p {
        let biactive = sets.is_biactive(i);
        if biactive || sets.zero_plus.binary_search(&i).is_ok() {
            slots.push(Slot::Mu(i));
            bounds.push(if biactive && alpha.choice(i) == 1 { Bound::NONNEG } else { Bound::FREE });
            columns.push(data.grad_comp_g[i].iter().map(|v| -v).collect());
        }
        if biactive || sets.plus_zero.binary_search(&i).is_ok() {
            slots.push(Slot::Nu(i));
            bounds.push(if biactive && alpha.choice(i) == 2 { Bound::NONNEG } else { Bound::FREE });
            columns.push(data.grad_comp_h[i].iter().map(|v| -v).collect());
        }
    }

    let eq_matrix: Vec<Vec<f64>> = (0..data.n).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    let out = lp_feasible(eq_matrix, w.to_vec(), vec![], vec![], bounds, settings)?;

    match out.solution {
        Some(z) => {
            let mut mult = MultiplierVector::zeros(data.l, data.m, data.p);
            for (slot, v) in slots.iter().zip(z) {
                match *slot {
                    Slot::Lambda(i) => mult.lambda[i] = v,
                    Slot::Eta(i) => mult.eta[i] = v,
                    Slot::Mu(i) => mult.mu[i] = v,
                    Slot::Nu(i) => mult.nu[i] = v,
                }
            }
            Ok(PolarMembership::Member(mult))
        }
        None => {
            let separator = cone.maximize_over_branch(alpha, w, settings)?;
            let value = dot(w, &separator);
            Ok(PolarMembership::NotInPolar { separator, value })
        }
    }
}

/// Samples random directions, keeps those in the branch cone, and checks each
/// against `member` (normally the linearized-cone test). Returns `false` on the
/// first counterexample.
pub fn branch_cone_inclusion_check_with<F>(
    cone: &LinearizedCone<'_>,
    alpha: &BranchAssignment,
    samples: usize,
    seed: u64,
    member: F,
) -> Result<bool>
where
    F: Fn(&LinearizedCone<'_>, &[f64], f64) -> bool,
{
    const TOL: f64 = 1e-9;
    let sys = cone.branch_system(alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cone.data.n;
    for _ in 0..samples {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = project_to_nullspace(&sys.eq_rows, &raw);
        if sys.contains(&d, TOL) && !member(cone, &d, TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn branch_cone_inclusion_check(
    cone: &LinearizedCone<'_>,
    alpha: &BranchAssignment,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    branch_cone_inclusion_check_with(cone, alpha, samples, seed, |c, d, tol| {
        c.tmpcclin_contains(d, tol).unwrap_or(false)
    })
}
