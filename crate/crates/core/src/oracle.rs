//! Brute-force verifiers that do not share code paths with the certification
//! pipeline: sign-pattern enumeration for M-stationarity, a simplex grid for
//! the combination step, and ray sampling of the tangent cone for affine data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cones::{BranchAssignment, LinearizedCone};
use crate::error::{check_len, Error, Result};
use crate::model::{
    check_feasibility, classify_indices, evaluate_affine, AffineInstance, FirstOrderData, IndexSets, ProblemData,
    Tolerances,
};
use crate::solvers::{lp_feasible, project_to_nullspace, Bound, SolverSettings};
use crate::stationarity::{m_condition, MultiplierVector};

/// Largest biactive set the pattern oracle enumerates (`3^8` LPs).
pub const PATTERN_BUDGET: usize = 8;

/// One disjunct of the M condition for a biactive pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pattern {
    BothPositive,
    MuZero,
    NuZero,
}

/// A pattern per biactive index, as `(index, pattern)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternAssignment(pub Vec<(usize, Pattern)>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub exists: bool,
    pub witness: Option<MultiplierVector>,
    pub pattern: Option<PatternAssignment>,
    /// Strictness margin used in `BothPositive` patterns when the witness was found.
    pub epsilon: Option<f64>,
    pub lps_solved: usize,
}

/// Requirement placed on one biactive pair in the pattern LP.
#[derive(Clone, Copy)]
enum PairRule {
    Pattern(Pattern, f64),
    BothNonneg,
}

/// LP over `(lambda, eta, mu, nu)` for the sign-free stationarity system plus
/// the given biactive rules.
fn stationarity_lp(
    data: &FirstOrderData,
    sets: &IndexSets,
    rules: &[(usize, PairRule)],
    settings: &SolverSettings,
) -> Result<Option<MultiplierVector>> {
    let (l, m, p, n) = (data.l, data.m, data.p, data.n);
    let mut bounds = Vec::with_capacity(l + m + 2 * p);
    for i in 0..l {
        bounds.push(if sets.is_active_g(i) { Bound::NONNEG } else { Bound::fixed(0.0) });
    }
    bounds.extend(std::iter::repeat_n(Bound::FREE, m));
    let mut mu_bounds = vec![Bound::FREE; p];
    let mut nu_bounds = vec![Bound::FREE; p];
    for &i in &sets.plus_zero {
        mu_bounds[i] = Bound::fixed(0.0);
    }
    for &i in &sets.zero_plus {
        nu_bounds[i] = Bound::fixed(0.0);
    }
    for &(i, rule) in rules {
        match rule {
            PairRule::Pattern(Pattern::BothPositive, eps) => {
                mu_bounds[i] = Bound::at_least(eps);
                nu_bounds[i] = Bound::at_least(eps);
            }
            PairRule::Pattern(Pattern::MuZero, _) => mu_bounds[i] = Bound::fixed(0.0),
            PairRule::Pattern(Pattern::NuZero, _) => nu_bounds[i] = Bound::fixed(0.0),
            PairRule::BothNonneg => {
                mu_bounds[i] = Bound::NONNEG;
                nu_bounds[i] = Bound::NONNEG;
            }
        }
    }
    bounds.extend(mu_bounds);
    bounds.extend(nu_bounds);

    let eq: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            data.grad_g
                .iter()
                .map(|g| g[r])
                .chain(data.grad_h.iter().map(|h| h[r]))
                .chain(data.grad_comp_g.iter().map(|g| -g[r]))
                .chain(data.grad_comp_h.iter().map(|h| -h[r]))
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = data.grad_f.iter().map(|v| -v).collect();
    let out = lp_feasible(eq, rhs, vec![], vec![], bounds, settings)?;
    Ok(out.solution.map(|z| MultiplierVector {
        lambda: z[..l].to_vec(),
        eta: z[l..l + m].to_vec(),
        mu: z[l + m..l + m + p].to_vec(),
        nu: z[l + m + p..].to_vec(),
    }))
}

/// Decides existence of an M-multiplier by trying every assignment of
/// `{BothPositive, MuZero, NuZero}` to the biactive indices. `BothPositive`
/// is encoded as `mu_i, nu_i >= eps`, first with `eps = tol`, then `tol / 10`.
pub fn oracle_m_exists(
    data: &FirstOrderData,
    sets: &IndexSets,
    tol: f64,
    settings: &SolverSettings,
) -> Result<OracleVerdict> {
    data.validate()?;
    let biactive = &sets.zero_zero;
    if biactive.len() > PATTERN_BUDGET {
        return Err(Error::PatternBudgetExceeded { biactive: biactive.len(), cap: PATTERN_BUDGET });
    }
    let k = biactive.len();
    let total = 3usize.pow(k as u32);
    let choices = [Pattern::BothPositive, Pattern::MuZero, Pattern::NuZero];
    let mut lps_solved = 0;
    for eps in [tol, tol / 10.0] {
        for code in 0..total {
            let mut rest = code;
            let mut assignment = vec![(0, Pattern::BothPositive); k];
            for pos in (0..k).rev() {
                assignment[pos] = (biactive[pos], choices[rest % 3]);
                rest /= 3;
            }
            let rules: Vec<(usize, PairRule)> =
                assignment.iter().map(|&(i, pat)| (i, PairRule::Pattern(pat, eps))).collect();
            lps_solved += 1;
            if let Some(witness) = stationarity_lp(data, sets, &rules, settings)? {
                return Ok(OracleVerdict {
                    exists: true,
                    witness: Some(witness),
                    pattern: Some(PatternAssignment(assignment)),
                    epsilon: Some(eps),
                    lps_solved,
                });
            }
        }
    }
    Ok(OracleVerdict { exists: false, witness: None, pattern: None, epsilon: None, lps_solved })
}

/// Multipliers with `mu_i, nu_i >= 0` on the biactive set, if any exist.
pub fn oracle_s_exists(
    data: &FirstOrderData,
    sets: &IndexSets,
    settings: &SolverSettings,
) -> Result<Option<MultiplierVector>> {
    data.validate()?;
    let rules: Vec<(usize, PairRule)> = sets.zero_zero.iter().map(|&i| (i, PairRule::BothNonneg)).collect();
    stationarity_lp(data, sets, &rules, settings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHit {
    /// Combined `(mu, nu)` point.
    pub point: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Scans convex weights on a simplex grid of spacing `grid_step` and returns
/// the smallest-norm combination of `points` (each `(mu, nu)` of length `2p`)
/// satisfying the M condition on `biactive` within `tol`.
///
/// The grid has `C(N + K - 1, K - 1)` nodes for `N = 1 / grid_step` and `K`
/// points, so keep `K` at four or fewer.
pub fn oracle_combiner_grid(points: &[Vec<f64>], biactive: &[usize], grid_step: f64, tol: f64) -> Option<GridHit> {
    let k = points.len();
    if k == 0 || !(grid_step > 0.0 && grid_step <= 1.0) {
        return None;
    }
    let dim = points[0].len();
    let p = dim / 2;
    let steps = (1.0 / grid_step).round() as usize;
    let mut counts = vec![0usize; k];
    let mut best: Option<(f64, GridHit)> = None;

    fn visit(
        pos: usize,
        remaining: usize,
        counts: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if pos + 1 == counts.len() {
            counts[pos] = remaining;
            f(counts);
            return;
        }
        for c in 0..=remaining {
            counts[pos] = c;
            visit(pos + 1, remaining - c, counts, f);
        }
    }

    let mut point = vec![0.0; dim];
    visit(0, steps, &mut counts, &mut |counts: &[usize]| {
        point.iter_mut().for_each(|x| *x = 0.0);
        for (c, v) in counts.iter().zip(points) {
            if *c > 0 {
                let w = *c as f64 / steps as f64;
                for (x, vi) in point.iter_mut().zip(v) {
                    *x += w * vi;
                }
            }
        }
        if biactive.iter().all(|&i| m_condition(point[i], point[p + i], tol)) {
            let norm: f64 = point.iter().map(|x| x * x).sum();
            if best.as_ref().is_none_or(|(b, _)| norm < *b) {
                let weights = counts.iter().map(|&c| c as f64 / steps as f64).collect();
                best = Some((norm, GridHit { point: point.clone(), weights }));
            }
        }
    });
    best.map(|(_, hit)| hit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentMismatch {
    pub direction: Vec<f64>,
    pub tangent: bool,
    pub linearized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentProbeReport {
    pub directions: usize,
    pub tangent: usize,
    pub linearized: usize,
    pub mismatches: Vec<TangentMismatch>,
}

/// Decides whether `x_bar + t d` stays feasible along `t_k = t0 * 10^-k`,
/// `k = 0..4`, allowing violations of `tol * t_k` beyond those at `x_bar`.
pub fn ray_is_feasible(inst: &AffineInstance, x_bar: &[f64], d: &[f64], t0: f64, tol: f64) -> Result<bool> {
    let base = check_feasibility(&evaluate_affine(inst, x_bar)?, &Tolerances::default()).max_violation;
    for k in 0..4 {
        let t = t0 * 10f64.powi(-k);
        let x: Vec<f64> = x_bar.iter().zip(d).map(|(xi, di)| xi + t * di).collect();
        let data = evaluate_affine(inst, &x)?;
        let tolerances = Tolerances { feas_tol: base + tol * t, ..Tolerances::default() };
        if !check_feasibility(&data, &tolerances).feasible {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Step length below which constraints inactive at `x_bar` stay inactive
/// for unit directions.
fn safe_step(inst: &AffineInstance, data: &FirstOrderData, sets: &IndexSets) -> f64 {
    let row_norm = |r: &Vec<f64>| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let max_norm = inst
        .a_g
        .iter()
        .chain(&inst.a_comp_g)
        .chain(&inst.a_comp_h)
        .map(row_norm)
        .fold(0.0_f64, f64::max);
    let mut slack = f64::INFINITY;
    for (i, g) in data.g_vals.iter().enumerate() {
        if !sets.is_active_g(i) {
            slack = slack.min(-g);
        }
    }
    for &i in &sets.plus_zero {
        slack = slack.min(data.comp_g_vals[i]);
    }
    for &i in &sets.zero_plus {
        slack = slack.min(data.comp_h_vals[i]);
    }
    (0.5 * slack / (1.0 + max_norm)).min(1.0)
}

/// Samples directions at a feasible point of an affine instance and compares
/// ray feasibility (the tangent cone, exact for affine constraints) with the
/// linearized-cone test. Half of the directions are uniform on the sphere;
/// the other half are projected onto a random branch's equality subspace so
/// that tangent directions actually occur.
pub fn oracle_tangent_sample(
    inst: &AffineInstance,
    x_bar: &[f64],
    directions: usize,
    seed: u64,
    tol: f64,
) -> Result<TangentProbeReport> {
    inst.validate()?;
    check_len("x_bar", inst.n(), x_bar.len())?;
    let data = evaluate_affine(inst, x_bar)?;
    let tolerances = Tolerances { active_tol: tol, feas_tol: tol, ..Tolerances::default() };
    let sets = classify_indices(&data, &tolerances)?;
    let cone = LinearizedCone::new(&data, &sets)?;
    let t0 = safe_step(inst, &data, &sets);
    let n = inst.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = TangentProbeReport { directions, tangent: 0, linearized: 0, mismatches: Vec::new() };

    for s in 0..directions {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut d = raw.clone();
        if s % 2 == 1 {
            let choices = (0..data.p).map(|_| rng.gen_range(1..=2u8)).collect();
            let alpha = BranchAssignment::new(choices)?;
            let sys = cone.branch_system(&alpha)?;
            d = project_to_nullspace(&sys.eq_rows, &raw);
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        d.iter_mut().for_each(|v| *v /= norm);

        let tangent = ray_is_feasible(inst, x_bar, &d, t0, tol)?;
        let linearized = cone.tmpcclin_contains(&d, tol)?;
        report.tangent += tangent as usize;
        report.linearized += linearized as usize;
        if tangent != linearized {
            report.mismatches.push(TangentMismatch { direction: d, tangent, linearized });
        }
    }
    Ok(report)
}

/// As [`oracle_tangent_sample`], for problem data that may not be affine.
pub fn tangent_probe(problem: &ProblemData, directions: usize, seed: u64, tol: f64) -> Result<TangentProbeReport> {
    match problem {
        ProblemData::Affine { instance, x_bar } => oracle_tangent_sample(instance, x_bar, directions, seed, tol),
        ProblemData::PointData(_) => Err(Error::NotAffine),
    }
}
