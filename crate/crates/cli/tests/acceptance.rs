//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{lemma_points, random_affine, uniform_vec, Objective};
use mpcc_cli::ProblemFile;
use mpcc_core::cones::{polar_branch_membership, PolarMembership};
use mpcc_core::oracle::{oracle_m_exists, oracle_s_exists, oracle_tangent_sample};
use mpcc_core::solvers::{min_norm_point, MinNormProblem, SolverSettings};
use mpcc_core::stationarity::m_condition;
use mpcc_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CERT_TOL: f64 = 1e-7;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn settings() -> SolverSettings {
    SolverSettings::default()
}

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn load(name: &str) -> FirstOrderData {
    ProblemFile::from_path(&data_file(name)).unwrap().data().unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// 1. Combiner postcondition on random lemma instances.
fn lemma_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..500 {
        let p = rng.gen_range(1..=5);
        let points = lemma_points(&mut rng, p);
        let all: Vec<usize> = (0..p).collect();
        let out = schinabeck_combine(&points, &all, CERT_TOL, &settings())
            .map_err(|e| format!("case {case} (p = {p}): {e}"))?;
        let w = &out.weights;
        ensure!(w.iter().all(|&x| x >= -1e-9), "case {case}: negative weight in {w:?}");
        let total: f64 = w.iter().sum();
        ensure!((total - 1.0).abs() <= 1e-9, "case {case}: weights sum to {total}");
        let m = &out.multipliers;
        for i in 0..p {
            // Recombine independently of the library.
            let mu: f64 = points.iter().zip(w).map(|((pt, _), wk)| wk * pt.mu[i]).sum();
            let nu: f64 = points.iter().zip(w).map(|((pt, _), wk)| wk * pt.nu[i]).sum();
            ensure!(
                (mu - m.mu[i]).abs() <= 1e-9 && (nu - m.nu[i]).abs() <= 1e-9,
                "case {case}: output is not the weighted combination at index {i}"
            );
            let ok = (mu > CERT_TOL && nu > CERT_TOL) || (mu * nu).abs() <= CERT_TOL;
            ensure!(ok, "case {case}: index {i} fails the sign condition with ({mu}, {nu})");
        }
    }
    Ok("500/500 instances combined, p in 1..=5".into())
}

/// 2. Certification on random affine instances against the pattern oracle.
fn theorem_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let objectives = [Objective::Random, Objective::StrongMultiplier, Objective::MZeroMultiplier];
    let opts = CertifyOptions::default();
    let (mut certified, mut branch_infeasible) = (0, 0);
    for case in 0..200 {
        let inst = random_affine(&mut rng, 6, 3, 3, 4, objectives[case % 3]);
        let data = evaluate_affine(&inst, &vec![0.0; inst.n()]).map_err(|e| e.to_string())?;
        let verdict = certify_m_stationarity(&data, &opts).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(!verdict.sets.zero_zero.is_empty(), "case {case}: generator produced no biactive index");
        let all_feasible = verdict.branches.iter().all(|b| b.multipliers().is_some());
        if !all_feasible {
            ensure!(verdict.kind == VerdictKind::BranchInfeasible, "case {case}: {:?} with an infeasible branch", verdict.kind);
            branch_infeasible += 1;
            continue;
        }
        ensure!(verdict.kind.is_stationary(), "case {case}: all branches feasible but verdict {:?} ({:?})", verdict.kind, verdict.note);
        let w = verdict.witness.as_ref().ok_or(format!("case {case}: no witness"))?;
        let res = check_stationarity_system(&data, &verdict.sets, w).map_err(|e| e.to_string())?;
        ensure!(res.max_violation() <= CERT_TOL, "case {case}: residual {:e}", res.max_violation());
        for pair in &res.biactive {
            ensure!(m_condition(pair.mu, pair.nu, CERT_TOL), "case {case}: witness fails the sign condition");
        }
        let oracle = oracle_m_exists(&data, &verdict.sets, CERT_TOL, &settings()).map_err(|e| e.to_string())?;
        ensure!(oracle.exists, "case {case}: pattern oracle finds no M-multiplier");
        certified += 1;
    }
    ensure!(certified >= 50, "only {certified} instances had all branches feasible");
    Ok(format!("{certified} certified and oracle-confirmed, {branch_infeasible} with an infeasible branch"))
}

/// 3. Curated instances.
fn curated() -> Check {
    let opts = CertifyOptions::default();

    let data = load("corner_s.json");
    let v = certify_m_stationarity(&data, &opts).map_err(|e| e.to_string())?;
    ensure!(v.kind == VerdictKind::S, "(a) verdict {:?}", v.kind);
    let w = v.witness.unwrap();
    ensure!((w.mu[0] - 1.0).abs() <= 1e-9 && (w.nu[0] - 1.0).abs() <= 1e-9, "(a) witness {w:?}");

    let data = load("corner_descent.json");
    let v = certify_m_stationarity(&data, &opts).map_err(|e| e.to_string())?;
    ensure!(v.kind == VerdictKind::BranchInfeasible, "(b) verdict {:?}", v.kind);
    let failed = v.failed_branch.unwrap();
    ensure!(failed.as_slice() == [1], "(b) failed branch {:?}", failed.as_slice());

    let data = load("m_not_s.json");
    let v = certify_m_stationarity(&data, &opts).map_err(|e| e.to_string())?;
    ensure!(v.kind == VerdictKind::M, "(c) verdict {:?}", v.kind);
    let oracle = oracle_m_exists(&data, &v.sets, CERT_TOL, &settings()).map_err(|e| e.to_string())?;
    ensure!(oracle.exists, "(c) pattern oracle finds no M-multiplier");
    let strong = oracle_s_exists(&data, &v.sets, &settings()).map_err(|e| e.to_string())?;
    ensure!(strong.is_none(), "(c) nonnegative biactive multipliers exist: {strong:?}");
    Ok("(a) S with mu = nu = 1, (b) BranchInfeasible at (1), (c) M, oracle-confirmed, not S".into())
}

/// 4. Polar membership certificates checked against sampled cone directions.
fn polar_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut members, mut separated) = (0, 0);
    for case in 0..100 {
        let inst = random_affine(&mut rng, 5, 3, 2, 3, Objective::Random);
        let data = evaluate_affine(&inst, &vec![0.0; inst.n()]).map_err(|e| e.to_string())?;
        let sets = classify_indices(&data, &Tolerances::default()).map_err(|e| e.to_string())?;
        let cone = LinearizedCone::new(&data, &sets).map_err(|e| e.to_string())?;
        let alphas = BranchAssignment::enumerate(data.p, &sets.zero_zero);
        let alpha = alphas[rng.gen_range(0..alphas.len())].clone();
        // Half the targets are built to lie in the polar.
        let w = if case % 2 == 0 {
            uniform_vec(&mut rng, data.n, -1.0, 1.0)
        } else {
            let mut mult = MultiplierVector::zeros(data.l, data.m, data.p);
            for &i in &sets.active_g {
                mult.lambda[i] = rng.gen_range(0.0..1.0);
            }
            mult.eta.iter_mut().for_each(|e| *e = rng.gen_range(-1.0..1.0));
            for i in 0..data.p {
                mult.mu[i] = rng.gen_range(-1.0..1.0);
                mult.nu[i] = rng.gen_range(-1.0..1.0);
                if sets.is_biactive(i) {
                    if alpha.choice(i) == 1 {
                        mult.mu[i] = mult.mu[i].abs();
                    } else {
                        mult.nu[i] = mult.nu[i].abs();
                    }
                } else if sets.plus_zero.contains(&i) {
                    mult.mu[i] = 0.0;
                } else {
                    mult.nu[i] = 0.0;
                }
            }
            common::minus_gradient_combination(&inst, &mult).iter().map(|v| -v).collect()
        };
        match polar_branch_membership(&cone, &alpha, &w, &settings()).map_err(|e| e.to_string())? {
            PolarMembership::Member(_) => {
                members += 1;
                let pool: Vec<Vec<f64>> = (0..20)
                    .map(|_| {
                        let obj = uniform_vec(&mut rng, data.n, -1.0, 1.0);
                        cone.maximize_over_branch(&alpha, &obj, &settings())
                    })
                    .collect::<Result<_>>()
                    .map_err(|e| e.to_string())?;
                for d in &pool {
                    ensure!(
                        cone.branch_cone_contains(&alpha, d, 1e-9).map_err(|e| e.to_string())?,
                        "case {case}: sampled direction outside the cone"
                    );
                }
                for _ in 0..1000 {
                    let mut d = vec![0.0; data.n];
                    for _ in 0..3 {
                        let pick = &pool[rng.gen_range(0..pool.len())];
                        let c: f64 = rng.gen_range(0.0..1.0);
                        d.iter_mut().zip(pick).for_each(|(di, pi)| *di += c * pi);
                    }
                    let value = dot(&w, &d);
                    ensure!(value <= 1e-9, "case {case}: w.d = {value:e} for a cone direction");
                }
            }
            PolarMembership::NotInPolar { separator, value } => {
                separated += 1;
                ensure!(
                    cone.branch_cone_contains(&alpha, &separator, 1e-9).map_err(|e| e.to_string())?,
                    "case {case}: separator outside the cone"
                );
                let recomputed = dot(&w, &separator);
                ensure!(recomputed > 1e-9 && value > 1e-9, "case {case}: separation {recomputed:e}");
            }
        }
    }
    ensure!(members > 0 && separated > 0, "degenerate sample: {members} members, {separated} separated");
    Ok(format!("{members} members checked on 1000 directions each, {separated} separated"))
}

/// 5. Tangent directions versus the linearized cone on affine instances.
fn tangent_probe_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut tangent, mut mismatches) = (0, 0);
    for case in 0..50 {
        let inst = random_affine(&mut rng, 4, 2, 2, 2, Objective::Random);
        let report = oracle_tangent_sample(&inst, &vec![0.0; inst.n()], 1000, case, 1e-9)
            .map_err(|e| format!("case {case}: {e}"))?;
        tangent += report.tangent;
        mismatches += report.mismatches.len();
    }
    ensure!(mismatches == 0, "{mismatches} mismatches");
    ensure!(tangent > 0, "no tangent direction was sampled");
    Ok(format!("50000 directions, {tangent} tangent, 0 mismatches"))
}

/// Smallest norm over a simplex grid of weights with spacing `step`, among
/// combinations meeting the sign constraints.
fn grid_min_norm(vertices: &[Vec<f64>], nonnegative: &[usize], step: f64) -> Option<f64> {
    fn visit(vertices: &[Vec<f64>], nonnegative: &[usize], n: usize, left: usize, partial: &[f64], best: &mut Option<f64>) {
        let scale = 1.0 / n as f64;
        if vertices.len() == 1 {
            let x: Vec<f64> = partial.iter().zip(&vertices[0]).map(|(p, v)| p + left as f64 * scale * v).collect();
            if nonnegative.iter().all(|&j| x[j] >= -1e-12) {
                let norm = dot(&x, &x).sqrt();
                *best = Some(best.map_or(norm, |b| b.min(norm)));
            }
            return;
        }
        let mut next = partial.to_vec();
        for c in 0..=left {
            for j in 0..next.len() {
                next[j] = partial[j] + c as f64 * scale * vertices[0][j];
            }
            visit(&vertices[1..], nonnegative, n, left - c, &next, best);
        }
    }
    let n = (1.0 / step).round() as usize;
    let mut best = None;
    visit(vertices, nonnegative, n, n, &vec![0.0; vertices[0].len()], &mut best);
    best
}

/// 6. Min-norm solver against a weight grid on the documented examples.
fn min_norm_grid() -> Check {
    let problems: [(Vec<Vec<f64>>, Vec<usize>, [f64; 2]); 3] = [
        (vec![vec![3.0, -2.0], vec![-1.0, 4.0]], vec![0], [15.0 / 13.0, 10.0 / 13.0]),
        (vec![vec![2.0, 1.0]], vec![0], [2.0, 1.0]),
        (
            vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![-1.0, -1.0]],
            vec![],
            [0.0, 0.0],
        ),
    ];
    let mut details = Vec::new();
    for (k, (vertices, nonnegative, expected)) in problems.into_iter().enumerate() {
        let prob = MinNormProblem { vertices: vertices.clone(), nonnegative: nonnegative.clone() };
        let sol = min_norm_point(&prob, &settings())
            .map_err(|e| e.to_string())?
            .solved()
            .ok_or(format!("problem {k}: reported infeasible"))?;
        let grid = grid_min_norm(&vertices, &nonnegative, 1e-3).ok_or(format!("problem {k}: empty grid"))?;
        let norm = sol.norm_sq.sqrt();
        ensure!((norm - grid).abs() <= 1e-3, "problem {k}: solver {norm} vs grid {grid}");
        let err = sol.point.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure!(err <= 1e-9, "problem {k}: point {:?} vs {expected:?}", sol.point);
        details.push(format!("{norm:.6}/{grid:.6}"));
    }
    Ok(format!("solver/grid norms {}", details.join(", ")))
}

fn certify_stdout(name: &str) -> std::result::Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mpcc"))
        .args(["certify", data_file(name).to_str().unwrap(), "--json", "--oracle"])
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    // The timing block is the last field of the report.
    let cut = text.find("\"timing\"").ok_or(format!("{name}: no timing field in {text}"))?;
    Ok(text[..cut].to_string())
}

/// 7. Byte-identical reports across runs.
fn determinism() -> Check {
    let files = ["corner_s.json", "corner_descent.json", "kkt_p0.json", "m_not_s.json"];
    for name in files {
        let first = certify_stdout(name)?;
        for run in 1..5 {
            ensure!(certify_stdout(name)? == first, "{name}: run {run} differs from run 0");
        }
    }
    Ok(format!("{} files x 5 runs identical", files.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Duration); 7] = [
        ("1 lemma suite", lemma_suite, Duration::from_secs(10)),
        ("2 theorem suite", theorem_suite, Duration::from_secs(30)),
        ("3 curated instances", curated, Duration::from_secs(10)),
        ("4 polar soundness and completeness", polar_suite, Duration::from_secs(20)),
        ("5 affine tangent probe", tangent_probe_suite, Duration::from_secs(60)),
        ("6 min-norm point vs grid", min_norm_grid, Duration::from_secs(60)),
        ("7 determinism", determinism, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.1?}, budget {budget:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS [{name}] {detail} ({elapsed:.2?})"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail} ({elapsed:.2?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
