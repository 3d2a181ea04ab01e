//! Command implementations. Each returns the text to print and the exit code,
//! so they can be driven from tests without spawning a process.

use std::path::Path;
use std::time::Instant;

use mpcc_core::oracle::{oracle_m_exists, tangent_probe};
use mpcc_core::solvers::SolverSettings;
use mpcc_core::{
    certify_m_stationarity, check_feasibility, check_stationarity_system, classify_indices, classify_multiplier,
    CertifyOptions, Error, IndexSets, MultiplierClass, StationarityVerdict, Tolerances, VerdictKind,
};
use serde::Serialize;

use crate::error::CliError;
use crate::problem::{read_multipliers, ProblemFile, ToleranceOverrides};
use crate::report::*;

pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 1;
    /// classify: infeasible point; certify: a branch LP is infeasible;
    /// check: class below the requirement; probe: mismatches found.
    pub const NEGATIVE: i32 = 2;
    pub const INFEASIBLE_POINT: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const BRANCH_CAP: i32 = 5;
    pub const SYSTEM_VIOLATED: i32 = 6;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn out(code: i32, stdout: String) -> Self {
        Self { code, stdout, stderr: String::new() }
    }

    fn err(code: i32, stderr: String) -> Self {
        Self { code, stdout: String::new(), stderr }
    }
}

fn render<T: Serialize>(json: bool, report: &T, text: impl FnOnce() -> String) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
        s.push('\n');
        s
    } else {
        text()
    }
}

fn load(path: &Path, flags: &ToleranceOverrides) -> Result<(ProblemFile, Tolerances), Outcome> {
    let file = ProblemFile::from_path(path).map_err(|e| Outcome::err(exit::PARSE, format!("error: {e}\n")))?;
    let mut tol = Tolerances::default();
    file.tolerances.apply(&mut tol);
    flags.apply(&mut tol);
    tol.validate().map_err(|e| Outcome::err(exit::PARSE, format!("error: {e}\n")))?;
    Ok((file, tol))
}

pub fn classify(path: &Path, flags: &ToleranceOverrides, json: bool) -> Outcome {
    let (file, tol) = match load(path, flags) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let data = match file.data() {
        Ok(d) => d,
        Err(e) => return Outcome::err(exit::PARSE, format!("error: {e}\n")),
    };
    let feas = check_feasibility(&data, &tol);
    let sets = if feas.feasible { classify_indices(&data, &tol).ok() } else { None };
    let report = ClassifyReport {
        schema_version: SCHEMA_VERSION,
        feasibility: (&feas).into(),
        index_sets: sets.as_ref().map(Into::into),
        tolerances: tol,
    };
    let code = if feas.feasible { exit::OK } else { exit::NEGATIVE };
    Outcome::out(code, render(json, &report, || report.to_text()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyFlags {
    pub tolerances: ToleranceOverrides,
    pub branch_cap: usize,
    pub oracle: bool,
    pub json: bool,
}

impl Default for CertifyFlags {
    fn default() -> Self {
        Self {
            tolerances: ToleranceOverrides::default(),
            branch_cap: CertifyOptions::default().branch_cap,
            oracle: false,
            json: false,
        }
    }
}

fn empty_report(tol: Tolerances, branch_cap: usize) -> CertificateReport {
    CertificateReport {
        schema_version: SCHEMA_VERSION,
        verdict: String::new(),
        message: None,
        tolerances: tol,
        branch_cap,
        index_sets: None,
        witness: None,
        residuals: Default::default(),
        failed_branch: None,
        branches: Vec::new(),
        combiner: None,
        oracle: None,
        timing: Timing { seconds: 0.0 },
    }
}

fn fill_from_verdict(report: &mut CertificateReport, v: &StationarityVerdict) {
    let biactive = &v.sets.zero_zero;
    report.verdict = v.kind.label().to_string();
    report.message = v.note.clone();
    report.index_sets = Some((&v.sets).into());
    report.witness = v.witness.clone();
    report.residuals = v.residuals.clone();
    report.failed_branch = v.failed_branch.as_ref().map(|a| a.restricted(biactive));
    report.branches = v
        .branches
        .iter()
        .map(|b| {
            let alpha = b.alpha.restricted(biactive);
            match &b.outcome {
                mpcc_core::stationarity::BranchMultipliers::Feasible(m) => BranchRow {
                    alpha,
                    status: "feasible".into(),
                    multiplier_norm: Some(m.mu_nu_norm_sq().sqrt()),
                    separator: None,
                    separation: None,
                },
                mpcc_core::stationarity::BranchMultipliers::Infeasible { separator, value } => BranchRow {
                    alpha,
                    status: "infeasible".into(),
                    multiplier_norm: None,
                    separator: Some(separator.clone()),
                    separation: Some(*value),
                },
            }
        })
        .collect();
    report.combiner = v.combination.as_ref().map(|c| CombinerTrace {
        branch_minima: c
            .branch_minima
            .iter()
            .map(|m| BranchMinimumRow { alpha: m.alpha.restricted(biactive), min_norm: m.norm_sq.sqrt() })
            .collect(),
        selected: c.selected.restricted(biactive),
        weights: c.weights.clone(),
    });
}

fn oracle_section(data: &mpcc_core::FirstOrderData, sets: &IndexSets, tol: &Tolerances) -> OracleSection {
    let settings = SolverSettings::with_tol(tol.solver_tol);
    match oracle_m_exists(data, sets, tol.cert_tol, &settings) {
        Ok(v) => OracleSection {
            m_multiplier_exists: Some(v.exists),
            pattern: v.pattern.map(|p| {
                p.0.iter().map(|&(i, pat)| PatternRow { index: i + 1, pattern: pattern_label(pat).into() }).collect()
            }),
            epsilon: v.epsilon,
            witness: v.witness,
            lps_solved: v.lps_solved,
            error: None,
        },
        Err(e) => OracleSection {
            m_multiplier_exists: None,
            pattern: None,
            epsilon: None,
            witness: None,
            lps_solved: 0,
            error: Some(e.to_string()),
        },
    }
}

/// Runs the certificate pipeline and returns the report with its exit code.
pub fn certify_report(path: &Path, flags: &CertifyFlags) -> Result<(CertificateReport, i32), Outcome> {
    let start = Instant::now();
    let (file, tol) = load(path, &flags.tolerances)?;
    let data = file.data().map_err(|e| Outcome::err(exit::PARSE, format!("error: {e}\n")))?;
    let opts = CertifyOptions { tol, branch_cap: flags.branch_cap };
    let mut report = empty_report(tol, flags.branch_cap);

    let code = match certify_m_stationarity(&data, &opts) {
        Ok(v) => {
            fill_from_verdict(&mut report, &v);
            if flags.oracle {
                report.oracle = Some(oracle_section(&data, &v.sets, &tol));
            }
            match v.kind {
                VerdictKind::M | VerdictKind::S => exit::OK,
                VerdictKind::BranchInfeasible => exit::NEGATIVE,
                VerdictKind::NumericalFailure => exit::NUMERICAL,
            }
        }
        Err(e) => {
            report.message = Some(e.to_string());
            let (verdict, code) = match e {
                Error::InfeasiblePoint { .. } => ("InfeasiblePoint", exit::INFEASIBLE_POINT),
                Error::BranchBudgetExceeded { .. } => ("BranchCapExceeded", exit::BRANCH_CAP),
                Error::NumericalFailure(_) | Error::PostconditionViolated(_) => ("NumericalFailure", exit::NUMERICAL),
                other => return Err(Outcome::err(exit::PARSE, format!("error: {other}\n"))),
            };
            report.verdict = verdict.to_string();
            if code == exit::BRANCH_CAP {
                if let Ok(sets) = classify_indices(&data, &tol) {
                    report.index_sets = Some((&sets).into());
                }
            }
            code
        }
    };
    report.timing.seconds = start.elapsed().as_secs_f64();
    Ok((report, code))
}

pub fn certify(path: &Path, flags: &CertifyFlags) -> Outcome {
    match certify_report(path, flags) {
        Ok((report, code)) => Outcome::out(code, render(flags.json, &report, || report.to_text())),
        Err(o) => o,
    }
}


pub fn check(
    path: &Path,
    multipliers: &Path,
    require: MultiplierClass,
    flags: &ToleranceOverrides,
    json: bool,
) -> Outcome {
    let (file, tol) = match load(path, flags) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let data = match file.data() {
        Ok(d) => d,
        Err(e) => return Outcome::err(exit::PARSE, format!("error: {e}\n")),
    };
    let mult = match read_multipliers(multipliers) {
        Ok(m) => m,
        Err(e) => return Outcome::err(exit::PARSE, format!("error: {e}\n")),
    };
    let sets = match classify_indices(&data, &tol) {
        Ok(s) => s,
        Err(e @ Error::InfeasiblePoint { .. }) => return Outcome::err(exit::INFEASIBLE_POINT, format!("error: {e}\n")),
        Err(e) => return Outcome::err(exit::PARSE, format!("error: {e}\n")),
    };
    let residuals = match check_stationarity_system(&data, &sets, &mult) {
        Ok(r) => r,
        Err(e) => return Outcome::err(exit::PARSE, format!("error: {}\n", CliError::from(e))),
    };
    let (class, code) = match classify_multiplier(&data, &sets, &mult, tol.cert_tol) {
        Ok(c) if c >= require => (Some(c), exit::OK),
        Ok(c) => (Some(c), exit::NEGATIVE),
        Err(Error::SystemViolated { .. }) => (None, exit::SYSTEM_VIOLATED),
        Err(e) => return Outcome::err(exit::PARSE, format!("error: {e}\n")),
    };
    let report = CheckReport {
        schema_version: SCHEMA_VERSION,
        class: class.map(|c| c.label().to_string()),
        required: require.label().to_string(),
        satisfied: code == exit::OK,
        residuals: residuals.to_map(),
        biactive: residuals
            .biactive
            .iter()
            .map(|pair| BiactiveRow {
                index: pair.index + 1,
                mu: pair.mu,
                nu: pair.nu,
                class: mpcc_core::stationarity::pair_class(pair.mu, pair.nu, tol.cert_tol).label().to_string(),
            })
            .collect(),
        tolerance_gaps: mpcc_core::stationarity::tolerance_gaps(&sets, &mult, tol.cert_tol)
            .into_iter()
            .map(|i| i + 1)
            .collect(),
        tolerances: tol,
    };
    Outcome::out(code, render(json, &report, || report.to_text()))
}

pub fn probe(path: &Path, directions: usize, seed: u64, flags: &ToleranceOverrides, json: bool) -> Outcome {
    let (file, tol) = match load(path, flags) {
        Ok(v) => v,
        Err(o) => return o,
    };
    match tangent_probe(&file.problem, directions, seed, tol.active_tol) {
        Ok(r) => {
            let report = ProbeReport::from(&r);
            let code = if report.mismatches.is_empty() { exit::OK } else { exit::NEGATIVE };
            Outcome::out(code, render(json, &report, || report.to_text()))
        }
        Err(e @ Error::InfeasiblePoint { .. }) => Outcome::err(exit::INFEASIBLE_POINT, format!("error: {e}\n")),
        Err(e) => Outcome::err(exit::PARSE, format!("error: {e}\n")),
    }
}
