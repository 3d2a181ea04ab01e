//! Report documents and their plain-text rendering.
//!
//! Indices in reports are 1-based. Branch assignments list one entry per
//! biactive index, in increasing index order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mpcc_core::oracle::{Pattern, TangentProbeReport};
use mpcc_core::{FeasibilityReport, IndexSets, MultiplierVector, Tolerances};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSetsOut {
    pub active_g: Vec<usize>,
    pub plus_zero: Vec<usize>,
    pub zero_plus: Vec<usize>,
    pub biactive: Vec<usize>,
}

impl From<&IndexSets> for IndexSetsOut {
    fn from(s: &IndexSets) -> Self {
        let one = |v: &[usize]| v.iter().map(|i| i + 1).collect();
        Self {
            active_g: one(&s.active_g),
            plus_zero: one(&s.plus_zero),
            zero_plus: one(&s.zero_plus),
            biactive: one(&s.zero_zero),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityOut {
    pub feasible: bool,
    pub max_violation: f64,
    pub worst: Option<String>,
    pub violations: BTreeMap<String, f64>,
}

impl From<&FeasibilityReport> for FeasibilityOut {
    fn from(r: &FeasibilityReport) -> Self {
        Self {
            feasible: r.feasible,
            max_violation: r.max_violation,
            worst: r.worst.map(|c| c.to_string()),
            violations: r.violations.iter().map(|v| (v.constraint.to_string(), v.amount)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub schema_version: u32,
    pub feasibility: FeasibilityOut,
    pub index_sets: Option<IndexSetsOut>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub alpha: Vec<u8>,
    pub status: String,
    /// Euclidean norm of the branch multiplier's `(mu, nu)` part.
    pub multiplier_norm: Option<f64>,
    /// Branch-cone direction along which `-grad f` has positive inner product.
    pub separator: Option<Vec<f64>>,
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchMinimumRow {
    pub alpha: Vec<u8>,
    pub min_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerTrace {
    pub branch_minima: Vec<BranchMinimumRow>,
    pub selected: Vec<u8>,
    /// Convex weights over the branch multipliers, in branch-table order.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRow {
    pub index: usize,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    pub m_multiplier_exists: Option<bool>,
    pub pattern: Option<Vec<PatternRow>>,
    pub epsilon: Option<f64>,
    pub witness: Option<MultiplierVector>,
    pub lps_solved: usize,
    pub error: Option<String>,
}

pub fn pattern_label(p: Pattern) -> &'static str {
    match p {
        Pattern::BothPositive => "both_positive",
        Pattern::MuZero => "mu_zero",
        Pattern::NuZero => "nu_zero",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub schema_version: u32,
    /// `M`, `S`, `BranchInfeasible`, `NumericalFailure`, `InfeasiblePoint`
    /// or `BranchCapExceeded`.
    pub verdict: String,
    pub message: Option<String>,
    pub tolerances: Tolerances,
    pub branch_cap: usize,
    pub index_sets: Option<IndexSetsOut>,
    pub witness: Option<MultiplierVector>,
    pub residuals: BTreeMap<String, f64>,
    pub failed_branch: Option<Vec<u8>>,
    pub branches: Vec<BranchRow>,
    pub combiner: Option<CombinerTrace>,
    pub oracle: Option<OracleSection>,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    /// `S`, `M`, `A` or `W-only`; absent when the system is violated.
    pub class: Option<String>,
    pub required: String,
    pub satisfied: bool,
    pub residuals: BTreeMap<String, f64>,
    pub biactive: Vec<BiactiveRow>,
    /// Biactive indices whose raw sign conditions do not nest at this tolerance.
    pub tolerance_gaps: Vec<usize>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiactiveRow {
    pub index: usize,
    pub mu: f64,
    pub nu: f64,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub schema_version: u32,
    pub directions: usize,
    pub tangent: usize,
    pub linearized: usize,
    pub mismatches: Vec<Vec<f64>>,
}

impl From<&TangentProbeReport> for ProbeReport {
    fn from(r: &TangentProbeReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            directions: r.directions,
            tangent: r.tangent,
            linearized: r.linearized,
            mismatches: r.mismatches.iter().map(|m| m.direction.clone()).collect(),
        }
    }
}

fn alpha_text(alpha: &[u8]) -> String {
    let parts: Vec<String> = alpha.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(","))
}

fn list(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn write_sets(out: &mut String, sets: &IndexSetsOut) {
    let _ = writeln!(out, "active inequalities: {}", list(&sets.active_g));
    let _ = writeln!(out, "G > 0, H = 0:        {}", list(&sets.plus_zero));
    let _ = writeln!(out, "G = 0, H > 0:        {}", list(&sets.zero_plus));
    let _ = writeln!(out, "biactive:            {}", list(&sets.biactive));
}

fn write_multipliers(out: &mut String, m: &MultiplierVector) {
    let _ = writeln!(out, "  lambda = {}", vector(&m.lambda));
    let _ = writeln!(out, "  eta    = {}", vector(&m.eta));
    let _ = writeln!(out, "  mu     = {}", vector(&m.mu));
    let _ = writeln!(out, "  nu     = {}", vector(&m.nu));
}

fn write_residuals(out: &mut String, residuals: &BTreeMap<String, f64>) {
    for (k, v) in residuals {
        let _ = writeln!(out, "  {k:<20} {v:e}");
    }
}

impl ClassifyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let f = &self.feasibility;
        if f.feasible {
            let _ = writeln!(out, "feasible (max violation {:e})", f.max_violation);
        } else {
            let _ = writeln!(out, "infeasible (max violation {:e})", f.max_violation);
            for (c, v) in &f.violations {
                let _ = writeln!(out, "  {c} violated by {v:e}");
            }
        }
        if let Some(sets) = &self.index_sets {
            write_sets(&mut out, sets);
        }
        out
    }
}

impl CertificateReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verdict: {}", self.verdict);
        if let Some(msg) = &self.message {
            let _ = writeln!(out, "  {msg}");
        }
        if let Some(sets) = &self.index_sets {
            write_sets(&mut out, sets);
        }
        if let Some(alpha) = &self.failed_branch {
            let _ = writeln!(out, "failed branch: {}", alpha_text(alpha));
        }
        if !self.branches.is_empty() {
            let _ = writeln!(out, "branches:");
            for b in &self.branches {
                match (b.multiplier_norm, &b.separator) {
                    (Some(norm), _) => {
                        let _ = writeln!(out, "  {:<12} {:<10} |(mu,nu)| = {norm:e}", alpha_text(&b.alpha), b.status);
                    }
                    (None, Some(d)) => {
                        let _ = writeln!(
                            out,
                            "  {:<12} {:<10} separator {} (value {:e})",
                            alpha_text(&b.alpha),
                            b.status,
                            vector(d),
                            b.separation.unwrap_or(f64::NAN)
                        );
                    }
                    (None, None) => {
                        let _ = writeln!(out, "  {:<12} {}", alpha_text(&b.alpha), b.status);
                    }
                }
            }
        }
        if let Some(c) = &self.combiner {
            let _ = writeln!(out, "combiner: selected {}", alpha_text(&c.selected));
            for m in &c.branch_minima {
                let _ = writeln!(out, "  min norm over {:<12} {:e}", alpha_text(&m.alpha), m.min_norm);
            }
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness:");
            write_multipliers(&mut out, w);
        }
        if !self.residuals.is_empty() {
            let _ = writeln!(out, "residuals:");
            write_residuals(&mut out, &self.residuals);
        }
        if let Some(o) = &self.oracle {
            match (o.m_multiplier_exists, &o.error) {
                (_, Some(e)) => {
                    let _ = writeln!(out, "oracle: {e}");
                }
                (Some(true), None) => {
                    let _ = writeln!(out, "oracle: M-multiplier exists ({} LPs)", o.lps_solved);
                    if let Some(pattern) = &o.pattern {
                        for row in pattern {
                            let _ = writeln!(out, "  index {}: {}", row.index, row.pattern);
                        }
                    }
                    if let Some(w) = &o.witness {
                        write_multipliers(&mut out, w);
                    }
                }
                _ => {
                    let _ = writeln!(out, "oracle: no M-multiplier exists ({} LPs)", o.lps_solved);
                }
            }
        }
        let _ = writeln!(out, "time: {:.3} s", self.timing.seconds);
        out
    }
}

impl CheckReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.class {
            Some(c) => {
                let _ = writeln!(out, "class: {c} (required {}: {})", self.required, ok(self.satisfied));
            }
            None => {
                let _ = writeln!(out, "stationarity system violated");
            }
        }
        let _ = writeln!(out, "residuals:");
        write_residuals(&mut out, &self.residuals);
        for row in &self.biactive {
            let _ = writeln!(out, "  biactive {}: mu = {}, nu = {} -> {}", row.index, row.mu, row.nu, row.class);
        }
        if !self.tolerance_gaps.is_empty() {
            let _ = writeln!(out, "tolerance gaps at {}", list(&self.tolerance_gaps));
        }
        out
    }
}

impl ProbeReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} directions: {} tangent, {} linearized, {} mismatches",
            self.directions,
            self.tangent,
            self.linearized,
            self.mismatches.len()
        );
        for d in &self.mismatches {
            let _ = writeln!(out, "  {}", vector(d));
        }
        out
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "not met"
    }
}
