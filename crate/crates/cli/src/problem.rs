//! Problem and multiplier files.
//!
//! Problems are JSON documents with a `mode` field. Point-data files carry
//! function values and gradients at the point of interest; affine files carry
//! the instance matrices and the point `x_bar`. Matrices are row-major arrays
//! of arrays. Empty constraint blocks may be omitted.

use std::fs;
use std::path::Path;

use mpcc_core::{AffineInstance, FirstOrderData, MultiplierVector, ProblemData, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Tolerance overrides. Missing entries keep their current value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub active_tol: Option<f64>,
    pub feas_tol: Option<f64>,
    pub solver_tol: Option<f64>,
    pub cert_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, tol: &mut Tolerances) {
        if let Some(v) = self.active_tol {
            tol.active_tol = v;
        }
        if let Some(v) = self.feas_tol {
            tol.feas_tol = v;
        }
        if let Some(v) = self.solver_tol {
            tol.solver_tol = v;
        }
        if let Some(v) = self.cert_tol {
            tol.cert_tol = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDataFile {
    pub mode: String,
    pub n: usize,
    #[serde(default)]
    pub l: usize,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub p: usize,
    pub grad_f: Vec<f64>,
    #[serde(default)]
    pub g_vals: Vec<f64>,
    #[serde(default)]
    pub grad_g: Vec<Vec<f64>>,
    #[serde(default)]
    pub h_vals: Vec<f64>,
    #[serde(default)]
    pub grad_h: Vec<Vec<f64>>,
    #[serde(rename = "G_vals", default)]
    pub comp_g_vals: Vec<f64>,
    #[serde(rename = "grad_G", default)]
    pub grad_comp_g: Vec<Vec<f64>>,
    #[serde(rename = "H_vals", default)]
    pub comp_h_vals: Vec<f64>,
    #[serde(rename = "grad_H", default)]
    pub grad_comp_h: Vec<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Option<ToleranceOverrides>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineFile {
    pub mode: String,
    /// Defaults to the zero matrix.
    #[serde(rename = "Q", default)]
    pub q: Option<Vec<Vec<f64>>>,
    pub c: Vec<f64>,
    #[serde(rename = "A_g", default)]
    pub a_g: Vec<Vec<f64>>,
    #[serde(default)]
    pub b_g: Vec<f64>,
    #[serde(rename = "A_h", default)]
    pub a_h: Vec<Vec<f64>>,
    #[serde(default)]
    pub b_h: Vec<f64>,
    #[serde(rename = "A_G", default)]
    pub a_comp_g: Vec<Vec<f64>>,
    #[serde(rename = "b_G", default)]
    pub b_comp_g: Vec<f64>,
    #[serde(rename = "A_H", default)]
    pub a_comp_h: Vec<Vec<f64>>,
    #[serde(rename = "b_H", default)]
    pub b_comp_h: Vec<f64>,
    pub x_bar: Vec<f64>,
    #[serde(default)]
    pub tolerances: Option<ToleranceOverrides>,
}

/// A parsed problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: ProblemData,
    pub tolerances: ToleranceOverrides,
}

impl ProblemFile {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = read(path)?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }

    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            mode: Option<String>,
        }
        let header: Header = serde_json::from_str(text).map_err(CliError::json)?;
        match header.mode.as_deref() {
            Some("point-data") => {
                let f: PointDataFile = serde_json::from_str(text).map_err(CliError::json)?;
                let data = FirstOrderData {
                    n: f.n,
                    l: f.l,
                    m: f.m,
                    p: f.p,
                    grad_f: f.grad_f,
                    g_vals: f.g_vals,
                    grad_g: f.grad_g,
                    h_vals: f.h_vals,
                    grad_h: f.grad_h,
                    comp_g_vals: f.comp_g_vals,
                    grad_comp_g: f.grad_comp_g,
                    comp_h_vals: f.comp_h_vals,
                    grad_comp_h: f.grad_comp_h,
                };
                data.validate().map_err(CliError::invalid)?;
                Ok(Self { problem: ProblemData::PointData(data), tolerances: f.tolerances.unwrap_or_default() })
            }
            Some("affine") => {
                let f: AffineFile = serde_json::from_str(text).map_err(CliError::json)?;
                let n = f.c.len();
                let instance = AffineInstance {
                    q: f.q.unwrap_or_else(|| vec![vec![0.0; n]; n]),
                    c: f.c,
                    a_g: f.a_g,
                    b_g: f.b_g,
                    a_h: f.a_h,
                    b_h: f.b_h,
                    a_comp_g: f.a_comp_g,
                    b_comp_g: f.b_comp_g,
                    a_comp_h: f.a_comp_h,
                    b_comp_h: f.b_comp_h,
                };
                let problem = ProblemData::Affine { instance, x_bar: f.x_bar };
                problem.first_order_data().map_err(CliError::invalid)?;
                Ok(Self { problem, tolerances: f.tolerances.unwrap_or_default() })
            }
            Some(other) => Err(CliError::Parse(format!(
                "field `mode`: unknown mode `{other}`, expected `point-data` or `affine`"
            ))),
            None => Err(CliError::Parse("missing field `mode`".into())),
        }
    }

    pub fn data(&self) -> Result<FirstOrderData> {
        self.problem.first_order_data().map_err(CliError::invalid)
    }
}

/// Reads multipliers either from a bare `{lambda, eta, mu, nu}` document or
/// from the `witness` of a certificate report.
pub fn read_multipliers(path: &Path) -> Result<MultiplierVector> {
    let text = read(path)?;
    parse_multipliers(&text).map_err(|e| e.in_file(path))
}

pub fn parse_multipliers(text: &str) -> Result<MultiplierVector> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Bare {
        #[serde(default)]
        lambda: Vec<f64>,
        #[serde(default)]
        eta: Vec<f64>,
        #[serde(default)]
        mu: Vec<f64>,
        #[serde(default)]
        nu: Vec<f64>,
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(CliError::json)?;
    let bare: Bare = match value.get("witness") {
        Some(serde_json::Value::Null) => {
            return Err(CliError::Parse("field `witness`: the report carries no witness".into()))
        }
        Some(w) => serde_json::from_value(w.clone()).map_err(|e| CliError::Parse(format!("field `witness`: {e}")))?,
        None => serde_json::from_str(text).map_err(CliError::json)?,
    };
    Ok(MultiplierVector { lambda: bare.lambda, eta: bare.eta, mu: bare.mu, nu: bare.nu })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORNER: &str = r#"{
        "mode": "affine",
        "c": [1, 1],
        "A_G": [[1, 0]], "b_G": [0],
        "A_H": [[0, 1]], "b_H": [0],
        "x_bar": [0, 0]
    }"#;

    #[test]
    fn affine_defaults() {
        let f = ProblemFile::parse(CORNER).unwrap();
        let data = f.data().unwrap();
        assert_eq!((data.n, data.l, data.m, data.p), (2, 0, 0, 1));
        assert_eq!(data.grad_f, vec![1.0, 1.0]);
        assert_eq!(f.tolerances, ToleranceOverrides::default());
    }

    #[test]
    fn point_data_with_tolerances() {
        let text = r#"{
            "mode": "point-data", "n": 1, "l": 1, "grad_f": [1],
            "g_vals": [0], "grad_g": [[-1]],
            "tolerances": {"cert_tol": 1e-6}
        }"#;
        let f = ProblemFile::parse(text).unwrap();
        let mut tol = Tolerances::default();
        f.tolerances.apply(&mut tol);
        assert_eq!(tol.cert_tol, 1e-6);
        assert_eq!(tol.active_tol, 1e-8);
    }

    #[test]
    fn unknown_field_is_named_with_position() {
        let text = "{\n  \"mode\": \"affine\",\n  \"c\": [1],\n  \"x_bar\": [0],\n  \"A_q\": []\n}";
        let msg = ProblemFile::parse(text).unwrap_err().to_string();
        assert!(msg.contains("A_q") && msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn bad_mode_and_dimensions() {
        let msg = ProblemFile::parse(r#"{"mode": "nlp"}"#).unwrap_err().to_string();
        assert!(msg.contains("mode"), "{msg}");
        let text = r#"{"mode": "point-data", "n": 2, "grad_f": [1]}"#;
        assert!(matches!(ProblemFile::parse(text), Err(CliError::Invalid(_))));
    }

    #[test]
    fn multipliers_from_bare_and_report() {
        let m = parse_multipliers(r#"{"mu": [1], "nu": [2]}"#).unwrap();
        assert_eq!((m.mu[0], m.nu[0]), (1.0, 2.0));
        let m = parse_multipliers(r#"{"schema_version": 1, "witness": {"lambda": [], "eta": [], "mu": [3], "nu": [0]}}"#)
            .unwrap();
        assert_eq!(m.mu, vec![3.0]);
        assert!(parse_multipliers(r#"{"witness": null}"#).is_err());
        assert!(parse_multipliers(r#"{"mu": [1], "rho": [2]}"#).is_err());
    }
}
