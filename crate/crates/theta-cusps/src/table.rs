//! Coefficient-table schema shared by the exact engine and the numerical
//! oracle:
//!
//! ```json
//! { "source": "engine", "level": 576, "twist": {"p": 5, "j": 1} | null,
//!   "cusp": {"u": 1, "w": 5}, "scaling_matrix": [["24","23/120"],["120","1"]],
//!   "coefficients": [ {"nu": 1, "exact_order": 24, "exact_coeffs": ["0", ...],
//!                      "re": 1.0, "im": 0.0, "abs": 1.0}, ... ] }
//! ```
//!
//! Exact values serialize as the cyclotomic order plus the rational
//! coefficient vector rendered as strings, which round-trips losslessly;
//! floats use serde's shortest-round-trip rendering. The CSV export is a
//! flat view with the same columns.

use crate::cyclotomic::Cyclo;
use crate::engine::CoeffResult;
use crate::metaplectic::{Cusp, Mat2Q};
use crate::numeric::Rational;
use num_traits::One;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Debug)]
pub struct TwistSpec {
    pub p: u64,
    pub j: u64,
}

#[derive(Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Debug)]
pub struct CuspSpec {
    pub u: i64,
    pub w: u64,
}

impl From<Cusp> for CuspSpec {
    fn from(c: Cusp) -> Self {
        CuspSpec { u: c.u, w: c.w }
    }
}

#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct CoeffRow {
    pub nu: u64,
    pub exact_order: u64,
    pub exact_coeffs: Vec<String>,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct CoefficientTable {
    pub source: String,
    pub level: u64,
    pub twist: Option<TwistSpec>,
    pub cusp: CuspSpec,
    pub scaling_matrix: Vec<Vec<String>>,
    pub coefficients: Vec<CoeffRow>,
}

/// Lossless string form of a rational: plain integer or "n/d".
pub fn rat_str(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn exact_to_row(nu: u64, exact: &Cyclo, re: f64, im: f64, abs: f64) -> CoeffRow {
    CoeffRow {
        nu,
        exact_order: exact.order(),
        exact_coeffs: exact.coeffs().iter().map(rat_str).collect(),
        re,
        im,
        abs,
    }
}

pub fn matrix_strings(m: &Mat2Q) -> Vec<Vec<String>> {
    vec![
        vec![rat_str(&m.a), rat_str(&m.b)],
        vec![rat_str(&m.c), rat_str(&m.d)],
    ]
}

impl CoefficientTable {
    pub fn from_engine(
        level: u64,
        twist: Option<TwistSpec>,
        cusp: Cusp,
        sigma: &Mat2Q,
        coeffs: &[CoeffResult],
    ) -> Self {
        CoefficientTable {
            source: "engine".to_string(),
            level,
            twist,
            cusp: cusp.into(),
            scaling_matrix: matrix_strings(sigma),
            coefficients: coeffs
                .iter()
                .map(|c| exact_to_row(c.nu, &c.exact, c.approx.re, c.approx.im, c.abs))
                .collect(),
        }
    }

    pub fn from_oracle(
        level: u64,
        twist: Option<TwistSpec>,
        cusp: Cusp,
        sigma: &Mat2Q,
        values: &[(u64, num_complex::Complex64)],
    ) -> Self {
        CoefficientTable {
            source: "oracle".to_string(),
            level,
            twist,
            cusp: cusp.into(),
            scaling_matrix: matrix_strings(sigma),
            coefficients: values
                .iter()
                .map(|(nu, v)| CoeffRow {
                    nu: *nu,
                    exact_order: 0,
                    exact_coeffs: Vec::new(),
                    re: v.re,
                    im: v.im,
                    abs: v.norm(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Flat CSV with one row per coefficient; exact coefficients joined by
    /// semicolons so the file stays comma-clean.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "source,level,p,j,u,w,nu,re,im,abs,exact_order,exact_coeffs\n",
        );
        let (p, j) = match self.twist {
            Some(t) => (t.p.to_string(), t.j.to_string()),
            None => (String::new(), String::new()),
        };
        for row in &self.coefficients {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:e},{:e},{:e},{},{}\n",
                self.source,
                self.level,
                p,
                j,
                self.cusp.u,
                self.cusp.w,
                row.nu,
                row.re,
                row.im,
                row.abs,
                row.exact_order,
                row.exact_coeffs.join(";"),
            ));
        }
        out
    }
}

/// Structural validation of a serialized table, used by tests and by the
/// CLI round-trip checks.
pub fn validate_table_json(value: &serde_json::Value) -> Result<(), String> {
    let obj = value.as_object().ok_or("table must be an object")?;
    for key in ["source", "level", "twist", "cusp", "scaling_matrix", "coefficients"] {
        if !obj.contains_key(key) {
            return Err(format!("missing key {key}"));
        }
    }
    match obj["source"].as_str() {
        Some("engine") | Some("oracle") => {}
        _ => return Err("source must be \"engine\" or \"oracle\"".into()),
    }
    obj["level"].as_u64().ok_or("level must be an integer")?;
    if !obj["twist"].is_null() {
        let t = obj["twist"].as_object().ok_or("twist must be null or object")?;
        t.get("p").and_then(|v| v.as_u64()).ok_or("twist.p")?;
        t.get("j").and_then(|v| v.as_u64()).ok_or("twist.j")?;
    }
    let cusp = obj["cusp"].as_object().ok_or("cusp must be an object")?;
    cusp.get("u").and_then(|v| v.as_i64()).ok_or("cusp.u")?;
    cusp.get("w").and_then(|v| v.as_u64()).ok_or("cusp.w")?;
    let sm = obj["scaling_matrix"].as_array().ok_or("scaling_matrix")?;
    if sm.len() != 2 || sm.iter().any(|r| r.as_array().map(|a| a.len()) != Some(2)) {
        return Err("scaling_matrix must be 2x2".into());
    }
    let coeffs = obj["coefficients"].as_array().ok_or("coefficients array")?;
    for row in coeffs {
        let r = row.as_object().ok_or("coefficient row must be an object")?;
        for key in ["nu", "exact_order", "exact_coeffs", "re", "im", "abs"] {
            if !r.contains_key(key) {
                return Err(format!("coefficient row missing {key}"));
            }
        }
        r["nu"].as_u64().ok_or("nu integer")?;
        r["re"].as_f64().ok_or("re float")?;
        if !r["exact_coeffs"].is_array() {
            return Err("exact_coeffs must be an array".into());
        }
    }
    Ok(())
}
