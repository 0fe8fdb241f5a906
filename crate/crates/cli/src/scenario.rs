//! Declarative scenario files.
//!
//! A scenario is a JSON object. Angles are radians unless `angle_unit` is
//! `"pi"`, in which case every range and fixed angle is a multiple of pi.
//!
//! ```json
//! {
//!   "hamiltonian": [[[0.7071067811865476, 0], [0.7071067811865476, 0]],
//!                   [[0.7071067811865476, 0], [-0.7071067811865476, 0]]],
//!   "gamma": [0, 0.25],
//!   "angle_unit": "pi",
//!   "theta_range": [0.1, 0.4],
//!   "n_theta": 100,
//!   "n_beta": 10,
//!   "n_phi": 10,
//!   "l_expt": 1000
//! }
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use qmetro_core::fisher::{normalize_prior, uniform_prior};
use qmetro_core::matkernel::HERMITIAN_TOL;
use qmetro_core::{CMatrix, Complex64};

use crate::error::CliError;

pub const DEFAULT_SWEEP_POINTS: usize = 200;
pub const DEFAULT_L_EXPT: u64 = 1000;

/// Which side of the instrument is configurable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PovmOnly,
    InputOnly,
    Both,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::PovmOnly, Mode::InputOnly, Mode::Both];

    pub fn name(self) -> &'static str {
        match self {
            Mode::PovmOnly => "povm-only",
            Mode::InputOnly => "input-only",
            Mode::Both => "both",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub hamiltonian: CMatrix,
    pub gammas: Vec<f64>,
    pub theta_range: (f64, f64),
    pub n_theta: usize,
    pub beta_range: (f64, f64),
    pub n_beta: usize,
    pub phi_range: (f64, f64),
    pub n_phi: usize,
    /// Normalized prior over the theta grid.
    pub prior: Vec<f64>,
    pub l_expt: u64,
    pub modes: Vec<Mode>,
    pub fixed_beta: f64,
    pub fixed_phi: f64,
    pub qfi_sweep_points: usize,
    /// sha256 of the scenario text, hex.
    pub sha256: String,
}

/// `n` inclusive, evenly spaced points; a single point sits at `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|j| lo + j as f64 * step).collect()
}

impl Scenario {
    pub fn thetas(&self) -> Vec<f64> {
        linspace(self.theta_range.0, self.theta_range.1, self.n_theta)
    }

    pub fn betas(&self) -> Vec<f64> {
        linspace(self.beta_range.0, self.beta_range.1, self.n_beta)
    }

    pub fn phis(&self) -> Vec<f64> {
        linspace(self.phi_range.0, self.phi_range.1, self.n_phi)
    }

    /// (phis, betas) available in a mode.
    pub fn config_axes(&self, mode: Mode) -> (Vec<f64>, Vec<f64>) {
        match mode {
            Mode::PovmOnly => (self.phis(), vec![self.fixed_beta]),
            Mode::InputOnly => (vec![self.fixed_phi], self.betas()),
            Mode::Both => (self.phis(), self.betas()),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| invalid(format!("not valid JSON: {e}")))?;
        let obj = value.as_object().ok_or_else(|| invalid("scenario must be a JSON object"))?;
        parse_object(obj, hex_digest(text.as_bytes()))
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Scenario(format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_json_str(&text)
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Scenario(msg.into())
}

const KNOWN_FIELDS: [&str; 16] = [
    "hamiltonian",
    "gamma",
    "angle_unit",
    "theta_range",
    "n_theta",
    "beta_range",
    "n_beta",
    "phi_range",
    "n_phi",
    "prior",
    "l_expt",
    "mode",
    "fixed_beta",
    "fixed_phi",
    "qfi_sweep_points",
    "description",
];

fn parse_object(obj: &Map<String, Value>, sha256: String) -> Result<Scenario, CliError> {
    if let Some(unknown) = obj.keys().find(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
        return Err(invalid(format!("unknown field {unknown:?}")));
    }

    let angle = match obj.get("angle_unit") {
        None => 1.0,
        Some(Value::String(s)) if s == "radians" => 1.0,
        Some(Value::String(s)) if s == "pi" => PI,
        Some(_) => return Err(invalid("angle_unit must be \"radians\" or \"pi\"")),
    };

    let hamiltonian = parse_hamiltonian(obj.get("hamiltonian").ok_or_else(|| invalid("hamiltonian required"))?)?;

    let gammas = match obj.get("gamma") {
        None => return Err(invalid("gamma required")),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| invalid("gamma entries must be numbers")))
            .collect::<Result<Vec<_>, _>>()?,
        Some(v) => vec![v.as_f64().ok_or_else(|| invalid("gamma must be a number or a list of numbers"))?],
    };
    if gammas.is_empty() {
        return Err(invalid("gamma must not be empty"));
    }
    for &g in &gammas {
        if !(0.0..=1.0).contains(&g) {
            return Err(invalid(format!("gamma {g} outside [0, 1]")));
        }
    }

    let theta_range = range(obj, "theta_range", None, angle)?;
    let beta_range = range(obj, "beta_range", Some((0.0, PI)), angle)?;
    let phi_range = range(obj, "phi_range", Some((0.0, PI)), angle)?;
    let n_theta = count(obj, "n_theta", None)?;
    let n_beta = count(obj, "n_beta", None)?;
    let n_phi = count(obj, "n_phi", None)?;
    let qfi_sweep_points = count(obj, "qfi_sweep_points", Some(DEFAULT_SWEEP_POINTS))?;
    let l_expt = count(obj, "l_expt", Some(DEFAULT_L_EXPT as usize))? as u64;

    let prior = match obj.get("prior") {
        None => uniform_prior(n_theta),
        Some(Value::String(s)) if s == "uniform" => uniform_prior(n_theta),
        Some(Value::Array(items)) => {
            let w = items
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| invalid("prior weights must be numbers")))
                .collect::<Result<Vec<_>, _>>()?;
            if w.len() != n_theta {
                return Err(invalid(format!("prior has {} weights, n_theta is {n_theta}", w.len())));
            }
            normalize_prior(&w).map_err(|e| invalid(format!("prior: {e}")))?
        }
        Some(_) => return Err(invalid("prior must be \"uniform\" or a list of weights")),
    };

    let modes = match obj.get("mode") {
        None => Mode::ALL.to_vec(),
        Some(Value::String(s)) => vec![parse_mode(s)?],
        Some(Value::Array(items)) => {
            let modes = items
                .iter()
                .map(|v| v.as_str().ok_or_else(|| invalid("mode entries must be strings")).and_then(parse_mode))
                .collect::<Result<Vec<_>, _>>()?;
            if modes.is_empty() {
                return Err(invalid("mode must not be empty"));
            }
            modes
        }
        Some(_) => return Err(invalid("mode must be a string or a list of strings")),
    };

    let fixed_beta = angle * number(obj, "fixed_beta", Some(0.0))?;
    let fixed_phi = angle * number(obj, "fixed_phi", Some(0.0))?;

    Ok(Scenario {
        hamiltonian,
        gammas,
        theta_range,
        n_theta,
        beta_range,
        n_beta,
        phi_range,
        n_phi,
        prior,
        l_expt,
        modes,
        fixed_beta,
        fixed_phi,
        qfi_sweep_points,
        sha256,
    })
}

fn parse_mode(s: &str) -> Result<Mode, CliError> {
    Mode::parse(s).ok_or_else(|| invalid(format!("mode {s:?} is not one of povm-only, input-only, both")))
}

fn number(obj: &Map<String, Value>, field: &str, default: Option<f64>) -> Result<f64, CliError> {
    match (obj.get(field), default) {
        (None, Some(d)) => Ok(d),
        (None, None) => Err(invalid(format!("{field} required"))),
        (Some(v), _) => match v.as_f64() {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(invalid(format!("{field} must be a finite number"))),
        },
    }
}

fn count(obj: &Map<String, Value>, field: &str, default: Option<usize>) -> Result<usize, CliError> {
    match (obj.get(field), default) {
        (None, Some(d)) => Ok(d),
        (None, None) => Err(invalid(format!("{field} required"))),
        (Some(v), _) => match v.as_u64() {
            Some(n) if n >= 1 => Ok(n as usize),
            _ => Err(invalid(format!("{field} must be an integer >= 1"))),
        },
    }
}

fn range(
    obj: &Map<String, Value>,
    field: &str,
    default: Option<(f64, f64)>,
    unit: f64,
) -> Result<(f64, f64), CliError> {
    let v = match (obj.get(field), default) {
        (None, Some(d)) => return Ok(d),
        (None, None) => return Err(invalid(format!("{field} required"))),
        (Some(v), _) => v,
    };
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)))
        .ok_or_else(|| invalid(format!("{field} must be [min, max]")))?;
    if !(pair.0.is_finite() && pair.1.is_finite()) || pair.0 > pair.1 {
        return Err(invalid(format!("{field} must satisfy min <= max")));
    }
    Ok((pair.0 * unit, pair.1 * unit))
}

fn parse_hamiltonian(v: &Value) -> Result<CMatrix, CliError> {
    let bad = || invalid("hamiltonian must be a square matrix of [re, im] pairs");
    let rows = v.as_array().ok_or_else(bad)?;
    let mut entries = Vec::new();
    for row in rows {
        let row = row.as_array().filter(|r| r.len() == rows.len()).ok_or_else(bad)?;
        for e in row {
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
            let re = pair[0].as_f64().ok_or_else(bad)?;
            let im = pair[1].as_f64().ok_or_else(bad)?;
            entries.push(Complex64::new(re, im));
        }
    }
    let h = CMatrix::from_vec(entries).map_err(|_| bad())?;
    if h.dim() != 2 {
        return Err(invalid(format!("hamiltonian must be 2x2 for qubit inputs, got {}x{}", h.dim(), h.dim())));
    }
    if !h.is_hermitian(HERMITIAN_TOL) {
        return Err(invalid(format!("hamiltonian is not Hermitian (defect {:e})", h.hermiticity_defect())));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "hamiltonian": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
        "gamma": 0.1,
        "theta_range": [0.5, 1.0],
        "n_theta": 3,
        "n_beta": 2,
        "n_phi": 4
    }"#;

    fn with(field: &str, value: &str) -> String {
        let mut v: Value = serde_json::from_str(MINIMAL).unwrap();
        v[field] = serde_json::from_str(value).unwrap();
        v.to_string()
    }

    fn without(field: &str) -> String {
        let mut v: Value = serde_json::from_str(MINIMAL).unwrap();
        v.as_object_mut().unwrap().remove(field);
        v.to_string()
    }

    fn err(text: &str) -> String {
        Scenario::from_json_str(text).unwrap_err().to_string()
    }

    #[test]
    fn defaults_applied() {
        let s = Scenario::from_json_str(MINIMAL).unwrap();
        assert_eq!(s.gammas, vec![0.1]);
        assert_eq!(s.beta_range, (0.0, PI));
        assert_eq!(s.phi_range, (0.0, PI));
        assert_eq!(s.prior, vec![1.0 / 3.0; 3]);
        assert_eq!(s.modes, Mode::ALL.to_vec());
        assert_eq!((s.fixed_beta, s.fixed_phi), (0.0, 0.0));
        assert_eq!(s.qfi_sweep_points, 200);
        assert_eq!(s.l_expt, 1000);
        assert_eq!(s.thetas(), vec![0.5, 0.75, 1.0]);
        assert_eq!(s.betas(), vec![0.0, PI]);
        assert_eq!(s.sha256.len(), 64);
    }

    #[test]
    fn missing_fields_are_named() {
        assert!(err(&without("hamiltonian")).contains("hamiltonian required"));
        assert!(err(&without("gamma")).contains("gamma required"));
        assert!(err(&without("n_theta")).contains("n_theta required"));
        assert!(err(&without("theta_range")).contains("theta_range required"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(err(&with("hamiltonian", "[[[1,0],[0,1]],[[0,0],[1,0]]]")).contains("not Hermitian"));
        assert!(err(&with("gamma", "[0, 1.5]")).contains("outside [0, 1]"));
        assert!(err(&with("gamma", "-0.1")).contains("outside [0, 1]"));
        assert!(err(&with("n_theta", "0")).contains("n_theta"));
        assert!(err(&with("theta_range", "[1, 0]")).contains("theta_range"));
        assert!(err(&with("mode", "\"povm\"")).contains("mode"));
        assert!(err(&with("prior", "[1, 2]")).contains("prior"));
        assert!(err(&with("prior", "[1, -2, 1]")).contains("prior"));
        assert!(err(&with("colour", "1")).contains("unknown field"));
        assert!(err("[1, 2]").contains("object"));
        assert!(err(&with("hamiltonian", "[[[1,0]]]")).contains("2x2"));
    }

    #[test]
    fn pi_units_and_explicit_prior() {
        let text = with("angle_unit", "\"pi\"");
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["prior"] = serde_json::json!([1, 1, 2]);
        v["mode"] = serde_json::json!(["both", "povm-only"]);
        v["fixed_beta"] = serde_json::json!(0.5);
        let s = Scenario::from_json_str(&v.to_string()).unwrap();
        assert_eq!(s.theta_range, (0.5 * PI, PI));
        assert_eq!(s.prior, vec![0.25, 0.25, 0.5]);
        assert_eq!(s.modes, vec![Mode::Both, Mode::PovmOnly]);
        assert_eq!(s.fixed_beta, 0.5 * PI);
        assert_eq!(s.config_axes(Mode::PovmOnly).1, vec![0.5 * PI]);
    }

    #[test]
    fn linspace_is_inclusive() {
        let g = linspace(0.0, PI, 10);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[9], PI);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}
