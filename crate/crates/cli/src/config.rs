//! Scenario documents (TOML). Unknown keys are rejected; missing optional keys get the
//! defaults listed in the README.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use reinfect::integrator::{IntegrationConfig, Method};
use reinfect::model::SystemKind;
use reinfect::{compute_r0, Compartments, MicroState, ModelParams, TimeUnit};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::table::columns;

pub const PRESET_NAMES: [&str; 1] = ["bjornstad-svi"];
const BJORNSTAD_SVI: &str = include_str!("../presets/bjornstad-svi.toml");

/// Tolerance on S+E+I+R = 1 for normalized starts.
pub const SIMPLEX_TOL: f64 = 1e-9;
pub const DEFAULT_INFECTED: f64 = 1e-3;
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 1.0;
pub const DEFAULT_OUTPUT: &str = "trajectory.csv";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: Option<RawParams>,
    system: Option<RawSystem>,
    initial: Option<RawInitial>,
    integration: Option<RawIntegration>,
    observation: Option<RawObservation>,
    #[serde(default)]
    output: Vec<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    units: Option<String>,
    beta: Option<f64>,
    r0: Option<f64>,
    sigma: Option<f64>,
    gamma: Option<f64>,
    omega: Option<f64>,
    nu: Option<f64>,
    b: Option<f64>,
    mu: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    kind: Option<String>,
    n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    preset: Option<String>,
    infected: Option<f64>,
    s: Option<f64>,
    e: Option<f64>,
    i: Option<f64>,
    r: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegration {
    t_start: Option<f64>,
    t_end: Option<f64>,
    sample_interval: Option<f64>,
    method: Option<String>,
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
    step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservation {
    alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
    select: Option<Vec<String>>,
}

/// How the initial state is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec {
    /// S = S1 = 1 − infected, I = I1 = infected, everything else 0.
    Primo { infected: f64 },
    /// Totals; micro systems put all of it in block 1, SIS uses only `s` and `i`.
    Explicit(Compartments),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub path: String,
    /// Columns after `t`, in file order.
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Rates in the unit named by the document.
    pub params: ModelParams,
    pub system: SystemKind,
    pub initial: InitialSpec,
    /// Times in days.
    pub integration: IntegrationConfig,
    /// Detection rate; adds `y = alpha I` and `y1 = alpha I1` columns.
    pub alpha: Option<f64>,
    pub outputs: Vec<OutputSpec>,
}

fn err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err(path, format!("must be finite, got {v}")))
    }
}

const REQUIRED: [&str; 8] = [
    "params.units",
    "params.beta (or params.r0)",
    "params.sigma",
    "params.gamma",
    "params.omega",
    "params.b",
    "system.kind",
    "integration.t_end",
];

fn missing_keys(raw: &RawConfig) -> Vec<&'static str> {
    let p = raw.params.as_ref();
    let sis = raw.system.as_ref().is_some_and(|s| s.kind.as_deref() == Some("sis"));
    let present = [
        p.is_some_and(|p| p.units.is_some()),
        p.is_some_and(|p| p.beta.is_some() || p.r0.is_some()),
        sis || p.is_some_and(|p| p.sigma.is_some()),
        p.is_some_and(|p| p.gamma.is_some()),
        sis || p.is_some_and(|p| p.omega.is_some()),
        p.is_some_and(|p| p.b.is_some()),
        raw.system.as_ref().is_some_and(|s| s.kind.is_some()),
        raw.integration.as_ref().is_some_and(|i| i.t_end.is_some()),
    ];
    REQUIRED.iter().zip(present).filter(|(_, ok)| !ok).map(|(k, _)| *k).collect()
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
    let missing = missing_keys(&raw);
    if !missing.is_empty() {
        return Err(CliError::Config(format!("missing required keys: {}", missing.join(", "))));
    }
    let rp = raw.params.unwrap_or_default();
    let params = resolve_params(&rp)?;
    let rs = raw.system.unwrap_or_default();
    let kind = rs.kind.unwrap_or_default();
    let system = SystemKind::parse(&kind, rs.n).map_err(|e| err("system", e))?;
    if !system.is_micro() && rs.n.is_some() {
        return Err(err("system.n", format!("only micro systems take a truncation depth, not {kind}")));
    }
    let initial = resolve_initial(raw.initial.unwrap_or_default(), system)?;
    let integration = resolve_integration(raw.integration.unwrap_or_default())?;
    let alpha = match raw.observation.and_then(|o| o.alpha) {
        None => None,
        Some(a) if !(a > 0.0 && a <= 1.0) => return Err(err("observation.alpha", format!("must lie in (0, 1], got {a}"))),
        Some(_) if !matches!(system, SystemKind::Sis | SystemKind::Micro { .. } | SystemKind::NormalizedMicro { .. }) => {
            return Err(err("observation.alpha", format!("needs a system with an I1 compartment, not {kind}")))
        }
        Some(a) => Some(a),
    };
    let available = columns(system, alpha.is_some());
    let outputs = resolve_outputs(raw.output, &available)?;
    Ok(ScenarioConfig { params, system, initial, integration, alpha, outputs })
}

fn resolve_params(rp: &RawParams) -> Result<ModelParams> {
    let unit: TimeUnit = rp.units.as_deref().unwrap_or_default().parse().map_err(|e| err("params.units", e))?;
    let get = |name: &str, v: Option<f64>| -> Result<f64> {
        let v = v.unwrap_or(0.0);
        let v = finite(&format!("params.{name}"), v)?;
        if v < 0.0 {
            return Err(err(&format!("params.{name}"), format!("must be >= 0, got {v}")));
        }
        Ok(v)
    };
    let sigma = get("sigma", rp.sigma)?;
    let gamma = get("gamma", rp.gamma)?;
    let omega = get("omega", rp.omega)?;
    let nu = get("nu", rp.nu)?;
    let b = get("b", rp.b)?;
    let mu = match rp.mu {
        Some(m) => get("mu", Some(m))?,
        None => b,
    };
    let beta = match (rp.beta, rp.r0) {
        (Some(_), Some(_)) => return Err(err("params", "give either beta or r0, not both")),
        (Some(beta), None) => get("beta", Some(beta))?,
        (None, Some(r0)) => {
            let r0 = get("r0", Some(r0))?;
            ModelParams::beta_for_r0(r0, sigma, gamma, nu, b).map_err(|e| err("params.r0", e))?
        }
        (None, None) => unreachable!("checked by missing_keys"),
    };
    ModelParams::new(beta, sigma, gamma, omega, nu, b, mu, unit).map_err(|e| err("params", e))
}

fn resolve_initial(ri: RawInitial, system: SystemKind) -> Result<InitialSpec> {
    let explicit = [ri.s, ri.e, ri.i, ri.r].iter().any(Option::is_some);
    let spec = match ri.preset.as_deref() {
        Some(_) if explicit => return Err(err("initial", "give either preset or explicit s, e, i, r, not both")),
        Some("primo") | None if !explicit => {
            let infected = finite("initial.infected", ri.infected.unwrap_or(DEFAULT_INFECTED))?;
            if !(0.0..1.0).contains(&infected) {
                return Err(err("initial.infected", format!("must lie in [0, 1), got {infected}")));
            }
            InitialSpec::Primo { infected }
        }
        Some(other) if !explicit => return Err(err("initial.preset", format!("unknown preset {other:?} (expected \"primo\")"))),
        _ => {
            if ri.infected.is_some() {
                return Err(err("initial.infected", "only used with preset = \"primo\""));
            }
            let mut c = [0.0; 4];
            for (slot, (name, v)) in c.iter_mut().zip([("s", ri.s), ("e", ri.e), ("i", ri.i), ("r", ri.r)]) {
                let path = format!("initial.{name}");
                let v = finite(&path, v.unwrap_or(0.0))?;
                if v < 0.0 {
                    return Err(err(&path, format!("must be >= 0, got {v}")));
                }
                *slot = v;
            }
            let c = Compartments::new(c[0], c[1], c[2], c[3]);
            if system == SystemKind::Sis && (c.e != 0.0 || c.r != 0.0) {
                return Err(err("initial", "the sis system has no E or R compartment"));
            }
            if (system.is_normalized() || system == SystemKind::Sis) && (c.total() - 1.0).abs() > SIMPLEX_TOL {
                return Err(err("initial", format!("fractions must sum to 1 for {}, got {}", system.name(), c.total())));
            }
            InitialSpec::Explicit(c)
        }
    };
    let (e, i) = match spec {
        InitialSpec::Primo { infected } => (0.0, infected),
        InitialSpec::Explicit(c) => (c.e, c.i),
    };
    if e + i <= 0.0 {
        return Err(err("initial", "exposed + infected mass must be positive; an epidemic run needs some initially infected"));
    }
    Ok(spec)
}

fn resolve_integration(ri: RawIntegration) -> Result<IntegrationConfig> {
    let t_start = finite("integration.t_start", ri.t_start.unwrap_or(0.0))?;
    let t_end = finite("integration.t_end", ri.t_end.unwrap_or_default())?;
    let dt = ri.sample_interval.unwrap_or(DEFAULT_SAMPLE_INTERVAL);
    let cfg = match ri.method.as_deref().unwrap_or("rk45") {
        "rk45" => {
            if ri.step.is_some() {
                return Err(err("integration.step", "only used with method = \"rk4\""));
            }
            let atol = ri.abs_tol.unwrap_or(Method::DEFAULT_TOL);
            let rtol = ri.rel_tol.unwrap_or(Method::DEFAULT_TOL);
            IntegrationConfig::adaptive(t_start, t_end, dt).with_tolerances(atol, rtol)
        }
        "rk4" => {
            if ri.abs_tol.is_some() || ri.rel_tol.is_some() {
                return Err(err("integration", "abs_tol and rel_tol only apply to method = \"rk45\""));
            }
            let step = ri.step.ok_or_else(|| err("integration.step", "required with method = \"rk4\""))?;
            IntegrationConfig::fixed(t_start, t_end, dt, step)
        }
        other => return Err(err("integration.method", format!("unknown method {other:?} (expected rk45 or rk4)"))),
    };
    cfg.sample_count().map_err(|e| err("integration", e))?;
    Ok(cfg)
}

fn resolve_outputs(raw: Vec<RawOutput>, available: &[String]) -> Result<Vec<OutputSpec>> {
    if raw.is_empty() {
        return Ok(vec![OutputSpec { path: DEFAULT_OUTPUT.into(), columns: available[1..].to_vec() }]);
    }
    let mut seen = BTreeSet::new();
    raw.into_iter()
        .enumerate()
        .map(|(k, o)| {
            let at = format!("output[{k}]");
            let path = o.path.ok_or_else(|| err(&format!("{at}.path"), "required"))?;
            if !seen.insert(path.clone()) {
                return Err(err(&format!("{at}.path"), format!("{path:?} is written twice")));
            }
            let columns = match o.select {
                None => available[1..].to_vec(),
                Some(sel) => {
                    let mut cols = Vec::new();
                    for name in sel {
                        if name == "t" {
                            continue;
                        }
                        if !available.contains(&name) {
                            return Err(err(&format!("{at}.select"), format!("no quantity {name:?} in this system")));
                        }
                        cols.push(name);
                    }
                    cols
                }
            };
            Ok(OutputSpec { path, columns })
        })
        .collect()
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "bjornstad-svi" => parse_config(BJORNSTAD_SVI),
        other => Err(CliError::Usage(format!("unknown preset {other:?} (available: {})", PRESET_NAMES.join(", ")))),
    }
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    (name == "bjornstad-svi").then_some(BJORNSTAD_SVI)
}

pub fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

impl ScenarioConfig {
    /// Flat initial state for the configured system.
    pub fn initial_state(&self) -> Result<Vec<f64>> {
        let c = match self.initial {
            InitialSpec::Primo { infected } => Compartments::new(1.0 - infected, 0.0, infected, 0.0),
            InitialSpec::Explicit(c) => c,
        };
        Ok(match self.system {
            SystemKind::Macro | SystemKind::NormalizedMacro => c.to_array().to_vec(),
            SystemKind::Micro { n } | SystemKind::NormalizedMicro { n } => MicroState::primo(c, n)?.to_flat(),
            SystemKind::Sis => vec![c.s, c.i, c.s, c.i],
        })
    }

    /// Rates per day, as used for integration.
    pub fn params_per_day(&self) -> ModelParams {
        self.params.per_day()
    }

    /// The resolved document with every default filled in.
    pub fn to_toml(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "[params]\nunits = \"{}\"", p.time_unit);
        for (name, v) in p.named_rates() {
            let _ = writeln!(s, "{name} = {v:e}");
        }
        if let Ok(r0) = compute_r0(p) {
            let _ = writeln!(s, "# r0 = {r0:e}");
        }
        let _ = writeln!(s, "\n[system]\nkind = \"{}\"", self.system.name());
        if let Some(n) = self.system.truncation() {
            let _ = writeln!(s, "n = {n}");
        }
        let _ = writeln!(s, "\n[initial]");
        match self.initial {
            InitialSpec::Primo { infected } => {
                let _ = writeln!(s, "preset = \"primo\"\ninfected = {infected:e}");
            }
            InitialSpec::Explicit(c) => {
                let _ = writeln!(s, "s = {:e}\ne = {:e}\ni = {:e}\nr = {:e}", c.s, c.e, c.i, c.r);
            }
        }
        let ic = &self.integration;
        let _ = writeln!(
            s,
            "\n[integration]\nt_start = {:e}\nt_end = {:e}\nsample_interval = {:e}\nmethod = \"{}\"",
            ic.t_start,
            ic.t_end,
            ic.sample_interval,
            ic.method.name()
        );
        match ic.method {
            Method::Rk45 { abs_tol, rel_tol, .. } => {
                let _ = writeln!(s, "abs_tol = {abs_tol:e}\nrel_tol = {rel_tol:e}");
            }
            Method::Rk4 { step } => {
                let _ = writeln!(s, "step = {step:e}");
            }
        }
        if let Some(a) = self.alpha {
            let _ = writeln!(s, "\n[observation]\nalpha = {a:e}");
        }
        for o in &self.outputs {
            let cols: Vec<String> = o.columns.iter().map(|c| format!("\"{c}\"")).collect();
            let _ = writeln!(s, "\n[[output]]\npath = \"{}\"\nselect = [{}]", o.path, cols.join(", "));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_matches_library_preset() {
        let cfg = preset("bjornstad-svi").unwrap();
        assert_eq!(cfg.params, ModelParams::bjornstad_svi());
        assert_eq!(cfg.system, SystemKind::NormalizedMicro { n: 10 });
        assert_eq!(cfg.initial, InitialSpec::Primo { infected: 1e-3 });
    }

    #[test]
    fn empty_document_lists_required_keys() {
        let e = parse_config("").unwrap_err().to_string();
        for k in REQUIRED {
            assert!(e.contains(k), "{e}");
        }
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = BJORNSTAD_SVI.replace("sigma =", "sigmma =");
        let e = parse_config(&text).unwrap_err().to_string();
        assert!(e.contains("sigmma"), "{e}");
    }

    #[test]
    fn echo_parses_back() {
        let cfg = preset("bjornstad-svi").unwrap();
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn explicit_normalized_start_must_be_on_simplex() {
        let text = BJORNSTAD_SVI.replace("preset = \"primo\"\ninfected = 1e-3", "s = 0.5\ni = 0.1");
        let e = parse_config(&text).unwrap_err().to_string();
        assert!(e.contains("initial"), "{e}");
    }

    #[test]
    fn selectors_must_exist() {
        let text = format!("{BJORNSTAD_SVI}\n[[output]]\npath = \"a.csv\"\nselect = [\"I\", \"I11\"]\n");
        assert!(parse_config(&text).unwrap_err().to_string().contains("I11"));
        let text = format!("{BJORNSTAD_SVI}\n[[output]]\npath = \"a.csv\"\nselect = [\"I\", \"I10\"]\n");
        assert_eq!(parse_config(&text).unwrap().outputs[0].columns, ["I", "I10"]);
    }
}
