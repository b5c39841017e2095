//! The work behind each subcommand. Everything here returns values; `main` prints them.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use reinfect::equilibrium::spectra;
use reinfect::integrator::{integrate, Trajectory};
use reinfect::model::{ModelField, SystemKind};
use reinfect::{
    classify_fate, closed_form_nu0, compute_r0, identify_from_y_only, identify_full, reconstruct_states,
    solve_endemic, stats_analytic, stats_closed_form_nu0, IdentificationResult, MicroState, ModelParams,
    ObservedSeries, SisState, TimeUnit,
};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::table::{columns, row, write_csv, CsvTable, Report};

pub const Y_ONLY_NOTICE: &str = "not identifiable: returning β/α and β−γ only";
pub const RESOLVED_CONFIG: &str = "scenario.toml";
pub const RECONSTRUCTED: &str = "reconstructed.csv";

/// Integrates the configured system; times in days.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Trajectory> {
    let field = ModelField::new(cfg.params_per_day(), cfg.system);
    Ok(integrate(&field, &cfg.initial_state()?, &cfg.integration)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub system: SystemKind,
    pub samples: usize,
    pub t_end: f64,
    /// Header (without `t`) and values of the last row.
    pub last: Vec<(String, f64)>,
    /// Largest |N − 1| over the samples, for normalized and SIS runs.
    pub conservation_defect: Option<f64>,
    /// 1 − (sum of blocks)/(totals) at the last sample, for micro runs.
    pub tail_mass: Option<f64>,
    pub written: Vec<PathBuf>,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system = {}", self.system)?;
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "t_end_days = {:e}", self.t_end)?;
        for (k, v) in self.last.iter().take(5) {
            writeln!(f, "final {k} = {v:e}")?;
        }
        if let Some(d) = self.conservation_defect {
            writeln!(f, "conservation_defect = {d:e}")?;
        }
        if let Some(t) = self.tail_mass {
            writeln!(f, "tail_mass = {t:e}")?;
        }
        for p in &self.written {
            writeln!(f, "wrote {}", p.display())?;
        }
        Ok(())
    }
}

pub fn summarize(cfg: &ScenarioConfig, tr: &Trajectory) -> Result<RunSummary> {
    let header = columns(cfg.system, cfg.alpha.is_some());
    let last_x = tr.last();
    let last = header[1..].iter().cloned().zip(row(cfg.system, cfg.alpha, last_x)).collect();
    let conservation_defect = (cfg.system.is_normalized() || cfg.system == SystemKind::Sis).then(|| {
        tr.states.iter().map(|x| (x[0] + x[1] + if cfg.system == SystemKind::Sis { 0.0 } else { x[2] + x[3] } - 1.0).abs()).fold(0.0, f64::max)
    });
    let tail_mass = if cfg.system.is_micro() {
        let m = MicroState::from_flat(last_x)?;
        Some(1.0 - m.block_sum().total() / m.totals.total())
    } else {
        None
    };
    Ok(RunSummary {
        system: cfg.system,
        samples: tr.len(),
        t_end: *tr.times.last().unwrap_or(&cfg.integration.t_start),
        last,
        conservation_defect,
        tail_mass,
        written: Vec::new(),
    })
}

/// Runs the scenario and writes every configured CSV plus the resolved config into `out`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<RunSummary> {
    let tr = simulate(cfg)?;
    let mut summary = summarize(cfg, &tr)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let all = columns(cfg.system, cfg.alpha.is_some());
    let rows: Vec<Vec<f64>> = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(&t, x)| {
            let mut r = vec![t];
            r.extend(row(cfg.system, cfg.alpha, x));
            r
        })
        .collect();
    for o in &cfg.outputs {
        let idx: Vec<usize> = std::iter::once(0)
            .chain(o.columns.iter().map(|c| all.iter().position(|a| a == c).expect("validated selector")))
            .collect();
        let header: Vec<String> = idx.iter().map(|&k| all[k].clone()).collect();
        let path = out.join(&o.path);
        write_csv(&path, &header, rows.iter().map(|r| idx.iter().map(|&k| r[k]).collect()))?;
        summary.written.push(path);
    }
    let path = out.join(RESOLVED_CONFIG);
    std::fs::write(&path, cfg.to_toml()).map_err(|e| CliError::io(&path, e))?;
    summary.written.push(path);
    Ok(summary)
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:e}", z.re)
    } else {
        format!("{:e}{}{:e}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
    }
}

fn fmt_spectrum(v: &[Complex64]) -> String {
    v.iter().map(|&z| fmt_complex(z)).collect::<Vec<_>>().join(", ")
}

fn push_fate(r: &mut Report, p: &ModelParams, unit: TimeUnit) -> Result<()> {
    let c = classify_fate(p)?;
    r.push("fate", c.fate);
    r.push("fate_case", c.case);
    if let Some(m) = c.margin {
        r.num("fate_margin", m * TimeUnit::PerYear.rate_factor(unit));
    }
    Ok(())
}

/// R0, the endemic equilibrium, mean reinfection numbers, both Jacobian spectra and the
/// population fate. Rates are reported per `unit`.
pub fn equilibrium_report(p: &ModelParams, unit: TimeUnit) -> Result<Report> {
    let mut r = Report::default();
    r.push("units", format!("per {unit}"));
    let r0 = compute_r0(p)?;
    r.num("R0", r0);
    if r0 <= 1.0 {
        r.push("equilibrium", "disease-free");
        for k in ["S*", "E*", "I*", "R*"] {
            r.num(k, if k == "S*" { 1.0 } else { 0.0 });
        }
        push_fate(&mut r, p, unit)?;
        return Ok(r);
    }
    let eq = solve_endemic(p)?;
    r.push("equilibrium", "endemic");
    r.num("S*", eq.s_star);
    r.num("E*", eq.e_star);
    r.num("I*", eq.i_star);
    r.num("R*", eq.r_star);
    r.num("phi", eq.phi);
    if p.nu == 0.0 {
        r.num("zeta", closed_form_nu0(p)?.zeta);
    }
    r.num("S1*", eq.block1.s);
    r.num("E1*", eq.block1.e);
    r.num("I1*", eq.block1.i);
    r.num("R1*", eq.block1.r);
    r.num("S1*/S*", eq.block1.s / eq.s_star);
    match stats_analytic(&eq, p) {
        Ok(s) => {
            r.num("mean_reinfections_susceptible", s.mean_susceptible);
            r.num("mean_reinfections_infected_classes", s.mean_infected_class);
            r.num("mean_reinfections_population", s.mean_population);
        }
        Err(e) => r.push("mean_reinfections", format!("unavailable ({e})")),
    }
    let sp = spectra(p, &eq, unit)?;
    r.push("macro_eigenvalues", fmt_spectrum(&sp.macro_eigs));
    r.push("micro_block_eigenvalues", fmt_spectrum(&sp.micro_eigs));
    r.push("hurwitz", sp.hurwitz());
    push_fate(&mut r, p, unit)?;
    Ok(r)
}

/// Mean reinfection numbers at the endemic equilibrium, with the ν = 0 closed forms.
pub fn stats_report(p: &ModelParams) -> Result<Report> {
    let mut r = Report::default();
    let eq = solve_endemic(p)?;
    r.num("R0", eq.r0);
    r.num("phi", eq.phi);
    let s = stats_analytic(&eq, p)?;
    r.num("mean_reinfections_susceptible", s.mean_susceptible);
    r.num("mean_reinfections_infected_classes", s.mean_infected_class);
    r.num("mean_reinfections_population", s.mean_population);
    if p.nu == 0.0 {
        let c = stats_closed_form_nu0(p)?;
        r.num("closed_form_susceptible", c.mean_susceptible);
        r.num("closed_form_infected_classes", c.mean_infected_class);
        r.num("closed_form_population", c.mean_population);
    }
    Ok(r)
}

pub fn fate_report(p: &ModelParams, unit: TimeUnit) -> Result<Report> {
    let mut r = Report::default();
    r.push("units", format!("per {unit}"));
    r.num("R0", compute_r0(p)?);
    r.num("b_minus_mu", (p.b - p.mu) * p.time_unit.rate_factor(unit));
    push_fate(&mut r, p, unit)?;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyRequest {
    /// CSV with columns `t` (days), `y` and optionally `y1`.
    pub input: PathBuf,
    /// Separate CSV with columns `t` and `y1`.
    pub y1: Option<PathBuf>,
    /// Natural mortality, per day.
    pub mu_per_day: f64,
    pub window: Option<(f64, f64)>,
    /// Unit of the reported rates.
    pub unit: TimeUnit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyOutcome {
    pub report: Report,
    /// Set when only β/α and β−γ could be returned.
    pub notice: Option<&'static str>,
    pub series: ObservedSeries,
    pub full: Option<IdentificationResult>,
    pub states: Option<Vec<SisState>>,
}

fn required<'a>(t: &'a CsvTable, name: &str, path: &Path) -> Result<&'a [f64]> {
    t.column(name).ok_or_else(|| CliError::csv(path, format!("missing column {name:?}")))
}

pub fn load_series(input: &Path, y1_path: Option<&Path>) -> Result<ObservedSeries> {
    let table = CsvTable::read(input)?;
    let times = required(&table, "t", input)?.to_vec();
    let y = required(&table, "y", input)?.to_vec();
    let mut y1 = table.column("y1").map(<[f64]>::to_vec);
    if let Some(p) = y1_path {
        if y1.is_some() {
            return Err(CliError::Usage(format!("{} already has a y1 column", input.display())));
        }
        let t1 = CsvTable::read(p)?;
        let times1 = required(&t1, "t", p)?;
        let same = times1.len() == times.len()
            && times1.iter().zip(&times).all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0));
        if !same {
            return Err(CliError::csv(p, format!("time grid differs from {}", input.display())));
        }
        y1 = Some(required(&t1, "y1", p)?.to_vec());
    }
    Ok(ObservedSeries::new(times, y, y1)?)
}

/// Runs the y-only estimate and, when y1 is available, the full recovery of (α, β, γ).
pub fn identify(req: &IdentifyRequest) -> Result<IdentifyOutcome> {
    let mut series = load_series(&req.input, req.y1.as_deref())?;
    if let Some((t0, t1)) = req.window {
        series = series.window(t0, t1)?;
    }
    let k = TimeUnit::PerDay.rate_factor(req.unit);
    let mut r = Report::default();
    r.push("units", format!("per {}", req.unit));
    r.num("mu", req.mu_per_day * k);
    r.num("window_start_days", series.times[0]);
    r.num("window_end_days", *series.times.last().unwrap());
    let y_only = identify_from_y_only(&series, req.mu_per_day)?;
    r.num("beta_over_alpha", y_only.beta_over_alpha * k);
    r.num("beta_minus_gamma", y_only.beta_minus_gamma * k);
    r.push("y_only_samples", y_only.samples);
    if series.y1.is_none() {
        return Ok(IdentifyOutcome { report: r, notice: Some(Y_ONLY_NOTICE), series, full: None, states: None });
    }
    let full = identify_full(&series, req.mu_per_day)?;
    r.num("alpha", full.alpha);
    r.num("beta", full.beta * k);
    r.num("gamma", full.gamma * k);
    r.num("R0", full.r0);
    if let Some(theta) = full.theta {
        r.num("theta", theta);
    }
    r.num("residual", full.residual * k);
    r.push("samples", full.samples);
    let states = reconstruct_states(&series, &full, req.mu_per_day)?;
    Ok(IdentifyOutcome { report: r, notice: None, series, full: Some(full), states: Some(states) })
}

/// Writes t, S, I, S1, I1 and w (per day) for every sample of the window.
pub fn write_reconstruction(o: &IdentifyOutcome, path: &Path) -> Result<bool> {
    let (Some(full), Some(states)) = (&o.full, &o.states) else {
        return Ok(false);
    };
    let header: Vec<String> = ["t", "S", "I", "S1", "I1", "w"].map(String::from).to_vec();
    let rows = o.series.times.iter().zip(states).zip(&full.w_series).map(|((&t, x), &w)| vec![t, x.s, x.i, x.s1, x.i1, w]);
    write_csv(path, &header, rows)?;
    Ok(true)
}
