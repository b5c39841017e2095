#![allow(dead_code)]

use reinfect::integrator::{integrate, IntegrationConfig, Trajectory};
use reinfect::model::{ModelField, SystemKind};
use reinfect::{Compartments, MicroState, ModelParams, DAYS_PER_YEAR};

pub const YEAR: f64 = DAYS_PER_YEAR;

/// Preset start: all mass in block 1 with I1 = I = 1e-3 and S1 = S = 1 - 1e-3.
pub fn primo_start(n: usize) -> Vec<f64> {
    MicroState::primo(Compartments::new(1.0 - 1e-3, 0.0, 1e-3, 0.0), n).unwrap().to_flat()
}

/// Normalized micro run of the preset, sampled every `every` days.
pub fn run_preset(n: usize, years: f64, every: f64) -> Trajectory {
    let p = ModelParams::bjornstad_svi();
    let cfg = IntegrationConfig::adaptive(0.0, years * YEAR, every);
    integrate(&ModelField::new(p, SystemKind::NormalizedMicro { n }), &primo_start(n), &cfg).unwrap()
}

/// P(Poisson(lambda) >= n), summed upward from n to avoid cancellation.
pub fn poisson_upper_tail(lambda: f64, n: usize) -> f64 {
    let ln_pmf = |k: usize| -lambda + k as f64 * lambda.ln() - (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
    let mut term = ln_pmf(n).exp();
    let mut sum = 0.0;
    let mut k = n;
    while term > 1e-300 && k < n + 10_000 {
        sum += term;
        k += 1;
        term *= lambda / k as f64;
    }
    sum
}

/// Neumaier-compensated sum.
pub fn ksum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
