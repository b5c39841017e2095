//! Mean numbers of past infections at the endemic equilibrium, analytic and measured.
//!
//! An individual in S_i has been infected i−1 times; one in E_i, I_i or R_i, i times.

use crate::equilibrium::{compute_r0, EndemicEquilibrium};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::MicroState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReinfectionStats {
    /// Mean number of past infections among susceptibles.
    pub mean_susceptible: f64,
    /// Mean infection count in each of the E, I and R classes.
    pub mean_infected_class: f64,
    /// Population-wide mean.
    pub mean_population: f64,
}

pub fn stats_analytic(eq: &EndemicEquilibrium, p: &ModelParams) -> Result<ReinfectionStats> {
    if eq.r0 <= 1.0 {
        return Err(Error::NoEndemicEquilibrium { r0: eq.r0 });
    }
    let phi = eq.phi;
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::Domain(format!("phi = {phi} outside [0, 1)")));
    }
    let q = p.per_year();
    let denom = q.b - q.nu * eq.i_star;
    if denom <= 0.0 {
        return Err(Error::Domain(format!("b - nu*I* = {denom} must be > 0")));
    }
    let one_minus = 1.0 - phi;
    Ok(ReinfectionStats {
        mean_susceptible: phi / one_minus,
        mean_infected_class: 1.0 / one_minus,
        mean_population: (q.b - q.b * phi - q.nu * eq.block1.i) / denom / (one_minus * one_minus) - eq.s_star,
    })
}

/// Closed forms in R0, β, γ, ω, b, valid without disease mortality.
pub fn stats_closed_form_nu0(p: &ModelParams) -> Result<ReinfectionStats> {
    if p.nu != 0.0 {
        return Err(Error::Precondition(format!("closed forms need nu = 0, got {}", p.nu)));
    }
    p.validate()?;
    let r0 = compute_r0(p)?;
    if r0 <= 1.0 {
        return Err(Error::NoEndemicEquilibrium { r0 });
    }
    let q = p.per_year();
    let bw = q.beta * (q.omega + q.b);
    let gw = q.gamma * q.omega;
    let d = bw - gw * r0;
    if d <= 0.0 {
        return Err(Error::InconsistentParameters(format!(
            "beta(omega+b) - gamma*omega*R0 = {d} <= 0 would force phi >= 1"
        )));
    }
    Ok(ReinfectionStats {
        mean_susceptible: gw * (r0 - 1.0) / d,
        mean_infected_class: (bw - gw) / d,
        mean_population: bw * (r0 - 1.0) / (d * r0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalStats {
    pub stats: ReinfectionStats,
    /// 1 − (sum over the stored blocks)/(macroscopic total): mass beyond the truncation.
    pub tail_mass: f64,
}

/// Means over the stored blocks 1..=n only; the tail beyond n is left out of every ratio
/// and reported separately.
pub fn stats_empirical(x: &MicroState) -> Result<EmpiricalStats> {
    let (mut s0, mut s1, mut c0, mut c1) = (0.0, 0.0, 0.0, 0.0);
    for (k, blk) in x.blocks.iter().enumerate() {
        let i = (k + 1) as f64;
        let c = blk.e + blk.i + blk.r;
        s0 += blk.s;
        s1 += (i - 1.0) * blk.s;
        c0 += c;
        c1 += i * c;
    }
    if s0 <= 0.0 || c0 <= 0.0 {
        return Err(Error::Domain(format!(
            "empty class in the stored blocks: sum S_i = {s0}, sum (E_i+I_i+R_i) = {c0}"
        )));
    }
    let total = x.totals.total();
    if total <= 0.0 {
        return Err(Error::ZeroPopulation);
    }
    Ok(EmpiricalStats {
        stats: ReinfectionStats {
            mean_susceptible: s1 / s0,
            mean_infected_class: c1 / c0,
            mean_population: (s1 + c1) / (s0 + c0),
        },
        tail_mass: 1.0 - (s0 + c0) / total,
    })
}
