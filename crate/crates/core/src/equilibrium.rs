//! Basic reproduction number, endemic equilibrium of the normalized system, the
//! geometric reinfection structure, population fate and equilibrium Jacobians.
//!
//! Equilibria are computed in per-year rates; the returned fractions are unit free.

use std::fmt;

use num_complex::Complex64;

use crate::eigen::{self, Matrix4};
use crate::error::{Error, Result};
use crate::params::{ModelParams, TimeUnit};
use crate::roots::{self, ROOT_MAX_ITER, ROOT_TOL};
use crate::state::{Compartments, MacroState, MicroState};

/// R0 = σ/(σ+b) · β/(γ+ν+b).
pub fn compute_r0(p: &ModelParams) -> Result<f64> {
    let d1 = p.sigma + p.b;
    let d2 = p.gamma + p.nu + p.b;
    if d1 <= 0.0 || d2 <= 0.0 {
        return Err(Error::Domain(format!("R0 undefined: sigma+b = {d1}, gamma+nu+b = {d2}")));
    }
    Ok(p.sigma / d1 * p.beta / d2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndemicEquilibrium {
    pub r0: f64,
    pub i_star: f64,
    pub s_star: f64,
    pub e_star: f64,
    pub r_star: f64,
    /// Common ratio of the equilibrium distribution over reinfection indices.
    pub phi: f64,
    /// Critical stability number; only defined without disease mortality.
    pub zeta: Option<f64>,
    pub block1: Compartments,
    /// Scaled prevalence-equation defect at `i_star`, per-year rates.
    pub residual: f64,
}

impl EndemicEquilibrium {
    pub fn totals(&self) -> MacroState {
        MacroState::new(self.s_star, self.e_star, self.i_star, self.r_star)
    }

    /// Block i (1-based) of the equilibrium: `phi^(i-1) * block1`.
    pub fn block(&self, i: usize) -> Compartments {
        self.block1 * self.phi.powi(i as i32 - 1)
    }

    /// Normalized micro equilibrium truncated at depth n.
    pub fn micro_state(&self, n: usize) -> Result<MicroState> {
        let mut blocks = Vec::with_capacity(n);
        let mut blk = self.block1;
        for _ in 0..n {
            blocks.push(blk);
            blk = blk * self.phi;
        }
        MicroState::new(self.totals(), blocks)
    }
}

fn i_max(p: &ModelParams) -> f64 {
    if p.nu > 0.0 {
        [1.0, (p.omega + p.b) / p.nu, (p.sigma + p.b) / p.nu, (p.gamma + p.nu + p.b) / p.nu]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    } else {
        1.0
    }
}

/// S̄, Ē, R̄ as functions of Ī at an equilibrium of the normalized macro system.
fn companions(p: &ModelParams, i: f64) -> (f64, f64, f64) {
    let nu_i = p.nu * i;
    let s = (p.gamma + p.b + p.nu - nu_i) * (p.sigma + p.b - nu_i) / (p.sigma * p.beta);
    let e = (p.gamma + p.nu + p.b - nu_i) * i / p.sigma;
    let r = p.gamma * i / (p.omega + p.b - nu_i);
    (s, e, r)
}

/// Simplex defect S̄+Ē+Ī+R̄−1 along the curve of equilibria parametrized by Ī.
fn simplex_defect(p: &ModelParams, i: f64) -> f64 {
    let (s, e, r) = companions(p, i);
    s + e + i + r - 1.0
}

/// Defect of the scalar prevalence equation, multiplied through by b:
/// ((β−ν)Ī+b)(1−νĪ/(σ+b))(1−νĪ/(γ+ν+b)) − R0(b + γωĪ/(ω+b−νĪ)).
/// Rates are taken in the units of `p`.
pub fn prevalence_residual(p: &ModelParams, i: f64) -> Result<f64> {
    let r0 = compute_r0(p)?;
    let lhs = ((p.beta - p.nu) * i + p.b) * (1.0 - p.nu * i / (p.sigma + p.b)) * (1.0 - p.nu * i / (p.gamma + p.nu + p.b));
    let rhs = r0 * (p.b + p.gamma * p.omega * i / (p.omega + p.b - p.nu * i));
    Ok(lhs - rhs)
}

fn require_endemic(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if p.b <= 0.0 {
        return Err(Error::Precondition(format!("birth rate b must be > 0 for the endemic equilibrium, got {}", p.b)));
    }
    let r0 = compute_r0(p)?;
    if r0 <= 1.0 {
        return Err(Error::NoEndemicEquilibrium { r0 });
    }
    Ok(r0)
}

pub fn solve_endemic(p: &ModelParams) -> Result<EndemicEquilibrium> {
    let r0 = require_endemic(p)?;
    let q = p.per_year();
    let hi = i_max(&q) * (1.0 - 1e-12);
    let i = roots::find_root(|x| simplex_defect(&q, x), 0.0, hi, ROOT_TOL, ROOT_MAX_ITER)?;
    if i <= 0.0 {
        return Err(Error::NotConverged { what: "endemic prevalence root", iterations: ROOT_MAX_ITER });
    }
    let (s, e, r) = companions(&q, i);
    let nu_i = q.nu * i;
    let phi = q.omega / ((q.beta - q.nu) * i + q.b) * q.gamma / (q.omega + q.b - nu_i) * i / s;
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::InconsistentParameters(format!("reinfection ratio phi = {phi} outside [0, 1)")));
    }
    let s1 = q.b / ((q.beta - q.nu) * i + q.b);
    let i_over_s = i / s;
    let block1 = Compartments::new(
        s1,
        q.beta * i / (q.sigma + q.b - nu_i) * s1,
        i_over_s * s1,
        q.gamma / (q.omega + q.b - nu_i) * i_over_s * s1,
    );
    let zeta = if q.nu == 0.0 { Some(zeta_nu0(&q)) } else { None };
    let residual = prevalence_residual(&q, i)?;
    Ok(EndemicEquilibrium { r0, i_star: i, s_star: s, e_star: e, r_star: r, phi, zeta, block1, residual })
}

fn zeta_nu0(p: &ModelParams) -> f64 {
    let (b, s, g, w) = (p.b, p.sigma, p.gamma, p.omega);
    ((g + b) * (s + b) * (w + b) - w * g * s) / (s * b * (w + b))
}

/// Closed forms available without disease mortality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormNu0 {
    pub zeta: f64,
    pub i_star: f64,
    pub phi: f64,
}

pub fn closed_form_nu0(p: &ModelParams) -> Result<ClosedFormNu0> {
    if p.nu != 0.0 {
        return Err(Error::Precondition(format!("closed forms need nu = 0, got {}", p.nu)));
    }
    let r0 = require_endemic(p)?;
    let q = p.per_year();
    let zeta = zeta_nu0(&q);
    let i_star = (r0 - 1.0) / (r0 * zeta);
    let phi = q.gamma * q.omega * (r0 - 1.0) / (q.beta * (q.omega + q.b) - q.gamma * q.omega);
    Ok(ClosedFormNu0 { zeta, i_star, phi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PopulationFate {
    Vanishes,
    Constant,
    ConvergesPositive,
    Diverges,
    Indeterminate,
}

impl fmt::Display for PopulationFate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PopulationFate::Vanishes => "N-vanishes",
            PopulationFate::Constant => "N-constant",
            PopulationFate::ConvergesPositive => "N-converges-positive",
            PopulationFate::Diverges => "N-diverges",
            PopulationFate::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FateClass {
    pub fate: PopulationFate,
    /// "1", "2a", "2b-i", "2b-ii", "3a", "3b", or "boundary" when no case applies.
    pub case: &'static str,
    /// b − μ − νĪ* in per-year rates, when it was needed.
    pub margin: Option<f64>,
}

pub const FATE_BOUNDARY_TOL: f64 = 1e-12;

/// Long-run behaviour of the total population of the raw macro system.
pub fn classify_fate(p: &ModelParams) -> Result<FateClass> {
    p.validate()?;
    let q = p.per_year();
    let r0 = compute_r0(&q)?;
    let class = |fate, case| FateClass { fate, case, margin: None };
    if q.b < q.mu {
        return Ok(class(PopulationFate::Vanishes, "1"));
    }
    if q.b == q.mu {
        return Ok(if q.nu == 0.0 {
            class(PopulationFate::Constant, "2a")
        } else if r0 < 1.0 {
            class(PopulationFate::ConvergesPositive, "2b-i")
        } else if r0 > 1.0 {
            class(PopulationFate::Vanishes, "2b-ii")
        } else {
            class(PopulationFate::Indeterminate, "boundary")
        });
    }
    let i_star = if r0 > 1.0 { solve_endemic(&q)?.i_star } else { 0.0 };
    let margin = q.b - q.mu - q.nu * i_star;
    let (fate, case) = if margin.abs() < FATE_BOUNDARY_TOL {
        (PopulationFate::Indeterminate, "boundary")
    } else if margin > 0.0 {
        (PopulationFate::Diverges, "3a")
    } else if r0 > 1.0 {
        (PopulationFate::Vanishes, "3b")
    } else {
        (PopulationFate::Indeterminate, "boundary")
    };
    Ok(FateClass { fate, case, margin: Some(margin) })
}

/// Jacobian of the normalized macro system at the equilibrium totals, in the rate units of `p`.
pub fn jacobian_macro(p: &ModelParams, eq: &EndemicEquilibrium) -> Matrix4 {
    jacobian_macro_at(p, &eq.totals())
}

/// Jacobian of the normalized macro system at an arbitrary state.
pub fn jacobian_macro_at(p: &ModelParams, x: &MacroState) -> Matrix4 {
    let (s, e, i, r) = (x.s, x.e, x.i, x.r);
    let (beta, sigma, gamma, omega, nu, b) = (p.beta, p.sigma, p.gamma, p.omega, p.nu, p.b);
    [
        [-(beta - nu) * i - b, 0.0, -(beta - nu) * s, omega],
        [beta * i, -(sigma + b) + nu * i, beta * s + nu * e, 0.0],
        [0.0, sigma, -(gamma + b + nu) + 2.0 * nu * i, 0.0],
        [0.0, 0.0, gamma + nu * r, -(omega + b) + nu * i],
    ]
}

/// Diagonal block shared by every reinfection index of the micro Jacobian.
pub fn jacobian_micro_block(p: &ModelParams, eq: &EndemicEquilibrium) -> Matrix4 {
    let i = eq.i_star;
    let (beta, sigma, gamma, omega, nu, b) = (p.beta, p.sigma, p.gamma, p.omega, p.nu, p.b);
    [
        [-(beta - nu) * i - b, 0.0, 0.0, 0.0],
        [beta * i, -(sigma + b) + nu * i, 0.0, 0.0],
        [0.0, sigma, -(gamma + b + nu) + nu * i, 0.0],
        [0.0, 0.0, gamma, -(omega + b) + nu * i],
    ]
}

pub fn eigenvalues_4x4(m: &Matrix4) -> Result<[Complex64; 4]> {
    eigen::eigenvalues_4x4(m)
}

/// Spectra of both equilibrium Jacobians with rates expressed per `unit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectra {
    pub unit: TimeUnit,
    pub macro_eigs: [Complex64; 4],
    pub micro_eigs: [Complex64; 4],
}

impl Spectra {
    pub fn hurwitz(&self) -> bool {
        eigen::is_hurwitz(&self.macro_eigs) && eigen::is_hurwitz(&self.micro_eigs)
    }
}

pub fn spectra(p: &ModelParams, eq: &EndemicEquilibrium, unit: TimeUnit) -> Result<Spectra> {
    let q = p.in_unit(unit);
    Ok(Spectra {
        unit,
        macro_eigs: eigenvalues_4x4(&jacobian_macro(&q, eq))?,
        micro_eigs: eigenvalues_4x4(&jacobian_micro_block(&q, eq))?,
    })
}
