//! Right-hand sides of the macroscopic, microscopic, normalized and SIS systems.
//!
//! The flat `*_into` functions are what the integrator calls; the typed `rhs_*`
//! functions wrap them and report domain errors. Micro systems always read the
//! force of infection from the macroscopic part of the state, never from the
//! truncated block sum, so the first n blocks are exact.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrator::VectorField;
use crate::params::ModelParams;
use crate::state::{MacroState, MicroState, SisState};

/// Raw SEIRS system on (S, E, I, R).
pub fn macro_into(p: &ModelParams, x: &[f64], dx: &mut [f64]) {
    let (s, e, i, r) = (x[0], x[1], x[2], x[3]);
    let n = s + e + i + r;
    let incidence = p.beta * s * i / n;
    dx[0] = p.b * n - incidence + p.omega * r - p.mu * s;
    dx[1] = incidence - (p.sigma + p.mu) * e;
    dx[2] = p.sigma * e - (p.gamma + p.mu + p.nu) * i;
    dx[3] = p.gamma * i - (p.omega + p.mu) * r;
}

/// Raw macro system plus n reinfection blocks; recruitment `bN` enters block 1.
pub fn micro_into(p: &ModelParams, x: &[f64], dx: &mut [f64]) {
    macro_into(p, &x[..4], &mut dx[..4]);
    let n_tot = x[0] + x[1] + x[2] + x[3];
    let force = p.beta * x[2] / n_tot;
    let mut inflow = p.b * n_tot;
    for (blk, dblk) in x[4..].chunks_exact(4).zip(dx[4..].chunks_exact_mut(4)) {
        let (s, e, i, r) = (blk[0], blk[1], blk[2], blk[3]);
        dblk[0] = inflow - force * s - p.mu * s;
        dblk[1] = force * s - (p.sigma + p.mu) * e;
        dblk[2] = p.sigma * e - (p.gamma + p.mu + p.nu) * i;
        dblk[3] = p.gamma * i - (p.omega + p.mu) * r;
        inflow = p.omega * r;
    }
}

/// Normalized macro system on the simplex; independent of mu.
pub fn normalized_macro_into(p: &ModelParams, x: &[f64], dx: &mut [f64]) {
    let (s, e, i, r) = (x[0], x[1], x[2], x[3]);
    dx[0] = p.b - (p.beta - p.nu) * s * i + p.omega * r - p.b * s;
    dx[1] = p.beta * s * i - (p.sigma + p.b) * e + p.nu * i * e;
    dx[2] = p.sigma * e - (p.gamma + p.b + p.nu) * i + p.nu * i * i;
    dx[3] = p.gamma * i - (p.omega + p.b) * r + p.nu * i * r;
}

/// Normalized macro system plus n normalized blocks; block 1 receives `b`.
pub fn normalized_micro_into(p: &ModelParams, x: &[f64], dx: &mut [f64]) {
    normalized_macro_into(p, &x[..4], &mut dx[..4]);
    let i_tot = x[2];
    let mut inflow = p.b;
    for (blk, dblk) in x[4..].chunks_exact(4).zip(dx[4..].chunks_exact_mut(4)) {
        let (s, e, i, r) = (blk[0], blk[1], blk[2], blk[3]);
        dblk[0] = inflow - (p.beta - p.nu) * s * i_tot - p.b * s;
        dblk[1] = p.beta * s * i_tot - (p.sigma + p.b) * e + p.nu * i_tot * e;
        dblk[2] = p.sigma * e - (p.gamma + p.b + p.nu) * i + p.nu * i_tot * i;
        dblk[3] = p.gamma * i - (p.omega + p.b) * r + p.nu * i_tot * r;
        inflow = p.omega * r;
    }
}

/// SIS subsystem `[S, I, S1, I1]` with unit population; uses beta, gamma and mu only.
pub fn sis_into(p: &ModelParams, x: &[f64], dx: &mut [f64]) {
    let (s, i, s1, i1) = (x[0], x[1], x[2], x[3]);
    dx[0] = p.mu - p.beta * s * i - p.mu * s + p.gamma * i;
    dx[1] = p.beta * s * i - (p.mu + p.gamma) * i;
    dx[2] = p.mu - p.beta * s1 * i - p.mu * s1;
    dx[3] = p.beta * s1 * i - (p.mu + p.gamma) * i1;
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("state contains non-finite values".into()))
    }
}

fn check_population(x: &MacroState) -> Result<()> {
    check_finite(&x.to_array())?;
    if x.total() <= 0.0 {
        return Err(Error::ZeroPopulation);
    }
    Ok(())
}

pub fn rhs_macro(p: &ModelParams, x: &MacroState) -> Result<MacroState> {
    check_population(x)?;
    let mut dx = [0.0; 4];
    macro_into(p, &x.to_array(), &mut dx);
    Ok(MacroState::from_slice(&dx))
}

pub fn rhs_micro(p: &ModelParams, x: &MicroState) -> Result<MicroState> {
    check_population(&x.totals)?;
    let flat = x.to_flat();
    check_finite(&flat)?;
    let mut dx = vec![0.0; flat.len()];
    micro_into(p, &flat, &mut dx);
    MicroState::from_flat(&dx)
}

pub fn rhs_normalized_macro(p: &ModelParams, x: &MacroState) -> Result<MacroState> {
    check_finite(&x.to_array())?;
    let mut dx = [0.0; 4];
    normalized_macro_into(p, &x.to_array(), &mut dx);
    Ok(MacroState::from_slice(&dx))
}

pub fn rhs_normalized_micro(p: &ModelParams, x: &MicroState) -> Result<MicroState> {
    let flat = x.to_flat();
    check_finite(&flat)?;
    let mut dx = vec![0.0; flat.len()];
    normalized_micro_into(p, &flat, &mut dx);
    MicroState::from_flat(&dx)
}

pub fn rhs_sis(p: &ModelParams, x: &SisState) -> Result<SisState> {
    check_finite(&x.to_array())?;
    let mut dx = [0.0; 4];
    sis_into(p, &x.to_array(), &mut dx);
    Ok(SisState::from_slice(&dx))
}

/// Which dynamical system to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Macro,
    Micro { n: usize },
    NormalizedMacro,
    NormalizedMicro { n: usize },
    Sis,
}

impl SystemKind {
    pub fn dim(&self) -> usize {
        match *self {
            SystemKind::Macro | SystemKind::NormalizedMacro | SystemKind::Sis => 4,
            SystemKind::Micro { n } | SystemKind::NormalizedMicro { n } => MicroState::flat_len(n),
        }
    }

    pub fn truncation(&self) -> Option<usize> {
        match *self {
            SystemKind::Micro { n } | SystemKind::NormalizedMicro { n } => Some(n),
            _ => None,
        }
    }

    pub fn is_micro(&self) -> bool {
        self.truncation().is_some()
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self, SystemKind::NormalizedMacro | SystemKind::NormalizedMicro { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Macro => "macro",
            SystemKind::Micro { .. } => "micro",
            SystemKind::NormalizedMacro => "normalized-macro",
            SystemKind::NormalizedMicro { .. } => "normalized-micro",
            SystemKind::Sis => "sis",
        }
    }

    /// Parses a system name; micro systems take the truncation depth `n`.
    pub fn parse(name: &str, n: Option<usize>) -> Result<Self> {
        let need_n = || {
            n.filter(|&n| n >= 1)
                .ok_or_else(|| Error::Domain(format!("system {name:?} requires a truncation depth >= 1")))
        };
        match name {
            "macro" => Ok(SystemKind::Macro),
            "micro" => Ok(SystemKind::Micro { n: need_n()? }),
            "normalized-macro" => Ok(SystemKind::NormalizedMacro),
            "normalized-micro" => Ok(SystemKind::NormalizedMicro { n: need_n()? }),
            "sis" => Ok(SystemKind::Sis),
            other => Err(Error::Domain(format!("unknown system {other:?}"))),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.truncation() {
            Some(n) => write!(f, "{} (n = {n})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    /// Accepts `macro`, `normalized-macro`, `sis`, `micro:<n>` and `normalized-micro:<n>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((name, n)) => {
                let n = n.parse().map_err(|_| Error::Domain(format!("bad truncation depth in {s:?}")))?;
                SystemKind::parse(name, Some(n))
            }
            None => SystemKind::parse(s, None),
        }
    }
}

/// A model system bound to its parameters, usable as an integrator vector field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelField {
    pub params: ModelParams,
    pub kind: SystemKind,
}

impl ModelField {
    pub fn new(params: ModelParams, kind: SystemKind) -> Self {
        ModelField { params, kind }
    }
}

impl VectorField for ModelField {
    fn dim(&self) -> usize {
        self.kind.dim()
    }

    fn eval(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let p = &self.params;
        match self.kind {
            SystemKind::Macro => macro_into(p, x, dx),
            SystemKind::Micro { .. } => micro_into(p, x, dx),
            SystemKind::NormalizedMacro => normalized_macro_into(p, x, dx),
            SystemKind::NormalizedMicro { .. } => normalized_micro_into(p, x, dx),
            SystemKind::Sis => sis_into(p, x, dx),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TimeUnit;
    use crate::state::Compartments;
    use proptest::prelude::*;

    fn params() -> ModelParams {
        ModelParams::new(0.3, 0.2, 0.1, 0.01, 0.02, 0.001, 0.0008, TimeUnit::PerDay).unwrap()
    }

    #[test]
    fn no_infection_pressure() {
        let p = params();
        let x = MacroState::new(100.0, 0.0, 0.0, 5.0);
        let d = rhs_macro(&p, &x).unwrap();
        let n = x.total();
        assert_eq!(d.s, p.b * n - p.mu * x.s + p.omega * x.r);
        assert_eq!(d.e, 0.0);
        assert_eq!(d.i, 0.0);
    }

    #[test]
    fn zero_population_is_an_error() {
        let p = params();
        assert_eq!(rhs_macro(&p, &MacroState::default()), Err(Error::ZeroPopulation));
        let micro = MicroState::primo(Compartments::default(), 3).unwrap();
        assert_eq!(rhs_micro(&p, &micro), Err(Error::ZeroPopulation));
    }

    #[test]
    fn first_block_receives_recruitment() {
        let p = params();
        let x = MicroState::primo(Compartments::new(50.0, 0.0, 0.0, 0.0), 4).unwrap();
        let d = rhs_micro(&p, &x).unwrap();
        assert_eq!(d.blocks[0].s, p.b * 50.0 - p.mu * 50.0);
        assert_eq!((d.blocks[0].e, d.blocks[0].i, d.blocks[0].r), (0.0, 0.0, 0.0));
        for b in &d.blocks[1..] {
            assert_eq!(*b, Compartments::default());
        }
    }

    #[test]
    fn disease_free_point_is_stationary() {
        let d = rhs_normalized_macro(&params(), &MacroState::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(d, MacroState::default());
    }

    #[test]
    fn normalized_micro_reduces_to_raw_when_nu_is_zero() {
        let mut p = params();
        p.nu = 0.0;
        let raw = ModelParams { mu: p.b, ..p };
        let x = MicroState::new(
            Compartments::new(0.5, 0.1, 0.15, 0.25),
            vec![Compartments::new(0.2, 0.05, 0.05, 0.1), Compartments::new(0.1, 0.03, 0.04, 0.08)],
        )
        .unwrap();
        let a = rhs_normalized_micro(&p, &x).unwrap().to_flat();
        let b = rhs_micro(&raw, &x).unwrap().to_flat();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-14, "{u} vs {v}");
        }
    }

    #[test]
    fn sis_without_infection() {
        let p = params();
        let d = rhs_sis(&p, &SisState::new(0.7, 0.0, 0.4, 0.0)).unwrap();
        assert_eq!(d, SisState::new(p.mu - p.mu * 0.7, 0.0, p.mu - p.mu * 0.4, 0.0));
    }

    #[test]
    fn system_names() {
        assert_eq!("normalized-micro:10".parse::<SystemKind>().unwrap(), SystemKind::NormalizedMicro { n: 10 });
        assert_eq!("sis".parse::<SystemKind>().unwrap(), SystemKind::Sis);
        assert!("micro".parse::<SystemKind>().is_err());
        assert!("micro:0".parse::<SystemKind>().is_err());
        assert_eq!(SystemKind::Micro { n: 3 }.dim(), 16);
    }

    fn arb_params() -> impl Strategy<Value = ModelParams> {
        (0.0..2.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..0.1f64, 0.0..0.1f64, 0.0..0.01f64, 0.0..0.01f64).prop_map(
            |(beta, sigma, gamma, omega, nu, b, mu)| ModelParams {
                beta,
                sigma,
                gamma,
                omega,
                nu,
                b,
                mu,
                time_unit: TimeUnit::PerDay,
            },
        )
    }

    fn arb_simplex() -> impl Strategy<Value = MacroState> {
        (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_filter_map("nonzero", |(a, b, c, d)| {
            let t = a + b + c + d;
            (t > 1e-3).then(|| MacroState::new(a / t, b / t, c / t, d / t))
        })
    }

    proptest! {
        #[test]
        fn macro_sum_identity(p in arb_params(), x in arb_simplex(), scale in 1.0..1e6f64) {
            let x = x * scale;
            let d = rhs_macro(&p, &x).unwrap();
            let expected = (p.b - p.mu) * x.total() - p.nu * x.i;
            let mag = (p.b + p.mu + p.beta + p.sigma + p.gamma + p.omega + p.nu) * x.total();
            prop_assert!((d.total() - expected).abs() <= 1e-14 * mag.max(1e-300));
        }

        #[test]
        fn normalized_macro_conserves_simplex(p in arb_params(), x in arb_simplex()) {
            let d = rhs_normalized_macro(&p, &x).unwrap();
            prop_assert!(d.total().abs() <= 1e-13);
            let off = rhs_normalized_macro(&p, &(x * 1.1)).unwrap();
            let expected = (p.b - p.nu * x.i * 1.1) * (1.0 - 1.1 * x.total());
            prop_assert!((off.total() - expected).abs() <= 1e-13);
        }

        #[test]
        fn normalized_systems_ignore_mu(p in arb_params(), x in arb_simplex(), mu2 in 0.0..1.0f64) {
            let q = ModelParams { mu: mu2, ..p };
            prop_assert_eq!(rhs_normalized_macro(&p, &x).unwrap(), rhs_normalized_macro(&q, &x).unwrap());
            let m = MicroState::new(x, vec![x * 0.5, x * 0.25]).unwrap();
            prop_assert_eq!(rhs_normalized_micro(&p, &m).unwrap(), rhs_normalized_micro(&q, &m).unwrap());
        }

        #[test]
        fn sis_conserves_population(p in arb_params(), i in 0.0..1.0f64, f1 in 0.0..1.0f64, g1 in 0.0..1.0f64) {
            let x = SisState::new(1.0 - i, i, (1.0 - i) * f1, i * g1);
            let d = rhs_sis(&p, &x).unwrap();
            prop_assert!((d.s + d.i).abs() <= 1e-14);
        }

        #[test]
        fn boundary_derivatives_point_inward(p in arb_params(), x in arb_simplex(), k in 0usize..4, blk in 0usize..3) {
            let mut a = x.to_array();
            a[k] = 0.0;
            if a.iter().sum::<f64>() <= 0.0 {
                return Ok(());
            }
            let xm = MacroState::from_slice(&a);
            prop_assert!(rhs_macro(&p, &xm).unwrap().to_array()[k] >= 0.0);
            prop_assert!(rhs_normalized_macro(&p, &xm).unwrap().to_array()[k] >= 0.0);

            // micro blocks: zero one component of one block
            let mut blocks = vec![x * 0.5, x * 0.3, x * 0.1];
            let mut b = blocks[blk].to_array();
            b[k] = 0.0;
            blocks[blk] = Compartments::from_slice(&b);
            let m = MicroState::new(x, blocks).unwrap();
            prop_assert!(rhs_micro(&p, &m).unwrap().blocks[blk].to_array()[k] >= 0.0);
            prop_assert!(rhs_normalized_micro(&p, &m).unwrap().blocks[blk].to_array()[k] >= 0.0);

            let mut s = [1.0 - x.i, x.i, 0.5 * (1.0 - x.i), 0.5 * x.i];
            s[k] = 0.0;
            if k == 0 { s[1] = 1.0; s[3] = s[3].min(1.0); }
            if k == 1 { s[0] = 1.0; s[2] = s[2].min(1.0); }
            let ds = rhs_sis(&p, &SisState::from_slice(&s)).unwrap().to_array();
            prop_assert!(ds[k] >= 0.0);
        }
    }
}
