//! Explicit Runge-Kutta integration of flat-vector ODEs with evenly spaced output.
//!
//! Two methods: classical fixed-step RK4 and adaptive Dormand-Prince 5(4). The
//! stepper always lands exactly on every sample time, so no dense-output
//! interpolation is involved.

use crate::error::{Error, Result};

/// Autonomous or time-dependent vector field `dx/dt = f(t, x)` on a flat state.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]);
}

impl<V: VectorField + ?Sized> VectorField for &V {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (**self).eval(t, x, dx)
    }
}

/// Wraps a closure as a [`VectorField`] of the given dimension.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64])> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (self.f)(t, x, dx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rk4 { step: f64 },
    Rk45 { abs_tol: f64, rel_tol: f64, max_step: f64 },
}

impl Method {
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn rk45_default() -> Self {
        Method::Rk45 { abs_tol: Self::DEFAULT_TOL, rel_tol: Self::DEFAULT_TOL, max_step: f64::INFINITY }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 { .. } => "rk4",
            Method::Rk45 { .. } => "rk45",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub method: Method,
    pub t_start: f64,
    pub t_end: f64,
    pub sample_interval: f64,
    /// Recorded components in `[-clamp, 0)` are set to 0. Applied to samples only,
    /// never to the internal stepper state.
    pub clamp: Option<f64>,
}

impl IntegrationConfig {
    /// Adaptive Dormand-Prince with `abs_tol = rel_tol = 1e-10`; small negative samples
    /// are clamped at the absolute tolerance.
    pub fn adaptive(t_start: f64, t_end: f64, sample_interval: f64) -> Self {
        IntegrationConfig {
            method: Method::rk45_default(),
            t_start,
            t_end,
            sample_interval,
            clamp: Some(Method::DEFAULT_TOL),
        }
    }

    pub fn fixed(t_start: f64, t_end: f64, sample_interval: f64, step: f64) -> Self {
        IntegrationConfig { method: Method::Rk4 { step }, t_start, t_end, sample_interval, clamp: None }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        let max_step = match self.method {
            Method::Rk45 { max_step, .. } => max_step,
            Method::Rk4 { .. } => f64::INFINITY,
        };
        self.method = Method::Rk45 { abs_tol, rel_tol, max_step };
        if self.clamp.is_some() {
            self.clamp = Some(abs_tol);
        }
        self
    }

    pub fn with_clamp(mut self, clamp: Option<f64>) -> Self {
        self.clamp = clamp;
        self
    }

    /// Number of sample intervals; validates the whole config.
    pub fn sample_count(&self) -> Result<usize> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return bad("t_start and t_end must be finite".into());
        }
        if self.t_end < self.t_start {
            return bad(format!("t_end ({}) must not precede t_start ({})", self.t_end, self.t_start));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return bad(format!("sample_interval must be > 0, got {}", self.sample_interval));
        }
        match self.method {
            Method::Rk4 { step } if !(step > 0.0 && step.is_finite()) => {
                return bad(format!("rk4 step must be > 0, got {step}"));
            }
            Method::Rk45 { abs_tol, rel_tol, max_step } if !(abs_tol > 0.0 && rel_tol > 0.0 && max_step > 0.0) => {
                return bad("rk45 tolerances and max_step must be > 0".into());
            }
            _ => {}
        }
        let span = self.t_end - self.t_start;
        if span == 0.0 {
            return Ok(0);
        }
        let k = (span / self.sample_interval).round();
        if k < 1.0 || (k * self.sample_interval - span).abs() > 1e-9 * span {
            return bad(format!(
                "time span {span} is not a whole multiple of sample_interval {}",
                self.sample_interval
            ));
        }
        Ok(k as usize)
    }

    pub fn sample_times(&self) -> Result<Vec<f64>> {
        let k = self.sample_count()?;
        let mut times: Vec<f64> = (0..=k).map(|j| self.t_start + j as f64 * self.sample_interval).collect();
        if k > 0 {
            times[k] = self.t_end;
        }
        Ok(times)
    }
}

/// Evenly sampled solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory always holds the initial sample")
    }

    /// Time series of a single component.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[k]).collect()
    }
}

/// Integration statistics, returned alongside the trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

pub fn integrate<V: VectorField>(rhs: &V, x0: &[f64], cfg: &IntegrationConfig) -> Result<Trajectory> {
    integrate_with_stats(rhs, x0, cfg).map(|(t, _)| t)
}

pub fn integrate_with_stats<V: VectorField>(
    rhs: &V,
    x0: &[f64],
    cfg: &IntegrationConfig,
) -> Result<(Trajectory, IntegrationStats)> {
    if x0.len() != rhs.dim() {
        return Err(Error::InvalidConfig(format!(
            "initial state has length {}, vector field expects {}",
            x0.len(),
            rhs.dim()
        )));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteState { t: cfg.t_start });
    }
    let times = cfg.sample_times()?;
    let mut stepper: Box<dyn Stepper + '_> = match cfg.method {
        Method::Rk4 { step } => Box::new(Rk4::new(rhs, step)),
        Method::Rk45 { abs_tol, rel_tol, max_step } => Box::new(Dopri5::new(rhs, abs_tol, rel_tol, max_step)),
    };

    let mut x = x0.to_vec();
    let mut t = cfg.t_start;
    let mut states = Vec::with_capacity(times.len());
    states.push(sample(&x, cfg.clamp));
    for &target in &times[1..] {
        stepper.advance(&mut t, &mut x, target)?;
        states.push(sample(&x, cfg.clamp));
    }
    let stats = stepper.stats();
    Ok((Trajectory { times, states }, stats))
}

fn sample(x: &[f64], clamp: Option<f64>) -> Vec<f64> {
    match clamp {
        Some(tol) => x.iter().map(|&v| if v < 0.0 && v >= -tol { 0.0 } else { v }).collect(),
        None => x.to_vec(),
    }
}

trait Stepper {
    /// Advances `(t, x)` to exactly `target`.
    fn advance(&mut self, t: &mut f64, x: &mut Vec<f64>, target: f64) -> Result<()>;
    fn stats(&self) -> IntegrationStats;
}

fn ensure_finite(x: &[f64], t: f64) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

struct Rk4<'a, V> {
    f: &'a V,
    h: f64,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    stats: IntegrationStats,
}

impl<'a, V: VectorField> Rk4<'a, V> {
    fn new(f: &'a V, h: f64) -> Self {
        let n = f.dim();
        Rk4 {
            f,
            h,
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
            stats: IntegrationStats::default(),
        }
    }

    fn step(&mut self, t: f64, x: &mut [f64], h: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        self.f.eval(t, x, k1);
        for j in 0..x.len() {
            tmp[j] = x[j] + 0.5 * h * k1[j];
        }
        self.f.eval(t + 0.5 * h, tmp, k2);
        for j in 0..x.len() {
            tmp[j] = x[j] + 0.5 * h * k2[j];
        }
        self.f.eval(t + 0.5 * h, tmp, k3);
        for j in 0..x.len() {
            tmp[j] = x[j] + h * k3[j];
        }
        self.f.eval(t + h, tmp, k4);
        for j in 0..x.len() {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        self.stats.accepted += 1;
        self.stats.evaluations += 4;
    }
}

impl<V: VectorField> Stepper for Rk4<'_, V> {
    fn advance(&mut self, t: &mut f64, x: &mut Vec<f64>, target: f64) -> Result<()> {
        let start = *t;
        let span = target - start;
        // Whole steps from the interval start, so that aligned steps accumulate no drift.
        let steps = (span / self.h - 1e-9).ceil().max(1.0) as usize;
        for j in 0..steps {
            let t0 = start + j as f64 * self.h;
            let t1 = if j + 1 == steps { target } else { start + (j + 1) as f64 * self.h };
            self.step(t0, x, t1 - t0);
            ensure_finite(x, t1)?;
        }
        *t = target;
        Ok(())
    }

    fn stats(&self) -> IntegrationStats {
        self.stats
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS_PER_SAMPLE: usize = 10_000_000;

struct Dopri5<'a, V> {
    f: &'a V,
    atol: f64,
    rtol: f64,
    max_step: f64,
    h: Option<f64>,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    fsal_valid: bool,
    stats: IntegrationStats,
}

impl<'a, V: VectorField> Dopri5<'a, V> {
    fn new(f: &'a V, atol: f64, rtol: f64, max_step: f64) -> Self {
        let n = f.dim();
        let z = || vec![0.0; n];
        Dopri5 {
            f,
            atol,
            rtol,
            max_step,
            h: None,
            k: [z(), z(), z(), z(), z(), z(), z()],
            tmp: z(),
            y_new: z(),
            fsal_valid: false,
            stats: IntegrationStats::default(),
        }
    }

    fn eval(&mut self, slot: usize, t: f64) {
        let (f, tmp) = (self.f, &self.tmp);
        f.eval(t, tmp, &mut self.k[slot]);
        self.stats.evaluations += 1;
    }

    fn norm(&self, x: &[f64], err: &[f64]) -> f64 {
        let n = x.len();
        let s: f64 = (0..n)
            .map(|j| {
                let sc = self.atol + self.rtol * x[j].abs().max(self.y_new[j].abs());
                (err[j] / sc).powi(2)
            })
            .sum();
        (s / n as f64).sqrt()
    }

    /// Initial step heuristic of Hairer, Norsett & Wanner (II.4).
    fn initial_step(&mut self, t: f64, x: &[f64], span: f64) -> f64 {
        let n = x.len();
        let (atol, rtol) = (self.atol, self.rtol);
        let sc = |j: usize| atol + rtol * x[j].abs();
        let d0 = ((0..n).map(|j| (x[j] / sc(j)).powi(2)).sum::<f64>() / n as f64).sqrt();
        let d1 = ((0..n).map(|j| (self.k[0][j] / sc(j)).powi(2)).sum::<f64>() / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span).min(self.max_step);
        for j in 0..n {
            self.tmp[j] = x[j] + h0 * self.k[0][j];
        }
        self.eval(1, t + h0);
        let d2 = ((0..n).map(|j| ((self.k[1][j] - self.k[0][j]) / sc(j)).powi(2)).sum::<f64>() / n as f64).sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(span).min(self.max_step)
    }

    /// One trial step of size h from (t, x). Returns the scaled error norm; the
    /// candidate state is left in `y_new` and its derivative in `k[6]`.
    fn trial(&mut self, t: f64, x: &[f64], h: f64) -> f64 {
        let n = x.len();
        macro_rules! stage {
            ($slot:expr, $c:expr, $($kk:expr => $a:expr),+) => {{
                for j in 0..n {
                    self.tmp[j] = x[j] + h * (0.0 $(+ $a * self.k[$kk][j])+);
                }
                self.eval($slot, t + $c * h);
            }};
        }
        stage!(1, C2, 0 => A21);
        stage!(2, C3, 0 => A31, 1 => A32);
        stage!(3, C4, 0 => A41, 1 => A42, 2 => A43);
        stage!(4, C5, 0 => A51, 1 => A52, 2 => A53, 3 => A54);
        stage!(5, 1.0, 0 => A61, 1 => A62, 2 => A63, 3 => A64, 4 => A65);
        for j in 0..n {
            let k = &self.k;
            self.y_new[j] =
                x[j] + h * (A71 * k[0][j] + A73 * k[2][j] + A74 * k[3][j] + A75 * k[4][j] + A76 * k[5][j]);
        }
        {
            let (f, y_new) = (self.f, &self.y_new);
            f.eval(t + h, y_new, &mut self.k[6]);
            self.stats.evaluations += 1;
        }
        let k = &self.k;
        let err: Vec<f64> = (0..n)
            .map(|j| h * (E1 * k[0][j] + E3 * k[2][j] + E4 * k[3][j] + E5 * k[4][j] + E6 * k[5][j] + E7 * k[6][j]))
            .collect();
        if !self.y_new.iter().chain(err.iter()).all(|v| v.is_finite()) {
            return f64::INFINITY;
        }
        self.norm(x, &err)
    }
}

impl<V: VectorField> Stepper for Dopri5<'_, V> {
    fn advance(&mut self, t: &mut f64, x: &mut Vec<f64>, target: f64) -> Result<()> {
        if !self.fsal_valid {
            let f = self.f;
            f.eval(*t, x, &mut self.k[0]);
            self.stats.evaluations += 1;
            ensure_finite(&self.k[0], *t)?;
            self.fsal_valid = true;
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(*t, x, target - *t),
        };
        let mut steps = 0usize;
        while *t < target {
            steps += 1;
            if steps > MAX_STEPS_PER_SAMPLE {
                return Err(Error::StepUnderflow { t: *t, h });
            }
            h = h.min(self.max_step);
            let remaining = target - *t;
            let lands = h >= remaining * (1.0 - 1e-12);
            let h_try = if lands { remaining } else { h };
            if h_try <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: *t, h: h_try });
            }
            let err = self.trial(*t, x, h_try);
            if err <= 1.0 {
                *t = if lands { target } else { *t + h_try };
                std::mem::swap(x, &mut self.y_new);
                self.k.swap(0, 6);
                ensure_finite(x, *t)?;
                self.stats.accepted += 1;
                let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
                // A step shortened to hit a sample time does not shrink the proposal.
                h = if h_try < h { h.max(h_try * factor) } else { h_try * factor };
            } else {
                self.stats.rejected += 1;
                if !err.is_finite() {
                    h = h_try * MIN_FACTOR;
                    if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                        return Err(Error::NonFiniteState { t: *t + h_try });
                    }
                } else {
                    h = h_try * (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }

    fn stats(&self) -> IntegrationStats {
        self.stats
    }
}
