//! Parameter identification for the SIS subsystem from its equilibrium or from the
//! measured outputs y = αI and y1 = αI1. Rates are per day, times in days.

use crate::error::{Error, Result};
use crate::finite_diff::{estimate_smooth_derivatives, first_derivative, second_derivative, uniform_step, MIN_SAMPLES};
use crate::params::ModelParams;
use crate::state::SisState;

/// Samples with |d/dt ln y| below this are treated as stationary.
pub const FLAT_LOG_SLOPE: f64 = 1e-8;
/// Fraction of the remaining samples with the smallest |determinant| that is discarded.
pub const DISCARD_FRACTION: f64 = 0.1;
/// Samples whose determinant or β-coefficient is below this fraction of the window
/// maximum are unusable.
pub const SINGULAR_REL: f64 = 1e-8;
/// Stencil half-width excluded at each end of the window.
const EDGE: usize = 2;

/// Measured output series on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSeries {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub y1: Option<Vec<f64>>,
    /// Known detection rate, for synthetic validation only.
    pub alpha_true: Option<f64>,
}

impl ObservedSeries {
    pub fn new(times: Vec<f64>, y: Vec<f64>, y1: Option<Vec<f64>>) -> Result<Self> {
        let s = ObservedSeries { times, y, y1, alpha_true: None };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if self.y.len() != n || self.y1.as_ref().is_some_and(|v| v.len() != n) {
            return Err(Error::InvalidSeries("times, y and y1 must have the same length".into()));
        }
        if n < MIN_SAMPLES {
            return Err(Error::InvalidSeries(format!("need at least {MIN_SAMPLES} samples, got {n}")));
        }
        uniform_step(&self.times)?;
        for (k, &y) in self.y.iter().enumerate() {
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::InvalidSeries(format!("y[{k}] = {y} outside [0, 1]")));
            }
        }
        if let Some(y1) = &self.y1 {
            for (k, (&a, &b)) in y1.iter().zip(&self.y).enumerate() {
                if !(a >= 0.0 && a <= b) {
                    return Err(Error::InvalidSeries(format!("y1[{k}] = {a} outside [0, y = {b}]")));
                }
            }
        }
        Ok(())
    }

    /// Samples with `t0 <= t <= t1`.
    pub fn window(&self, t0: f64, t1: f64) -> Result<ObservedSeries> {
        if !(t0 < t1) {
            return Err(Error::InvalidSeries(format!("empty window {t0}:{t1}")));
        }
        let idx: Vec<usize> = (0..self.times.len()).filter(|&k| self.times[k] >= t0 && self.times[k] <= t1).collect();
        let pick = |v: &Vec<f64>| idx.iter().map(|&k| v[k]).collect::<Vec<f64>>();
        let s = ObservedSeries {
            times: pick(&self.times),
            y: pick(&self.y),
            y1: self.y1.as_ref().map(pick),
            alpha_true: self.alpha_true,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn step(&self) -> Result<f64> {
        uniform_step(&self.times)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumIdentification {
    pub r0: f64,
    /// Share of primo-infected among the infected, I1*/I*.
    pub theta: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Recovers (R0, θ, β, γ) of the SIS model from its endemic prevalences and a known μ.
pub fn identify_from_equilibrium(i_star: f64, i1_star: f64, mu: f64) -> Result<EquilibriumIdentification> {
    if !(i_star > 0.0 && i_star < 1.0) {
        return Err(Error::Domain(format!("I* must lie in (0, 1), got {i_star}")));
    }
    if !(i1_star > 0.0 && i1_star <= i_star) {
        return Err(Error::Domain(format!("I1* must lie in (0, I*], got {i1_star}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("mu must be > 0, got {mu}")));
    }
    let r0 = 1.0 / (1.0 - i_star);
    if r0 <= 1.0 {
        return Err(Error::InconsistentParameters(format!("implied R0 = {r0} <= 1 with I1* > 0")));
    }
    let theta = i1_star / i_star;
    let k = mu * r0 / (theta * (r0 - 1.0));
    Ok(EquilibriumIdentification { r0, theta, beta: k * (r0 - theta), gamma: k * (1.0 - theta) })
}

/// Endemic equilibrium of the SIS subsystem with unit population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisEquilibrium {
    pub r0: f64,
    pub state: SisState,
    pub theta: f64,
}

pub fn sis_equilibrium(p: &ModelParams) -> Result<SisEquilibrium> {
    p.validate()?;
    let m = p.gamma + p.mu;
    if m <= 0.0 {
        return Err(Error::Domain("gamma + mu must be > 0".into()));
    }
    let r0 = p.beta / m;
    if r0 <= 1.0 {
        return Err(Error::NoEndemicEquilibrium { r0 });
    }
    let i = 1.0 - 1.0 / r0;
    let s1 = p.mu / (p.beta * i + p.mu);
    let i1 = p.beta * s1 * i / m;
    Ok(SisEquilibrium { r0, state: SisState::new(1.0 / r0, i, s1, i1), theta: i1 / i })
}

/// The two combinations identifiable from y alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YOnlyEstimate {
    pub beta_over_alpha: f64,
    pub beta_minus_gamma: f64,
    pub samples: usize,
}

struct YTerms {
    h: f64,
    /// Indices of interior, non-stationary samples.
    used: Vec<usize>,
    dy: Vec<f64>,
    l: Vec<f64>,
    q: Vec<f64>,
}

fn y_terms(s: &ObservedSeries) -> Result<YTerms> {
    s.validate()?;
    let h = s.step()?;
    let d = estimate_smooth_derivatives(&s.y, h)?;
    let n = s.y.len();
    let interior = EDGE..n - EDGE;
    let used: Vec<usize> = interior.filter(|&k| d.log_d1[k].abs() >= FLAT_LOG_SLOPE).collect();
    if used.is_empty() {
        return Err(Error::DegenerateTrajectory);
    }
    let positive = d.d1[used[0]] > 0.0;
    if used.iter().any(|&k| (d.d1[k] > 0.0) != positive) {
        return Err(Error::NonMonotoneWindow);
    }
    let q = d.log_d2.iter().zip(&d.log_d1).map(|(a, b)| a / b).collect();
    Ok(YTerms { h, used, dy: d.d1, l: d.log_d1, q })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// β/α and β−γ from the y series alone; α, β, γ separately are not identifiable from y.
pub fn identify_from_y_only(s: &ObservedSeries, mu: f64) -> Result<YOnlyEstimate> {
    let t = y_terms(s)?;
    Ok(y_only_from_terms(&t, mu))
}

fn y_only_from_terms(t: &YTerms, mu: f64) -> YOnlyEstimate {
    let boa = t.used.iter().map(|&k| -t.q[k] * t.l[k] / t.dy[k]).collect();
    let bmg = t.used.iter().map(|&k| mu + t.l[k] - t.q[k]).collect();
    YOnlyEstimate { beta_over_alpha: median(boa), beta_minus_gamma: median(bmg), samples: t.used.len() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    pub beta_over_alpha: f64,
    pub beta_minus_gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r0: f64,
    /// I1*/I* at the SIS equilibrium of the recovered rates; None when R0 <= 1.
    pub theta: Option<f64>,
    /// RMS difference of the two expressions for μ+γ over the samples used, per day.
    pub residual: f64,
    pub samples: usize,
    /// w = βS1 on every sample of the window.
    pub w_series: Vec<f64>,
}

/// Full recovery of (α, β, γ) from y and y1 by eliminating (μ+γ, w) pointwise.
pub fn identify_full(s: &ObservedSeries, mu: f64) -> Result<IdentificationResult> {
    let y1 = s
        .y1
        .as_ref()
        .ok_or_else(|| Error::InvalidSeries("y1 series is required for full identification".into()))?;
    let t = match y_terms(s) {
        Ok(t) => t,
        Err(Error::DegenerateTrajectory) => {
            return Err(Error::UnidentifiableWindow("y is stationary on the whole window".into()))
        }
        Err(e) => return Err(e),
    };
    let y_only = y_only_from_terms(&t, mu);
    let y = &s.y;
    let dy1 = first_derivative(y1, t.h)?;
    let ddy1 = second_derivative(y1, t.h)?;

    let d_of = |k: usize| t.dy[k] + y[k] * t.q[k] - mu * y[k];
    let det_of = |k: usize| y[k] * dy1[k] - y1[k] * d_of(k);
    let coef_of = |k: usize| det_of(k) - mu * y[k] * y[k];

    let det_max = t.used.iter().map(|&k| det_of(k).abs()).fold(0.0, f64::max);
    let mut cand: Vec<usize> = t.used.iter().copied().filter(|&k| det_of(k).abs() > SINGULAR_REL * det_max).collect();
    if det_max == 0.0 || cand.is_empty() {
        return Err(Error::UnidentifiableWindow("the (mu+gamma, w) determinant vanishes on every sample".into()));
    }
    let coef_max = cand.iter().map(|&k| coef_of(k).abs()).fold(0.0, f64::max);
    cand.retain(|&k| coef_of(k).abs() > SINGULAR_REL * coef_max);
    if coef_max == 0.0 || cand.is_empty() {
        return Err(Error::UnidentifiableWindow("the beta coefficient vanishes on every sample".into()));
    }
    cand.sort_by(|&a, &b| det_of(a).abs().total_cmp(&det_of(b).abs()).then(a.cmp(&b)));
    let drop = (DISCARD_FRACTION * cand.len() as f64).floor() as usize;
    let kept = &cand[drop..];

    let beta = median(
        kept.iter()
            .map(|&k| {
                let phi = dy1[k] * d_of(k) - y[k] * ddy1[k] + (t.l[k] - t.q[k]) * det_of(k);
                phi / coef_of(k)
            })
            .collect(),
    );
    let alpha = beta / y_only.beta_over_alpha;
    let gamma = beta - y_only.beta_minus_gamma;
    let sq: f64 = kept
        .iter()
        .map(|&k| {
            let m300 = (dy1[k] * d_of(k) - y[k] * (ddy1[k] - beta * mu * y[k])) / det_of(k);
            let m301 = beta - t.l[k] + t.q[k];
            (m300 - m301).powi(2)
        })
        .sum();
    let residual = (sq / kept.len() as f64).sqrt();

    let r0 = beta / (gamma + mu);
    let theta = if r0 > 1.0 && mu > 0.0 {
        let i = 1.0 - 1.0 / r0;
        Some(beta * mu / ((beta * i + mu) * (mu + gamma)))
    } else {
        None
    };
    let l1 = estimate_smooth_derivatives(y1, t.h)?.log_d1;
    let w_series = (0..y.len()).map(|k| y1[k] / y[k] * (l1[k] + mu + gamma)).collect();
    Ok(IdentificationResult {
        beta_over_alpha: y_only.beta_over_alpha,
        beta_minus_gamma: y_only.beta_minus_gamma,
        alpha,
        beta,
        gamma,
        r0,
        theta,
        residual,
        samples: kept.len(),
        w_series,
    })
}

/// SIS states implied by the outputs and the recovered rates.
pub fn reconstruct_states(s: &ObservedSeries, ident: &IdentificationResult, _mu: f64) -> Result<Vec<SisState>> {
    let y1 = s.y1.as_ref().ok_or_else(|| Error::InvalidSeries("y1 series is required".into()))?;
    if ident.w_series.len() != s.y.len() {
        return Err(Error::InvalidSeries("identification result does not belong to this series".into()));
    }
    if let Some(k) = s.y.iter().position(|&v| v <= 0.0) {
        return Err(Error::Domain(format!("y[{k}] = 0: states cannot be reconstructed")));
    }
    Ok((0..s.y.len())
        .map(|k| {
            let i = s.y[k] / ident.alpha;
            SisState::new(1.0 - i, i, ident.w_series[k] / ident.beta, y1[k] / ident.alpha)
        })
        .collect())
}
