//! Finite-difference derivatives of uniformly sampled series.
//!
//! First derivatives use the fourth-order central stencil, second derivatives the
//! second-order one; the two points at each end fall back to one-sided stencils.

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 7;

/// Relative tolerance on the spacing of a uniform grid.
const GRID_TOL: f64 = 1e-9;

/// Step of a uniform, strictly increasing grid.
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidSeries("need at least two time samples".into()));
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidSeries("times must be strictly increasing".into()));
    }
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > GRID_TOL * h.max(w[1].abs()) {
            return Err(Error::InvalidSeries(format!("time grid is not uniform at sample {}", k + 1)));
        }
    }
    Ok(h)
}

pub fn first_derivative(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = check_len(f)?;
    let mut d = vec![0.0; n];
    let c = 12.0 * h;
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / c;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / c;
    for k in 2..n - 2 {
        d[k] = (-f[k + 2] + 8.0 * f[k + 1] - 8.0 * f[k - 1] + f[k - 2]) / c;
    }
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / c;
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / c;
    Ok(d)
}

pub fn second_derivative(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = check_len(f)?;
    let h2 = h * h;
    let mut d = vec![0.0; n];
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    for k in 1..n - 1 {
        d[k] = (f[k + 1] - 2.0 * f[k] + f[k - 1]) / h2;
    }
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    Ok(d)
}

fn check_len(f: &[f64]) -> Result<usize> {
    if f.len() < MIN_SAMPLES {
        return Err(Error::InvalidSeries(format!("need at least {MIN_SAMPLES} samples, got {}", f.len())));
    }
    if !f.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidSeries("series contains non-finite values".into()));
    }
    Ok(f.len())
}

/// Derivatives of a positive series and of its logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothDerivatives {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// d/dt ln s
    pub log_d1: Vec<f64>,
    /// d²/dt² ln s
    pub log_d2: Vec<f64>,
}

pub fn estimate_smooth_derivatives(s: &[f64], h: f64) -> Result<SmoothDerivatives> {
    check_len(s)?;
    if let Some(k) = s.iter().position(|&v| v <= 0.0) {
        return Err(Error::Domain(format!("series must be > 0 to take logs; sample {k} is {}", s[k])));
    }
    let ln: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    Ok(SmoothDerivatives {
        d1: first_derivative(s, h)?,
        d2: second_derivative(s, h)?,
        log_d1: first_derivative(&ln, h)?,
        log_d2: second_derivative(&ln, h)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * h).collect()
    }

    #[test]
    fn exponential_log_slope() {
        let t = grid(101, 0.01);
        let s: Vec<f64> = t.iter().map(|t| (2.0 * t).exp()).collect();
        let d = estimate_smooth_derivatives(&s, 0.01).unwrap();
        for k in 2..99 {
            assert!((d.log_d1[k] - 2.0).abs() < 1e-8);
            assert!(d.log_d2[k].abs() < 1e-6);
            assert!((d.d1[k] / s[k] - 2.0).abs() < 1e-7);
        }
    }

    #[test]
    fn quadratic_second_derivative() {
        let h = 0.05;
        let t = grid(40, h);
        let s: Vec<f64> = t.iter().map(|t| t * t + 1.0).collect();
        let d2 = second_derivative(&s, h).unwrap();
        assert!(d2.iter().all(|v| (v - 2.0).abs() < 1e-6));
        let d1 = first_derivative(&s, h).unwrap();
        for (k, t) in t.iter().enumerate() {
            assert!((d1[k] - 2.0 * t).abs() < 1e-9);
        }
    }

    #[test]
    fn quartic_is_exact_for_first_derivative() {
        let h = 0.1;
        let t = grid(12, h);
        let s: Vec<f64> = t.iter().map(|t| t.powi(4) - 3.0 * t.powi(3) + t).collect();
        let d1 = first_derivative(&s, h).unwrap();
        for (k, t) in t.iter().enumerate() {
            let exact = 4.0 * t.powi(3) - 9.0 * t * t + 1.0;
            assert!((d1[k] - exact).abs() < 1e-10, "{k}: {} vs {exact}", d1[k]);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |h: f64| {
            let s: Vec<f64> = (0..9).map(|k| (1.0 + (k as f64 - 4.0) * h).sin()).collect();
            (first_derivative(&s, h).unwrap()[4] - 1f64.cos()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 2.0, "{ratio}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(first_derivative(&[1.0; 6], 0.1).is_err());
        assert!(matches!(estimate_smooth_derivatives(&[1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0], 0.1), Err(Error::Domain(_))));
        assert!(uniform_step(&[0.0, 0.1, 0.25]).is_err());
        assert!(uniform_step(&[0.0, 0.0]).is_err());
        assert!((uniform_step(&grid(11, 0.1)).unwrap() - 0.1).abs() < 1e-15);
    }
}
