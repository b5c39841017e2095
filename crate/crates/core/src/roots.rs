//! Bracketed scalar root finding.

use crate::error::{Error, Result};

pub const ROOT_TOL: f64 = 1e-14;
pub const ROOT_MAX_ITER: usize = 200;

/// Root of `f` on `[lo, hi]` given a sign change, by secant steps safeguarded with
/// bisection. Stops when the bracket is narrower than `tol` or `f` vanishes.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed { lo, hi, f_lo: fa, f_hi: fb });
    }
    let mut bisect_next = false;
    for _ in 0..max_iter {
        let width = b - a;
        if width <= tol {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
        let secant = b - fb * (b - a) / (fb - fa);
        // Alternate secant with bisection whenever the secant point is outside the middle
        // of the bracket or the last secant step failed to halve it.
        let m = if !bisect_next && secant > a + 0.01 * width && secant < b - 0.01 * width {
            secant
        } else {
            a + 0.5 * width
        };
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if !fm.is_finite() {
            return Err(Error::Domain(format!("function is not finite at {m}")));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        bisect_next = !bisect_next && (b - a) > 0.5 * width;
    }
    if b - a <= tol {
        Ok(0.5 * (a + b))
    } else {
        Err(Error::NotConverged { what: "bracketed root finder", iterations: max_iter })
    }
}

/// Number of sign changes of `f` over `samples` equal subintervals of `[lo, hi]`.
pub fn count_sign_changes<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize) -> usize {
    let mut prev = f(lo).signum();
    let mut count = 0;
    for k in 1..=samples {
        let v = f(lo + (hi - lo) * k as f64 / samples as f64).signum();
        if v != prev {
            count += 1;
            prev = v;
        }
    }
    count
}
