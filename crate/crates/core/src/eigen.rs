//! Eigenvalues of small dense matrices through the characteristic polynomial.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix4 = [[f64; 4]; 4];

pub const EIG_TOL: f64 = 1e-12;
const MAX_ITER: usize = 500;

/// Coefficients `c[0..=n]` of det(λI − A) = λⁿ + c[1]λⁿ⁻¹ + … + c[n], with c[0] = 1
/// (Faddeev-LeVerrier).
pub fn char_poly<const N: usize>(a: &[[f64; N]; N]) -> [f64; 5] {
    assert!(N <= 4, "char_poly supports up to 4x4");
    let mut c = [0.0; 5];
    c[0] = 1.0;
    let mut m = [[0.0; N]; N];
    for k in 1..=N {
        // M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k) / k
        let mut next = [[0.0; N]; N];
        for i in 0..N {
            for j in 0..N {
                next[i][j] = (0..N).map(|l| a[i][l] * m[l][j]).sum::<f64>();
            }
            next[i][i] += c[k - 1];
        }
        m = next;
        let tr: f64 = (0..N).map(|i| (0..N).map(|l| a[i][l] * m[l][i]).sum::<f64>()).sum();
        c[k] = -tr / k as f64;
    }
    c
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(c[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in &c[1..] {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// All roots of the monic polynomial `c[0] zⁿ + … + c[n]` by Aberth-Ehrlich iteration
/// with a final Newton polish.
pub fn poly_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    if c[0] == 0.0 || !c.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("polynomial must have finite coefficients and nonzero leading term".into()));
    }
    let c: Vec<f64> = c.iter().map(|v| v / c[0]).collect();
    // Cauchy bound for the initial circle.
    let radius = 1.0 + c[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    let scale = |x: Complex64| c.iter().fold(0.0, |acc, ck| acc * x.norm() + ck.abs());
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(&c, z[i]);
            if p.norm() <= f64::EPSILON * scale(z[i]) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step < EIG_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { what: "Aberth polynomial root finder", iterations: MAX_ITER });
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&c, *zi);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let next = *zi - p / dp;
            if horner(&c, next).0.norm() < p.norm() {
                *zi = next;
            } else {
                break;
            }
        }
    }
    Ok(z)
}

/// Pairs up conjugate roots of a real polynomial and orders by real part, then by
/// decreasing imaginary part.
fn tidy(mut z: Vec<Complex64>) -> Vec<Complex64> {
    let n = z.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let mag = z[i].norm().max(1.0);
        if z[i].im.abs() <= 1e-9 * mag {
            z[i].im = 0.0;
            used[i] = true;
            continue;
        }
        let partner = (i + 1..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (z[a] - z[i].conj()).norm().total_cmp(&(z[b] - z[i].conj()).norm()));
        let partner = partner.filter(|&j| (z[j] - z[i].conj()).norm() < 0.5 * z[i].im.abs());
        if let Some(j) = partner {
            let re = 0.5 * (z[i].re + z[j].re);
            let im = 0.5 * (z[i].im.abs() + z[j].im.abs());
            z[i] = Complex64::new(re, im);
            z[j] = Complex64::new(re, -im);
            used[j] = true;
        } else {
            // A lone root of a real polynomial is real up to rounding.
            z[i].im = 0.0;
        }
        used[i] = true;
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));
    z
}

/// Eigenvalues of a 4×4 matrix; conjugate pairs are adjacent (positive imaginary part first).
pub fn eigenvalues_4x4(m: &Matrix4) -> Result<[Complex64; 4]> {
    if !m.iter().flatten().all(|v| v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let c = char_poly(m);
    let roots = tidy(poly_roots(&c)?);
    Ok([roots[0], roots[1], roots[2], roots[3]])
}

/// |det(m − λI)|, for checking eigenvalues.
pub fn char_residual(m: &Matrix4, lambda: Complex64) -> f64 {
    let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = Complex64::new(m[i][j], 0.0);
        }
        a[i][i] -= lambda;
    }
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..4 {
        let p = (k..4).max_by(|&x, &y| a[x][k].norm().total_cmp(&a[y][k].norm())).unwrap();
        if a[p][k].norm() == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..4 {
            let f = a[i][k] / a[k][k];
            for j in k..4 {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
    }
    det.norm()
}

pub fn is_hurwitz(eigs: &[Complex64]) -> bool {
    eigs.iter().all(|z| z.re < 0.0)
}
