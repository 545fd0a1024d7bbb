//! Polynomial roots: companion-matrix eigenvalues polished by Aberth–Ehrlich.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ABERTH_ITER: usize = 100;

/// Evaluates p(z) and p'(z) for coefficients in ascending powers.
pub(crate) fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of `Σ coeffs[k]·z^k`, trailing zero coefficients ignored.
///
/// Conjugate pairs are symmetrized on return so that expanding the roots
/// back into a polynomial yields real coefficients.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let degree = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(d) => d,
        None => return Err(Error::InvalidParameter("zero polynomial has no finite roots".into())),
    };
    if degree == 0 {
        return Ok(Vec::new());
    }
    let coeffs = &coeffs[..=degree];
    let lead = coeffs[degree];
    if degree == 1 {
        return Ok(vec![Complex64::new(-coeffs[0] / lead, 0.0)]);
    }

    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
    }
    let mut roots: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
    for r in roots.iter_mut() {
        if !r.re.is_finite() || !r.im.is_finite() {
            *r = Complex64::new(1.0, 0.5);
        }
    }

    aberth(coeffs, &mut roots)?;
    Ok(pair_conjugates(roots))
}

fn aberth(coeffs: &[f64], roots: &mut [Complex64]) -> Result<()> {
    let n = roots.len();
    for _ in 0..MAX_ABERTH_ITER {
        let mut max_step = 0.0f64;
        for k in 0..n {
            let z = roots[k];
            let (p, dp) = eval_with_derivative(coeffs, z);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z - roots[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        1.0 / d
                    }
                })
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                roots[k] = z - step;
                max_step = max_step.max(step.norm() / z.norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            return Ok(());
        }
    }
    // Slow final convergence is tolerated when the residual is already tiny.
    let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
    if roots.iter().all(|&z| eval_with_derivative(coeffs, z).0.norm() < 1e-9 * scale * z.norm().max(1.0).powi(coeffs.len() as i32 - 1)) {
        Ok(())
    } else {
        Err(Error::RootFinder { iterations: MAX_ABERTH_ITER })
    }
}

fn pair_conjugates(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let n = roots.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let z = roots[i];
        if z.im.abs() <= 1e-10 * z.norm().max(1e-300) {
            roots[i] = Complex64::new(z.re, 0.0);
            used[i] = true;
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| (roots[a] - z.conj()).norm().total_cmp(&(roots[b] - z.conj()).norm()));
        used[i] = true;
        if let Some(j) = partner {
            let w = 0.5 * (z + roots[j].conj());
            roots[i] = w;
            roots[j] = w.conj();
            used[j] = true;
        }
    }
    roots
}

/// Expands ∏ (1 − z/ρ) over `roots` into real ascending coefficients
/// (constant term 1).
pub fn expand_unit_constant(roots: &[Complex64]) -> Vec<f64> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let inv = 1.0 / r;
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, &c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * inv;
        }
        poly = next;
    }
    poly.into_iter().map(|c| c.re).collect()
}
