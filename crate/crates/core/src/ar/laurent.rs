//! Two-sided expansion 1/φ(z) = Σ_j ψ_j z^j on an annulus containing |z| = 1.

use crate::error::{Error, Result};

use super::{factorize, ArModel};

pub const DEFAULT_LAURENT_TOL: f64 = 1e-12;

/// Hard cap on the truncation index and on each one-sided series.
pub const MAX_LAURENT_TERMS: usize = 1_000_000;

/// ψ_0..ψ_K in `psi_plus`, ψ̄_1..ψ̄_K (ψ̄_j = ψ_{−j}) in `psi_minus`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentCoeffs {
    pub psi_plus: Vec<f64>,
    pub psi_minus: Vec<f64>,
}

impl LaurentCoeffs {
    pub fn truncation(&self) -> usize {
        self.psi_minus.len()
    }

    /// ψ_j for any integer j, zero beyond the truncation.
    pub fn get(&self, j: isize) -> f64 {
        if j >= 0 {
            self.psi_plus.get(j as usize).copied().unwrap_or(0.0)
        } else {
            self.psi_minus.get((-j - 1) as usize).copied().unwrap_or(0.0)
        }
    }
}

/// Number of series terms needed for the geometric bound `decay^L` to drop
/// well below `tol`, padded for repeated roots.
fn series_length(decay: f64, degree: usize, tol: f64) -> Result<usize> {
    if degree == 0 {
        return Ok(1);
    }
    let base = ((tol * 1e-4).ln() / decay.ln()).ceil();
    if !base.is_finite() || base > MAX_LAURENT_TERMS as f64 {
        return Err(Error::NonConvergent { cap: MAX_LAURENT_TERMS });
    }
    Ok(2 * base as usize + 20 * degree + 20)
}

/// Power series of 1/(1 − Σ θ_i z^i), first `len` terms.
fn inverse_series(theta: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    out[0] = 1.0;
    for k in 1..len {
        out[k] = theta.iter().take(k).enumerate().map(|(i, t)| t * out[k - 1 - i]).sum();
    }
    out
}

pub fn laurent_coeffs(model: &ArModel, tol: f64) -> Result<LaurentCoeffs> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("Laurent tolerance must lie in (0, 1), got {tol}")));
    }
    let roots = super::find_roots(model)?;
    let fac = factorize(model)?;
    let (r, s) = (fac.r(), fac.s());

    // Slowest decay rate on each side of the annulus.
    let decay_a = roots.iter().filter(|z| z.norm() > 1.0).map(|z| 1.0 / z.norm()).fold(0.0, f64::max);
    let decay_b = roots.iter().filter(|z| z.norm() < 1.0).map(|z| z.norm()).fold(0.0, f64::max);
    let len_a = series_length(decay_a, r, tol)?;
    let len_b = series_length(decay_b, s, tol)?;

    let u = inverse_series(&fac.causal, len_a);

    // b(z) = z^s·b̃(1/z) with b̃(w) = w^s − θ_{r+1}w^{s−1} − ⋯ − θ_{r+s}, so
    // 1/b(z) = z^{−s}/b̃(0) · Σ v_j z^{−j}, where v inverts b̃(w)/b̃(0).
    let (v, scale) = if s == 0 {
        (vec![1.0], 1.0)
    } else {
        let b0 = -fac.noncausal[s - 1];
        // b̃(w)/b̃(0) = 1 − Σ c_i w^i; c_i = −(coefficient of z^{s−i} in b)/b̃(0)
        let c: Vec<f64> = (1..=s)
            .map(|i| {
                let coef = if i == s { 1.0 } else { -fac.noncausal[s - i - 1] };
                -coef / b0
            })
            .collect();
        (inverse_series(&c, len_b), 1.0 / b0)
    };

    // exponent of u_i·v_j is i − j − s
    let neg_len = len_b + s;
    let mut plus = vec![0.0; len_a];
    let mut minus = vec![0.0; neg_len];
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            let e = i as isize - j as isize - s as isize;
            let term = ui * vj * scale;
            if e >= 0 {
                plus[e as usize] += term;
            } else {
                minus[(-e - 1) as usize] += term;
            }
        }
    }

    let span = plus.len().max(minus.len() + 1);
    let mag = |j: usize| plus.get(j).map_or(0.0, |x| x.abs()) + minus.get(j.wrapping_sub(1)).map_or(0.0, |x| x.abs());
    let last_big = (1..span).rev().find(|&j| mag(j) >= tol).unwrap_or(0);
    let k = last_big + 1;
    if k > MAX_LAURENT_TERMS {
        return Err(Error::NonConvergent { cap: MAX_LAURENT_TERMS });
    }
    plus.resize(k + 1, 0.0);
    minus.resize(k, 0.0);
    Ok(LaurentCoeffs { psi_plus: plus, psi_minus: minus })
}
