//! Stationary solution Y_t = Σ_{j=−K}^{K} ψ_j Z_{t−j} by finite convolution.

use rand::Rng;

use crate::error::{Error, Result};
use crate::stable::{stable_sample, StableParams};

use super::{laurent_coeffs, ArModel, LaurentCoeffs, DEFAULT_LAURENT_TOL};

/// Observations Y_{−p+1}, …, Y_n together with the innovations Z_t at the
/// same time indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub values: Vec<f64>,
    pub innovations: Vec<f64>,
}

pub fn simulate<R: Rng + ?Sized>(
    model: &ArModel,
    noise: &StableParams,
    n: usize,
    burn: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    simulate_with_innovations(model, noise, n, burn, rng).map(|p| p.values)
}

pub fn simulate_with_innovations<R: Rng + ?Sized>(
    model: &ArModel,
    noise: &StableParams,
    n: usize,
    burn: usize,
    rng: &mut R,
) -> Result<SimulatedPath> {
    let psi = laurent_coeffs(model, DEFAULT_LAURENT_TOL)?;
    simulate_from_laurent(&psi, model.order(), noise, n, burn, rng)
}

/// Same as [`simulate_with_innovations`] with precomputed coefficients, so
/// repeated draws from one model skip the expansion.
pub fn simulate_from_laurent<R: Rng + ?Sized>(
    psi: &LaurentCoeffs,
    order: usize,
    noise: &StableParams,
    n: usize,
    burn: usize,
    rng: &mut R,
) -> Result<SimulatedPath> {
    let k = psi.truncation();
    if burn < k {
        return Err(Error::BurnTooShort { burn, truncation: k });
    }
    if n < order + 1 {
        return Err(Error::SeriesTooShort { needed: order + 1, got: n });
    }
    let len = n + order;
    let z = stable_sample(noise, len + 2 * burn, rng)?;

    // weights[i] multiplies Z_{t+K−i}, i.e. ψ_{i−K}
    let weights: Vec<f64> = (0..=2 * k).map(|i| psi.get(i as isize - k as isize)).collect();
    let values = (burn..burn + len)
        .map(|t| weights.iter().enumerate().map(|(i, w)| w * z[t + k - i]).sum())
        .collect();
    let innovations = z[burn..burn + len].to_vec();
    Ok(SimulatedPath { values, innovations })
}
