//! Autoregressive polynomials φ(z) = 1 − φ₁z − ⋯ − φ_p z^p without unit-circle
//! roots: root finding, causal / non-causal factorization, the two-sided
//! Laurent expansion of 1/φ(z), and simulation of the stationary solution.

mod laurent;
mod roots;
mod simulate;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use laurent::{laurent_coeffs, LaurentCoeffs, DEFAULT_LAURENT_TOL, MAX_LAURENT_TERMS};
pub use roots::{expand_unit_constant, polynomial_roots};
pub use simulate::{simulate, simulate_from_laurent, simulate_with_innovations, SimulatedPath};

/// Minimum distance of every root modulus from 1.
pub const UNIT_CIRCLE_MARGIN: f64 = 1e-6;

/// AR coefficients (φ₁, …, φ_p). An empty vector is the white-noise model,
/// whose filter is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArModel")]
pub struct ArModel {
    coeffs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawArModel {
    coeffs: Vec<f64>,
}

impl TryFrom<RawArModel> for ArModel {
    type Error = Error;

    fn try_from(raw: RawArModel) -> Result<Self> {
        ArModel::new(raw.coeffs)
    }
}

impl ArModel {
    /// Validates finiteness and the unit-circle margin.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        let model = Self { coeffs };
        find_roots(&model)?;
        Ok(model)
    }

    pub fn white_noise() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// Builds the model whose polynomial is ∏ (1 − z/ρ). Complex roots must
    /// come in conjugate pairs.
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        let poly = expand_unit_constant(roots);
        Self::new(poly[1..].iter().map(|c| -c).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Ascending coefficients of φ(z): `[1, −φ₁, …, −φ_p]`.
    pub fn polynomial(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.coeffs.iter().map(|c| -c)).collect()
    }
}

/// Roots of φ(z). Fails with [`Error::UnitCircleRoot`] when any root modulus
/// is within [`UNIT_CIRCLE_MARGIN`] of 1.
pub fn find_roots(model: &ArModel) -> Result<Vec<Complex64>> {
    let roots = polynomial_roots(&model.polynomial())?;
    if let Some(z) = roots.iter().find(|z| (z.norm() - 1.0).abs() <= UNIT_CIRCLE_MARGIN) {
        return Err(Error::UnitCircleRoot { modulus: z.norm(), margin: UNIT_CIRCLE_MARGIN });
    }
    Ok(roots)
}

/// φ(z) = (1 − θ₁z − ⋯ − θ_r z^r)(1 − θ_{r+1}z − ⋯ − θ_{r+s}z^s), the first
/// factor with all roots outside the unit circle, the second inside.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub causal: Vec<f64>,
    pub noncausal: Vec<f64>,
}

impl Factorization {
    pub fn r(&self) -> usize {
        self.causal.len()
    }

    pub fn s(&self) -> usize {
        self.noncausal.len()
    }

    /// Multiplies the factors back out into (φ₁, …, φ_p).
    pub fn expand(&self) -> Vec<f64> {
        let a: Vec<f64> = std::iter::once(1.0).chain(self.causal.iter().map(|c| -c)).collect();
        let b: Vec<f64> = std::iter::once(1.0).chain(self.noncausal.iter().map(|c| -c)).collect();
        let mut prod = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        prod[1..].iter().map(|c| -c).collect()
    }

    /// |θ_{r+s}|, the leading coefficient of the non-causal factor (1 when s = 0).
    pub fn noncausal_leading(&self) -> f64 {
        self.noncausal.last().map_or(1.0, |c| c.abs())
    }
}

pub fn factorize(model: &ArModel) -> Result<Factorization> {
    let roots = find_roots(model)?;
    let (outside, inside): (Vec<Complex64>, Vec<Complex64>) = roots.into_iter().partition(|z| z.norm() > 1.0);
    let to_theta = |rs: &[Complex64]| -> Vec<f64> { expand_unit_constant(rs)[1..].iter().map(|c| -c).collect() };
    Ok(Factorization { causal: to_theta(&outside), noncausal: to_theta(&inside) })
}
