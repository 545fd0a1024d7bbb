//! Residuals of a fitted autoregression and multistart maximum likelihood for
//! (φ, α, β, γ, δ) under stable innovations.

pub mod nelder_mead;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ar::{find_roots, ArModel};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::stable::{StableDensity, StableParams};

/// Region from which random starting polynomials are drawn: root moduli are
/// log-uniform on `[min_modulus, max_modulus]`, skipping `(1 − unit_gap, 1 + unit_gap)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartBox {
    pub min_modulus: f64,
    pub max_modulus: f64,
    pub unit_gap: f64,
}

impl Default for StartBox {
    fn default() -> Self {
        Self { min_modulus: 0.2, max_modulus: 5.0, unit_gap: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub n_starts: usize,
    pub n_refine: usize,
    pub simplex_tol: f64,
    pub max_iter: usize,
    #[serde(rename = "box")]
    pub start_box: StartBox,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { n_starts: 1200, n_refine: 8, simplex_tol: 1e-8, max_iter: 2000, start_box: StartBox::default() }
    }
}

impl FitConfig {
    /// 200 starts, 4 polished.
    pub fn desk() -> Self {
        Self { n_starts: 200, n_refine: 4, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.start_box;
        if self.n_starts == 0 || self.n_refine == 0 || self.n_refine > self.n_starts {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= n_refine <= n_starts, got n_refine={} n_starts={}",
                self.n_refine, self.n_starts
            )));
        }
        if !(self.simplex_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("simplex_tol and max_iter must be positive".into()));
        }
        if !(b.min_modulus > 0.0 && b.min_modulus < 1.0 - b.unit_gap && b.max_modulus > 1.0 + b.unit_gap && b.unit_gap >= 0.0)
        {
            return Err(Error::InvalidParameter("start box must straddle the unit circle".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ArModel,
    pub noise: StableParams,
    pub loglik: f64,
    pub converged: bool,
    pub n_evaluations: usize,
}

/// Ẑ_t = Y_t − φ₁Y_{t−1} − ⋯ − φ_pY_{t−p} for t = 1..n, where `series` holds
/// Y_{−p+1}, …, Y_n.
pub fn residuals(series: &[f64], model: &ArModel) -> Result<Vec<f64>> {
    residuals_raw(series, model.coeffs())
}

fn residuals_raw(series: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
    let p = phi.len();
    if series.len() < p + 1 {
        return Err(Error::SeriesTooShort { needed: p + 1, got: series.len() });
    }
    Ok((p..series.len())
        .map(|t| series[t] - phi.iter().enumerate().map(|(i, c)| c * series[t - 1 - i]).sum::<f64>())
        .collect())
}

/// n·ln|θ_{r+s}|, with |θ_{r+s}| = ∏ 1/|ρ| over the roots inside the unit circle.
fn jacobian_term(roots: &[Complex64], n: usize) -> f64 {
    -(n as f64) * roots.iter().filter(|z| z.norm() < 1.0).map(|z| z.norm().ln()).sum::<f64>()
}

/// Σ ln f(Ẑ_t) + n·ln|θ_{r+s}|.
///
/// The second term is the Jacobian of the map from (Y) to the innovations when
/// φ has s > 0 roots inside the unit circle; it vanishes for causal models.
/// The result is −∞ only when the noise law has bounded support (α < 1,
/// |β| = 1) and a residual falls outside it.
pub fn log_likelihood(series: &[f64], model: &ArModel, noise: &StableParams) -> Result<f64> {
    let roots = find_roots(model)?;
    let z = residuals(series, model)?;
    let density = StableDensity::new(*noise)?;
    let mut total = jacobian_term(&roots, z.len());
    for r in &z {
        total += density.logpdf(*r)?;
    }
    Ok(total)
}

fn fold(x: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    let y = (x - lo).rem_euclid(2.0 * w);
    lo + if y > w { 2.0 * w - y } else { y }
}

const ALPHA_RANGE: (f64, f64) = (0.5, 2.0);

/// Unconstrained vector [φ…, α, β, ln γ, δ] to a model and noise law.
fn decode(x: &[f64], p: usize) -> (Vec<f64>, StableParams) {
    let alpha = fold(x[p], ALPHA_RANGE.0, ALPHA_RANGE.1).max(f64::MIN_POSITIVE + ALPHA_RANGE.0);
    let beta = fold(x[p + 1], -1.0, 1.0);
    let noise = StableParams { alpha, beta, gamma: x[p + 2].exp(), delta: x[p + 3] };
    (x[..p].to_vec(), noise)
}

fn objective(series: &[f64], x: &[f64], p: usize) -> f64 {
    let (phi, noise) = decode(x, p);
    if phi.iter().any(|c| !c.is_finite()) || noise.validate().is_err() {
        return f64::INFINITY;
    }
    let Ok(model) = ArModel::new(phi) else {
        return f64::INFINITY;
    };
    match log_likelihood(series, &model, &noise) {
        Ok(v) if v.is_finite() => -v,
        _ => f64::INFINITY,
    }
}

/// Draws p roots log-uniform in modulus and expands them; complex roots are
/// drawn as conjugate pairs.
fn sample_polynomial<R: Rng + ?Sized>(p: usize, b: &StartBox, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = (b.min_modulus.ln(), b.max_modulus.ln());
    let modulus = |rng: &mut R| loop {
        let m = rng.random_range(lo..hi).exp();
        if (m - 1.0).abs() >= b.unit_gap {
            return m;
        }
    };
    let mut roots = Vec::with_capacity(p);
    while roots.len() < p {
        let m = modulus(rng);
        if p - roots.len() >= 2 && rng.random_bool(0.5) {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let z = Complex64::from_polar(m, angle);
            roots.push(z);
            roots.push(z.conj());
        } else {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            roots.push(Complex64::new(sign * m, 0.0));
        }
    }
    crate::ar::expand_unit_constant(&roots)[1..].iter().map(|c| -c).collect()
}

struct Start {
    phi: Vec<f64>,
    alpha: f64,
    beta: f64,
    log_gamma_jitter: f64,
    delta_jitter: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Unconstrained start vector: γ from half the residual IQR, δ from the
/// residual median, both jittered.
fn start_vector(series: &[f64], s: &Start) -> Option<Vec<f64>> {
    let mut z = residuals_raw(series, &s.phi).ok()?;
    z.sort_by(f64::total_cmp);
    let mut scale = 0.5 * (quantile(&z, 0.75) - quantile(&z, 0.25));
    if !(scale > 0.0 && scale.is_finite()) {
        scale = z.iter().map(|v| v.abs()).sum::<f64>() / z.len() as f64;
    }
    if !(scale > 0.0 && scale.is_finite()) {
        scale = 1.0;
    }
    let mut x = s.phi.clone();
    x.extend([s.alpha, s.beta, scale.ln() + s.log_gamma_jitter, median(&z) + s.delta_jitter * scale]);
    Some(x)
}

pub fn fit_mle(series: &[f64], order: usize, config: &FitConfig, seed: u64) -> Result<FitResult> {
    fit_mle_with(series, order, config, seed, Execution::Parallel)
}

/// [`fit_mle`] with explicit scheduling; the result does not depend on `exec`.
pub fn fit_mle_with(series: &[f64], order: usize, config: &FitConfig, seed: u64, exec: Execution) -> Result<FitResult> {
    config.validate()?;
    if order == 0 {
        return Err(Error::InvalidParameter("AR order must be at least 1".into()));
    }
    let needed = 10 * (order + 4);
    if series.len() < needed {
        return Err(Error::SeriesTooShort { needed, got: series.len() });
    }
    if let Some(&bad) = series.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Start> = (0..config.n_starts)
        .map(|_| {
            let phi = loop {
                let phi = sample_polynomial(order, &config.start_box, &mut rng);
                if ArModel::new(phi.clone()).is_ok() {
                    break phi;
                }
            };
            Start {
                phi,
                alpha: rng.random_range(ALPHA_RANGE.0..=ALPHA_RANGE.1),
                beta: rng.random_range(-1.0..=1.0),
                log_gamma_jitter: rng.random_range(-1.0..=1.0),
                delta_jitter: rng.random_range(-0.1..=0.1),
            }
        })
        .collect();

    let scored: Vec<Option<(Vec<f64>, f64)>> = map_indexed(exec, starts.len(), |i| {
        let x = start_vector(series, &starts[i])?;
        let v = objective(series, &x, order);
        v.is_finite().then_some((x, v))
    });
    let mut evaluations = scored.iter().filter(|s| s.is_some()).count();
    let mut ranked: Vec<(usize, Vec<f64>, f64)> =
        scored.into_iter().enumerate().filter_map(|(i, s)| s.map(|(x, v)| (i, x, v))).collect();
    if ranked.is_empty() {
        return Err(Error::NoValidStart);
    }
    ranked.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    ranked.truncate(config.n_refine);

    let polished = map_indexed(exec, ranked.len(), |i| {
        let x0 = &ranked[i].1;
        let scale = x0[order + 2].exp();
        let mut steps = vec![0.1; order];
        steps.extend([0.1, 0.2, 0.2, 0.1 * scale]);
        nelder_mead::minimize(|x| objective(series, x, order), x0, &steps, config.simplex_tol, config.max_iter)
    });
    evaluations += polished.iter().map(|m| m.evaluations).sum::<usize>();

    let best = polished
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .map(|(_, m)| m)
        .ok_or(Error::NoValidStart)?;
    let (phi, noise) = decode(&best.x, order);
    let model = ArModel::new(phi)?;
    Ok(FitResult { model, noise, loglik: -best.value, converged: best.converged, n_evaluations: evaluations })
}
