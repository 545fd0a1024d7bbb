//! The α-stable family in Nolan's S0 parameterization.
//!
//! A variable X ~ S(α, β, γ, δ; 0) is `γ·Z + δ` with Z standard S0, and Z is
//! related to the classical standard S1 variable by `Z = Z1 − β·tan(πα/2)`
//! when α ≠ 1 (the two coincide at α = 1). The shift makes the density
//! continuous in α, which is what the likelihood optimizer needs.
//!
//! Densities are computed from Nolan's single-integral representation. The
//! integrand `h·e^{−h}` is handled entirely in log space and normalized by
//! its maximum, so log-densities stay finite (and accurate) far into the
//! tails where the density itself underflows. Beyond `|x−δ|/γ > 25` the
//! Zolotarev tail series is used when it converges to full precision, with
//! quadrature as the fallback.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::special::{gamma_fn, ln_gamma};

/// Standardized distance from δ beyond which the tail series is tried.
pub const TAIL_CROSSOVER: f64 = 25.0;

const QUAD_TOL: Tolerance = Tolerance { abs: 1e-14, rel: 1e-10, max_intervals: 600 };
const SERIES_REL_TOL: f64 = 1e-13;
const SERIES_MAX_TERMS: usize = 60;
/// Levels of ln h used as quadrature breakpoints around the integrand peak.
const PEAK_LEVELS: [f64; 6] = [-24.0, -10.0, -3.0, 0.0, 1.6, 3.4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    /// Tail exponent in (0, 2].
    pub alpha: f64,
    /// Skewness in [−1, 1].
    pub beta: f64,
    /// Scale, > 0.
    pub gamma: f64,
    /// Location.
    pub delta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn standard(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { alpha, beta, gamma, delta } = *self;
        if ![alpha, beta, gamma, delta].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!("stable parameters must be finite: {self:?}")));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [-1, 1], got {beta}")));
        }
        if gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
        }
        Ok(())
    }

    /// Converts from the classical S1 convention (same α, β, γ; shifted δ).
    pub fn from_s1(alpha: f64, beta: f64, gamma: f64, delta1: f64) -> Result<Self> {
        let delta = if alpha == 1.0 {
            delta1 + beta * (2.0 / PI) * gamma * gamma.ln()
        } else {
            delta1 + beta * gamma * (FRAC_PI_2 * alpha).tan()
        };
        Self::new(alpha, beta, gamma, delta)
    }

    /// Location parameter of the same law written in the S1 convention.
    pub fn s1_delta(&self) -> f64 {
        if self.alpha == 1.0 {
            self.delta - self.beta * (2.0 / PI) * self.gamma * self.gamma.ln()
        } else {
            self.delta - self.beta * self.gamma * (FRAC_PI_2 * self.alpha).tan()
        }
    }
}

/// Density evaluator with the (α, β)-dependent constants precomputed.
///
/// Building one is cheap; reuse it when evaluating many points under the same
/// law (the likelihood does this once per parameter vector).
#[derive(Debug, Clone)]
pub struct StableDensity {
    params: StableParams,
    shape: Shape,
}

#[derive(Debug, Clone)]
enum Shape {
    Gaussian,
    Cauchy,
    /// α = 1, β ≠ 0. Stored for |β|; `sign` flips the argument when β < 0.
    AlphaOne { beta: f64, sign: f64 },
    General { pos: Kernel, neg: Kernel },
}

/// Standard S0 density pieces for one (α, β) with α ∉ {1, 2}.
#[derive(Debug, Clone)]
struct Kernel {
    alpha: f64,
    zeta: f64,
    theta0: f64,
    /// (1/(α−1))·ln cos(αθ0)
    log_v_const: f64,
    exponent: f64,
    log_prefactor: f64,
    /// sec(αθ0), the modulus factor of the series terms
    sec_a: f64,
    /// πα/2 + αθ0
    series_phase: f64,
}

impl Kernel {
    fn new(alpha: f64, beta: f64) -> Self {
        let t = (FRAC_PI_2 * alpha).tan();
        let a = (beta * t).atan();
        let theta0 = a / alpha;
        Self {
            alpha,
            zeta: -beta * t,
            theta0,
            log_v_const: a.cos().ln() / (alpha - 1.0),
            exponent: alpha / (alpha - 1.0),
            log_prefactor: (alpha / (PI * (alpha - 1.0).abs())).ln(),
            sec_a: 1.0 / a.cos(),
            series_phase: FRAC_PI_2 * alpha + a,
        }
    }

    fn log_v(&self, theta: f64) -> f64 {
        let a = self.alpha;
        let c = theta.cos();
        self.log_v_const + self.exponent * (c.ln() - (a * (self.theta0 + theta)).sin().ln())
            + (a * self.theta0 + (a - 1.0) * theta).cos().ln()
            - c.ln()
    }

    /// log f(x1) for the S1-coordinate offset x1 = z − ζ ≥ 0.
    fn log_density(&self, x1: f64) -> Result<f64> {
        if x1 <= 1e-10 * (1.0 + self.zeta.abs()) {
            return Ok(self.log_density_at_mode_shift());
        }
        let log_c = self.exponent * x1.ln();
        let log_i = log_peak_integral(|th| log_c + self.log_v(th), -self.theta0, FRAC_PI_2)?;
        Ok(self.log_prefactor - x1.ln() + log_i)
    }

    fn log_density_at_mode_shift(&self) -> f64 {
        let a = self.alpha;
        ln_gamma(1.0 + 1.0 / a) + self.theta0.cos().ln() - PI.ln() - (1.0 + self.zeta * self.zeta).ln() / (2.0 * a)
    }

    /// Tail series in S1 coordinates (x1 > 0). Returns `None` unless the
    /// terms shrink below the relative tolerance without growing first.
    fn log_tail_series(&self, x1: f64) -> Option<f64> {
        if x1 <= 0.0 {
            return None;
        }
        let a = self.alpha;
        let log_x = x1.ln();
        let log_sec = self.sec_a.ln();
        let mut sum = 0.0;
        let mut leading = 0.0;
        let mut prev_bound = f64::INFINITY;
        for k in 1..=SERIES_MAX_TERMS {
            let kf = k as f64;
            let log_bound = ln_gamma(kf * a + 1.0) - ln_gamma(kf + 1.0) + kf * log_sec - (kf - 1.0) * a * log_x;
            let bound = log_bound.exp();
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * bound * (kf * self.series_phase).sin();
            if k == 1 {
                leading = bound;
            }
            if k > 1 && bound <= SERIES_REL_TOL * sum.abs() {
                return (sum > 1e-3 * leading).then(|| (sum / PI).ln() - (a + 1.0) * log_x);
            }
            if k > 2 && bound > prev_bound {
                return None;
            }
            prev_bound = bound;
        }
        None
    }
}

/// log ∫ h e^{−h} dθ over (lo, hi) where `log_h` is monotone in θ.
///
/// The integrand is rescaled by its maximum (attained where h = 1, or at an
/// endpoint when h never crosses 1) before integrating.
fn log_peak_integral<F: Fn(f64) -> f64>(log_h: F, lo: f64, hi: f64) -> Result<f64> {
    let g = |th: f64| {
        let lh = log_h(th);
        lh - lh.exp()
    };
    let eps = 1e-12 * (hi - lo);
    let l_lo = log_h(lo + eps);
    let l_hi = log_h(hi - eps);
    if l_lo.is_nan() || l_hi.is_nan() {
        return Err(Error::Quadrature { estimate: f64::NAN });
    }
    // θ where log h crosses `level`, if it does inside the interval
    let crossing = |level: f64| -> Option<f64> {
        if (l_lo < level) == (l_hi < level) {
            return None;
        }
        Some(solve_monotone(|th| log_h(th) - level, lo + eps, l_lo - level, hi - eps, l_hi - level))
    };
    // The peak of h·e^{−h} sits at h = 1. Breakpoints at fixed levels of
    // ln h bracket the bulk and both tails so no part of a narrow peak can
    // fall between Kronrod nodes.
    let breaks: Vec<f64> = PEAK_LEVELS.iter().filter_map(|&lv| crossing(lv)).collect();
    let peak_log = if (l_lo < 0.0) != (l_hi < 0.0) { -1.0 } else { g(lo + eps).max(g(hi - eps)) };
    if peak_log == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let integrand = |th: f64| {
        let v = (g(th) - peak_log).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let integral = quadrature::integrate(integrand, lo, hi, &breaks, QUAD_TOL)?;
    Ok(peak_log + integral.ln())
}

/// Root of a monotone function on [a, b] given opposite-signed end values.
/// Illinois steps with bisection whenever an end value is non-finite; stops
/// once |f| < 0.02, which is plenty for placing quadrature breakpoints.
fn solve_monotone<F: Fn(f64) -> f64>(f: F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> f64 {
    let width = b - a;
    let mut side = 0i8;
    for _ in 0..200 {
        let mid = if fa.is_finite() && fb.is_finite() && fa != fb {
            let x = (a * fb - b * fa) / (fb - fa);
            if x > a && x < b {
                x
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fm = f(mid);
        if fm.abs() < 0.02 || b - a < 1e-15 * width || fm.is_nan() {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = mid;
            fb = fm;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

impl StableDensity {
    pub fn new(params: StableParams) -> Result<Self> {
        params.validate()?;
        let StableParams { alpha, beta, .. } = params;
        let shape = if alpha == 2.0 {
            Shape::Gaussian
        } else if alpha == 1.0 && beta == 0.0 {
            Shape::Cauchy
        } else if alpha == 1.0 {
            Shape::AlphaOne { beta: beta.abs(), sign: beta.signum() }
        } else {
            Shape::General { pos: Kernel::new(alpha, beta), neg: Kernel::new(alpha, -beta) }
        };
        Ok(Self { params, shape })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.logpdf(x)?.exp())
    }

    pub fn logpdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let z = (x - self.params.delta) / self.params.gamma;
        Ok(self.log_standard(z)? - self.params.gamma.ln())
    }

    fn log_standard(&self, z: f64) -> Result<f64> {
        match &self.shape {
            Shape::Gaussian => Ok(-0.25 * z * z - (2.0 * PI.sqrt()).ln()),
            Shape::Cauchy => Ok(-PI.ln() - (z * z).ln_1p()),
            Shape::AlphaOne { beta, sign } => {
                let x = z * sign;
                let b = *beta;
                let log_c = -PI * x / (2.0 * b);
                let log_v = |th: f64| {
                    let u = FRAC_PI_2 + b * th;
                    (2.0 / PI).ln() + u.ln() - th.cos().ln() + u * th.tan() / b
                };
                let log_i = log_peak_integral(|th| log_c + log_v(th), -FRAC_PI_2, FRAC_PI_2)?;
                Ok(log_i - (2.0 * b).ln())
            }
            Shape::General { pos, neg } => {
                let x1 = z - pos.zeta;
                if z.abs() > TAIL_CROSSOVER {
                    let series = if x1 > 0.0 { pos.log_tail_series(x1) } else { neg.log_tail_series(-x1) };
                    if let Some(v) = series {
                        return Ok(v);
                    }
                }
                if x1 >= 0.0 {
                    pos.log_density(x1)
                } else {
                    neg.log_density(-x1)
                }
            }
        }
    }
}

/// Density at `x`.
pub fn stable_pdf(x: f64, params: &StableParams) -> Result<f64> {
    StableDensity::new(*params)?.pdf(x)
}

/// Log-density at `x`.
pub fn stable_logpdf(x: f64, params: &StableParams) -> Result<f64> {
    StableDensity::new(*params)?.logpdf(x)
}

/// Density at the S0 mode-shift point δ − γζ, in closed form. Exposed for
/// tests of the α ≠ 1 branch.
pub fn density_at_zeta(params: &StableParams) -> Option<f64> {
    let StableParams { alpha, beta, gamma, .. } = *params;
    if alpha == 1.0 || alpha == 2.0 {
        return None;
    }
    let k = Kernel::new(alpha, beta);
    Some(
        gamma_fn(1.0 + 1.0 / alpha) * k.theta0.cos()
            / (PI * (1.0 + k.zeta * k.zeta).powf(1.0 / (2.0 * alpha)))
            / gamma,
    )
}

/// One standard S0 draw by the Chambers–Mallows–Stuck transformation.
fn draw_standard<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let v = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break PI * (u - 0.5);
        }
    };
    let w = loop {
        let u: f64 = rng.random();
        let w = -(1.0 - u).ln();
        if w > 0.0 {
            break w;
        }
    };
    if alpha == 1.0 {
        let u = FRAC_PI_2 + beta * v;
        (2.0 / PI) * (u * v.tan() - beta * ((FRAC_PI_2 * w * v.cos()) / u).ln())
    } else {
        let t = beta * (FRAC_PI_2 * alpha).tan();
        let b = t.atan() / alpha;
        let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
        let z1 = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
            * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
        z1 - t
    }
}

/// `n` i.i.d. draws, advancing `rng`.
pub fn stable_sample<R: Rng + ?Sized>(params: &StableParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    let StableParams { alpha, beta, gamma, delta } = *params;
    Ok((0..n).map(|_| gamma * draw_standard(alpha, beta, rng) + delta).collect())
}
