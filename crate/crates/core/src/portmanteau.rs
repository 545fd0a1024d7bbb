//! Portmanteau statistics on trimmed, partial and rank autocorrelations, with
//! their asymptotic reference laws.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    pacf_from_acf, rank_correlations, trim, trimmed_acf, CorrelationKind, CorrelationVector, TrimSpec,
};
use crate::error::{Error, Result};
use crate::special::{chi_square_sf, gamma_cdf, gamma_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Statistic {
    #[serde(rename = "Q_lb")]
    LjungBox,
    #[serde(rename = "Q_mt")]
    Monti,
    #[serde(rename = "Q_gv")]
    GeneralizedVariance,
    #[serde(rename = "Q_wb")]
    WeightedBoxPierce,
    #[serde(rename = "Q_wl")]
    WeightedLjungBox,
    #[serde(rename = "Q_wm")]
    WeightedMonti,
    #[serde(rename = "Q_rk")]
    Rank,
    #[serde(rename = "Q_rks")]
    RankSquared,
}

impl Statistic {
    pub const ALL: [Statistic; 8] = [
        Statistic::LjungBox,
        Statistic::Monti,
        Statistic::GeneralizedVariance,
        Statistic::WeightedBoxPierce,
        Statistic::WeightedLjungBox,
        Statistic::WeightedMonti,
        Statistic::Rank,
        Statistic::RankSquared,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::LjungBox => "Q_lb",
            Statistic::Monti => "Q_mt",
            Statistic::GeneralizedVariance => "Q_gv",
            Statistic::WeightedBoxPierce => "Q_wb",
            Statistic::WeightedLjungBox => "Q_wl",
            Statistic::WeightedMonti => "Q_wm",
            Statistic::Rank => "Q_rk",
            Statistic::RankSquared => "Q_rks",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Distribution {
    ChiSquare { df: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl Distribution {
    /// P(X > x).
    pub fn sf(&self, x: f64) -> Result<f64> {
        match *self {
            Distribution::ChiSquare { df } => chi_square_sf(x, df),
            Distribution::Gamma { shape, scale } => gamma_sf(x, shape, scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: Statistic,
    pub m: usize,
    pub statistic: f64,
    pub distribution: Distribution,
    pub p_value: f64,
}

fn report(name: Statistic, m: usize, statistic: f64, distribution: Distribution) -> Result<TestReport> {
    if !statistic.is_finite() {
        return Err(Error::NonFinite(statistic));
    }
    let p_value = distribution.sf(statistic)?.clamp(0.0, 1.0);
    Ok(TestReport { name, m, statistic, distribution, p_value })
}

fn check(cv: &CorrelationVector, m: usize, kinds: &[CorrelationKind]) -> Result<()> {
    if !kinds.contains(&cv.kind) {
        return Err(Error::InvalidParameter(format!("expected {kinds:?} correlations, got {:?}", cv.kind)));
    }
    if m == 0 || m > cv.lags() || m >= cv.n {
        return Err(Error::InvalidParameter(format!(
            "lag count m = {m} must satisfy 1 <= m <= {} and m < n = {}",
            cv.lags(),
            cv.n
        )));
    }
    Ok(())
}

/// n(n+2)·Σ w_k·c_k²/(n−k).
fn ljung_box_sum(cv: &CorrelationVector, m: usize, weight: impl Fn(usize) -> f64) -> f64 {
    let n = cv.n as f64;
    n * (n + 2.0) * (1..=m).map(|k| weight(k) * cv.values[k - 1].powi(2) / (n - k as f64)).sum::<f64>()
}

fn triangular(m: usize) -> impl Fn(usize) -> f64 {
    move |k| (m - k + 1) as f64 / m as f64
}

/// Moment-matched (shape, scale) of Σ w_k χ²₁ with triangular weights
/// (m − k + 1)/m.
pub fn weighted_gamma(m: usize) -> Result<Distribution> {
    let w: Vec<f64> = (1..=m).map(triangular(m)).collect();
    let (shape, scale) = moment_matched_gamma(&w)?;
    Ok(Distribution::Gamma { shape, scale })
}

/// Gamma law with the mean and variance of Σ w_k χ²₁ (independent terms).
pub fn moment_matched_gamma(weights: &[f64]) -> Result<(f64, f64)> {
    if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter("weights must be non-empty, finite and positive".into()));
    }
    let s1: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    Ok((s1 * s1 / (2.0 * s2), 2.0 * s2 / s1))
}

/// P(Σ w_k χ²₁ ≤ x) under the moment-matched gamma approximation.
pub fn weighted_chisq_cdf(x: f64, weights: &[f64]) -> Result<f64> {
    let (shape, scale) = moment_matched_gamma(weights)?;
    gamma_cdf(x, shape, scale)
}

pub fn q_ljung_box(acf: &CorrelationVector, m: usize) -> Result<TestReport> {
    check(acf, m, &[CorrelationKind::TrimmedAcf])?;
    report(Statistic::LjungBox, m, ljung_box_sum(acf, m, |_| 1.0), Distribution::ChiSquare { df: m as f64 })
}

pub fn q_monti(pacf: &CorrelationVector, m: usize) -> Result<TestReport> {
    check(pacf, m, &[CorrelationKind::Pacf])?;
    report(Statistic::Monti, m, ljung_box_sum(pacf, m, |_| 1.0), Distribution::ChiSquare { df: m as f64 })
}

pub fn q_box_pierce_weighted(acf: &CorrelationVector, m: usize) -> Result<TestReport> {
    check(acf, m, &[CorrelationKind::TrimmedAcf])?;
    let w = triangular(m);
    let stat = acf.n as f64 * (1..=m).map(|k| w(k) * acf.values[k - 1].powi(2)).sum::<f64>();
    report(Statistic::WeightedBoxPierce, m, stat, weighted_gamma(m)?)
}

pub fn q_ljung_box_weighted(acf: &CorrelationVector, m: usize) -> Result<TestReport> {
    check(acf, m, &[CorrelationKind::TrimmedAcf])?;
    report(Statistic::WeightedLjungBox, m, ljung_box_sum(acf, m, triangular(m)), weighted_gamma(m)?)
}

pub fn q_monti_weighted(pacf: &CorrelationVector, m: usize) -> Result<TestReport> {
    check(pacf, m, &[CorrelationKind::Pacf])?;
    report(Statistic::WeightedMonti, m, ljung_box_sum(pacf, m, triangular(m)), weighted_gamma(m)?)
}

/// Degrees of freedom (3/2)·m(m+1)/(2m+1) of the generalized-variance test.
pub fn gv_df(m: usize) -> f64 {
    let m = m as f64;
    1.5 * m * (m + 1.0) / (2.0 * m + 1.0)
}

/// log|R̂_m| of the (m+1)×(m+1) Toeplitz matrix built from 1, ρ̂_1, …, ρ̂_m,
/// as Σ (m−k+1)·ln(1 − π̂_k²).
pub fn toeplitz_log_det(acf: &CorrelationVector, m: usize) -> Result<f64> {
    let pacf = pacf_from_acf(acf, m).map_err(|e| match e {
        Error::SingularToeplitz { lag } => Error::NotPositiveDefinite { lag },
        other => other,
    })?;
    let mut total = 0.0;
    for (i, p) in pacf.values.iter().enumerate() {
        if !(p.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite { lag: i + 1 });
        }
        total += (m - i) as f64 * (-p * p).ln_1p();
    }
    Ok(total)
}

pub fn q_gvtest(acf: &CorrelationVector, m: usize) -> Result<TestReport> {
    check(acf, m, &[CorrelationKind::TrimmedAcf])?;
    let stat = -3.0 * acf.n as f64 / (2 * m + 1) as f64 * toeplitz_log_det(acf, m)?;
    report(Statistic::GeneralizedVariance, m, stat.max(0.0), Distribution::ChiSquare { df: gv_df(m) })
}

fn rank_sum(rc: &CorrelationVector, m: usize) -> f64 {
    144.0 * rc.n as f64 * rc.values[..m].iter().map(|g| g * g).sum::<f64>()
}

pub fn q_rank(rankcorr: &CorrelationVector, m: usize) -> Result<TestReport> {
    check(rankcorr, m, &[CorrelationKind::Rank])?;
    report(Statistic::Rank, m, rank_sum(rankcorr, m), Distribution::ChiSquare { df: m as f64 })
}

pub fn q_rank_squared(rankcorr: &CorrelationVector, m: usize) -> Result<TestReport> {
    check(rankcorr, m, &[CorrelationKind::RankSquared])?;
    report(Statistic::RankSquared, m, rank_sum(rankcorr, m), Distribution::ChiSquare { df: m as f64 })
}

/// One statistic at one lag budget, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub statistic: Statistic,
    pub m: usize,
    pub outcome: Result<TestReport>,
}

/// All eight statistics at every lag in `lags`, ordered by statistic then lag.
/// Failures are reported per row.
pub fn all_statistics(raw_residuals: &[f64], trim_spec: &TrimSpec, lags: &[usize]) -> Vec<Row> {
    let max_m = lags.iter().copied().max().unwrap_or(0);
    let acf = trim(raw_residuals, trim_spec).and_then(|rs| trimmed_acf(&rs, max_m));
    let pacf = acf.clone().and_then(|a| pacf_from_acf(&a, max_m));
    let rank = rank_correlations(raw_residuals, max_m, false);
    let rank_sq = rank_correlations(raw_residuals, max_m, true);

    let mut rows = Vec::with_capacity(Statistic::ALL.len() * lags.len());
    for stat in Statistic::ALL {
        for &m in lags {
            let outcome = match stat {
                Statistic::LjungBox => acf.clone().and_then(|a| q_ljung_box(&a, m)),
                Statistic::Monti => pacf.clone().and_then(|p| q_monti(&p, m)),
                Statistic::GeneralizedVariance => acf.clone().and_then(|a| q_gvtest(&a, m)),
                Statistic::WeightedBoxPierce => acf.clone().and_then(|a| q_box_pierce_weighted(&a, m)),
                Statistic::WeightedLjungBox => acf.clone().and_then(|a| q_ljung_box_weighted(&a, m)),
                Statistic::WeightedMonti => pacf.clone().and_then(|p| q_monti_weighted(&p, m)),
                Statistic::Rank => rank.clone().and_then(|r| q_rank(&r, m)),
                Statistic::RankSquared => rank_sq.clone().and_then(|r| q_rank_squared(&r, m)),
            };
            rows.push(Row { statistic: stat, m, outcome });
        }
    }
    rows
}
