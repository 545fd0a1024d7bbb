//! Trimmed residuals, their sample autocorrelations, partial autocorrelations
//! by Durbin–Levinson, and rank autocorrelations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower and upper trimming percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrimSpec {
    pub lambda_lower: f64,
    pub lambda_upper: f64,
}

impl Default for TrimSpec {
    fn default() -> Self {
        Self { lambda_lower: 0.01, lambda_upper: 0.99 }
    }
}

impl TrimSpec {
    pub fn new(lambda_lower: f64, lambda_upper: f64) -> Result<Self> {
        let spec = Self { lambda_lower, lambda_upper };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_lower > 0.0 && self.lambda_lower < 0.5 && self.lambda_upper > 0.5 && self.lambda_upper < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "trim percentiles must satisfy 0 < lower < 0.5 < upper < 1, got ({}, {})",
                self.lambda_lower, self.lambda_upper
            )));
        }
        Ok(())
    }

    /// ⌈nλ⌉ clamped to 1..=n.
    pub fn order_index(&self, n: usize, lambda: f64) -> usize {
        ((n as f64 * lambda).ceil() as usize).clamp(1, n)
    }

    /// Smallest sample size whose lower and upper order-statistic indices differ.
    pub fn min_len(&self) -> usize {
        (1..).find(|&n| self.order_index(n, self.lambda_lower) < self.order_index(n, self.lambda_upper)).unwrap_or(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub raw: Vec<f64>,
    pub trimmed: Vec<f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub kept_mask: Vec<bool>,
}

impl ResidualSet {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

/// Keeps Ẑ_t strictly between the ⌈nλ^L⌉-th and ⌈nλ^U⌉-th order statistics
/// and zeroes everything else.
pub fn trim(raw: &[f64], spec: &TrimSpec) -> Result<ResidualSet> {
    spec.validate()?;
    let n = raw.len();
    let needed = spec.min_len();
    if n < needed {
        return Err(Error::SeriesTooShort { needed, got: n });
    }
    if let Some(&bad) = raw.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let mut sorted = raw.to_vec();
    sorted.sort_by(f64::total_cmp);
    let index = |lambda: f64| spec.order_index(n, lambda) - 1;
    let lower_bound = sorted[index(spec.lambda_lower)];
    let upper_bound = sorted[index(spec.lambda_upper)];
    let kept_mask: Vec<bool> = raw.iter().map(|&z| lower_bound < z && z < upper_bound).collect();
    let trimmed = raw.iter().zip(&kept_mask).map(|(&z, &k)| if k { z } else { 0.0 }).collect();
    Ok(ResidualSet { raw: raw.to_vec(), trimmed, lower_bound, upper_bound, kept_mask })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    TrimmedAcf,
    Pacf,
    Rank,
    RankSquared,
}

/// Correlations at lags 1..=m; `values[k − 1]` is lag k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationVector {
    pub values: Vec<f64>,
    pub n: usize,
    pub kind: CorrelationKind,
}

impl CorrelationVector {
    pub fn lags(&self) -> usize {
        self.values.len()
    }
}

/// Sample ACF of the trimmed residuals: the numerator centers each lagged
/// sum over its own n − k terms, the denominator over all n.
pub fn trimmed_acf(rs: &ResidualSet, m: usize) -> Result<CorrelationVector> {
    let tau = &rs.trimmed;
    let n = tau.len();
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!("lag count must satisfy 1 <= m < n = {n}, got {m}")));
    }
    let sum: f64 = tau.iter().sum();
    let sum_sq: f64 = tau.iter().map(|v| v * v).sum();
    let denom = sum_sq - sum * sum / n as f64;
    if !(denom > 1e-14 * sum_sq) {
        return Err(Error::DegenerateVariance);
    }
    let values = (1..=m)
        .map(|k| {
            let (lead, lag) = (&tau[k..], &tau[..n - k]);
            let cross: f64 = lead.iter().zip(lag).map(|(a, b)| a * b).sum();
            let s_lead: f64 = lead.iter().sum();
            let s_lag: f64 = lag.iter().sum();
            (cross - s_lead * s_lag / (n - k) as f64) / denom
        })
        .collect();
    Ok(CorrelationVector { values, n, kind: CorrelationKind::TrimmedAcf })
}

/// Partial autocorrelations π̂_1..π̂_m from ρ̂_1..ρ̂_m by Durbin–Levinson.
pub fn pacf_from_acf(acf: &CorrelationVector, m: usize) -> Result<CorrelationVector> {
    if m == 0 || m > acf.lags() {
        return Err(Error::InvalidParameter(format!("need 1 <= m <= {} lags, got {m}", acf.lags())));
    }
    let rho = &acf.values;
    let mut phi: Vec<f64> = Vec::with_capacity(m);
    let mut v: f64 = 1.0;
    let mut out = Vec::with_capacity(m);
    for k in 1..=m {
        if v.abs() < 1e-12 {
            return Err(Error::SingularToeplitz { lag: k });
        }
        let num = rho[k - 1] - phi.iter().enumerate().map(|(j, f)| f * rho[k - 2 - j]).sum::<f64>();
        let pk = num / v;
        let prev = phi.clone();
        for j in 0..k - 1 {
            phi[j] = prev[j] - pk * prev[k - 2 - j];
        }
        phi.push(pk);
        v *= 1.0 - pk * pk;
        out.push(pk);
    }
    Ok(CorrelationVector { values: out, n: acf.n, kind: CorrelationKind::Pacf })
}

/// r̃_j = #{i : x_i ≤ x_j}/n.
pub fn normalized_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    x.iter().map(|v| sorted.partition_point(|s| s <= v) as f64 / n as f64).collect()
}

/// γ̂_i = (1/n)·Σ_{t=1}^{n−i} (r̃_t − ½)(r̃_{t+i} − ½), on Ẑ_t or on Ẑ_t² when
/// `squared` is set.
pub fn rank_correlations(raw: &[f64], m: usize, squared: bool) -> Result<CorrelationVector> {
    let n = raw.len();
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!("lag count must satisfy 1 <= m < n = {n}, got {m}")));
    }
    if let Some(&bad) = raw.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let ranks = if squared {
        normalized_ranks(&raw.iter().map(|v| v * v).collect::<Vec<_>>())
    } else {
        normalized_ranks(raw)
    };
    let centered: Vec<f64> = ranks.iter().map(|r| r - 0.5).collect();
    let values = (1..=m)
        .map(|i| centered[..n - i].iter().zip(&centered[i..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect();
    let kind = if squared { CorrelationKind::RankSquared } else { CorrelationKind::Rank };
    Ok(CorrelationVector { values, n, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(values: Vec<f64>, kind: CorrelationKind) -> CorrelationVector {
        CorrelationVector { values, n: 100, kind }
    }

    #[test]
    fn trim_percentiles_on_permutation() {
        // 1..=100 shuffled by a fixed stride
        let raw: Vec<f64> = (0..100).map(|i| ((i * 37) % 100 + 1) as f64).collect();
        let rs = trim(&raw, &TrimSpec::default()).unwrap();
        // ⌈100·0.01⌉ = 1 and ⌈100·0.99⌉ = 99
        assert_eq!((rs.lower_bound, rs.upper_bound), (1.0, 99.0));
        let zeroed: Vec<f64> = raw.iter().zip(&rs.kept_mask).filter(|(_, &k)| !k).map(|(&v, _)| v).collect();
        let mut zeroed = zeroed;
        zeroed.sort_by(f64::total_cmp);
        assert_eq!(zeroed, vec![1.0, 99.0, 100.0]);
    }

    #[test]
    fn trim_four_values() {
        let rs = trim(&[1.0, 2.0, 3.0, 4.0], &TrimSpec::new(0.25, 0.75).unwrap()).unwrap();
        assert_eq!((rs.lower_bound, rs.upper_bound), (1.0, 3.0));
        assert_eq!(rs.trimmed, vec![0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn trim_constant_zeroes_everything() {
        let rs = trim(&[2.5; 200], &TrimSpec::default()).unwrap();
        assert!(rs.trimmed.iter().all(|&v| v == 0.0));
        assert!(matches!(trimmed_acf(&rs, 3), Err(Error::DegenerateVariance)));
    }

    #[test]
    fn trim_too_short() {
        assert_eq!(TrimSpec::default().min_len(), 2);
        assert!(matches!(trim(&[1.0], &TrimSpec::default()), Err(Error::SeriesTooShort { needed: 2, .. })));
        // n = 50 keeps indices 1 and 50
        let raw: Vec<f64> = (1..=50).map(f64::from).collect();
        let rs = trim(&raw, &TrimSpec::default()).unwrap();
        assert_eq!((rs.lower_bound, rs.upper_bound), (1.0, 50.0));
        assert!(TrimSpec::new(0.6, 0.9).is_err());
    }

    #[test]
    fn alternating_acf() {
        let tau: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let rs = ResidualSet {
            raw: tau.clone(),
            trimmed: tau,
            lower_bound: -2.0,
            upper_bound: 2.0,
            kept_mask: vec![true; 100],
        };
        let acf = trimmed_acf(&rs, 1).unwrap();
        // numerator −99 − (−1)(1)/99, denominator 100
        assert!((acf.values[0] - (-99.0 + 1.0 / 99.0) / 100.0).abs() < 1e-15);
    }

    #[test]
    fn pacf_hand_values() {
        let p = pacf_from_acf(&cv(vec![0.5, 0.25], CorrelationKind::TrimmedAcf), 2).unwrap();
        assert!((p.values[0] - 0.5).abs() < 1e-15 && p.values[1].abs() < 1e-15);
        let p = pacf_from_acf(&cv(vec![0.0; 6], CorrelationKind::TrimmedAcf), 6).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pacf_of_ar1_acf() {
        let a: f64 = -0.7;
        let acf = cv((1..=12).map(|k| a.powi(k)).collect(), CorrelationKind::TrimmedAcf);
        let p = pacf_from_acf(&acf, 12).unwrap();
        assert!((p.values[0] - a).abs() < 1e-12);
        assert!(p.values[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn pacf_singular() {
        let acf = cv(vec![1.0, 1.0], CorrelationKind::TrimmedAcf);
        assert!(matches!(pacf_from_acf(&acf, 2), Err(Error::SingularToeplitz { lag: 2 })));
    }

    #[test]
    fn rank_hand_value() {
        let g = rank_correlations(&[1.0, 2.0, 3.0, 4.0], 1, false).unwrap();
        assert!((g.values[0] - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn ranks_with_ties_use_le_count() {
        assert_eq!(normalized_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![1.0, 0.25, 1.0, 0.5]);
    }
}
