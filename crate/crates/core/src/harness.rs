//! Monte-Carlo size and power experiments: simulate, fit, test, aggregate.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ar::{laurent_coeffs, simulate_from_laurent, ArModel, LaurentCoeffs, DEFAULT_LAURENT_TOL};
use crate::diagnostics::TrimSpec;
use crate::error::{Error, Result};
use crate::estimation::{fit_mle_with, residuals, FitConfig};
use crate::par::{map_indexed, with_workers, Execution};
use crate::portmanteau::{all_statistics, Statistic};
use crate::stable::StableParams;

/// Share of failed replications above which a result is flagged.
pub const FAILURE_FLAG_THRESHOLD: f64 = 0.2;

fn default_lags() -> Vec<usize> {
    vec![5, 10, 15, 20, 25]
}

fn default_level() -> f64 {
    0.05
}

fn default_replications() -> usize {
    200
}

fn default_fit_config() -> FitConfig {
    FitConfig::desk()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub true_model: ArModel,
    pub noise: StableParams,
    pub n: usize,
    pub fit_order: usize,
    #[serde(default = "default_lags")]
    pub lags: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_fit_config")]
    pub fit_config: FitConfig,
    pub master_seed: u64,
    #[serde(default)]
    pub trim: TrimSpec,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must lie in (0, 1), got {}", self.level));
        }
        if self.lags.is_empty() || self.lags.iter().any(|&m| m == 0 || m >= self.n) {
            return bad(format!("lags must be non-empty with 1 <= m < n = {}, got {:?}", self.n, self.lags));
        }
        if self.n < self.true_model.order() + 1 {
            return bad(format!("n = {} is too short for order {}", self.n, self.true_model.order()));
        }
        if self.n < self.trim.min_len() {
            return bad(format!("n = {} is below the trimming minimum {}", self.n, self.trim.min_len()));
        }
        self.noise.validate().map_err(|e| Error::Config(format!("noise: {e}")))?;
        self.trim.validate().map_err(|e| Error::Config(format!("trim: {e}")))?;
        self.fit_config.validate().map_err(|e| Error::Config(format!("fit_config: {e}")))?;
        Ok(())
    }
}

/// Rejection count for one (statistic, m) cell over the usable replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub statistic: Statistic,
    pub m: usize,
    pub rejections: usize,
    pub replications: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub index: usize,
    pub seed: u64,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub known_params: bool,
    pub cells: Vec<Cell>,
    pub replications: Vec<ReplicationRecord>,
    pub failed: usize,
    pub flagged: bool,
    pub wall_time_secs: f64,
}

impl ExperimentResult {
    pub fn cell(&self, statistic: Statistic, m: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.statistic == statistic && c.m == m)
    }

    /// CSV with columns statistic, m, rejections, replications, fraction.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["statistic", "m", "rejections", "replications", "fraction"]).map_err(io)?;
        for c in &self.cells {
            w.write_record([
                c.statistic.name().to_string(),
                c.m.to_string(),
                c.rejections.to_string(),
                c.replications.to_string(),
                c.fraction.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `r`: SplitMix64 of `master + r·0x9E3779B97F4A7C15`.
pub fn child_seed(master: u64, r: usize) -> u64 {
    splitmix64(master.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

struct Outcome {
    record: ReplicationRecord,
    /// (statistic, m, rejected) for every row that could be computed.
    rows: Vec<(Statistic, usize, bool)>,
}

fn replicate(spec: &ExperimentSpec, psi: &LaurentCoeffs, r: usize, known: bool, exec: Execution) -> Outcome {
    let seed = child_seed(spec.master_seed, r);
    let failed = |error: Error| Outcome {
        record: ReplicationRecord { index: r, seed, converged: false, error: Some(error.to_string()) },
        rows: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = match simulate_from_laurent(psi, spec.true_model.order(), &spec.noise, spec.n, psi.truncation(), &mut rng)
    {
        Ok(p) => p,
        Err(e) => return failed(e),
    };
    let fit_seed = rng.next_u64();
    let (model, converged) = if known {
        (spec.true_model.clone(), true)
    } else {
        match fit_mle_with(&path.values, spec.fit_order, &spec.fit_config, fit_seed, exec) {
            Ok(fit) => (fit.model, fit.converged),
            Err(e) => return failed(e),
        }
    };
    if !converged {
        return Outcome {
            record: ReplicationRecord { index: r, seed, converged, error: Some("fit did not converge".into()) },
            rows: Vec::new(),
        };
    }
    let z = match residuals(&path.values, &model) {
        Ok(z) => z,
        Err(e) => return failed(e),
    };
    let rows = all_statistics(&z, &spec.trim, &spec.lags)
        .into_iter()
        .filter_map(|row| row.outcome.ok().map(|rep| (row.statistic, row.m, rep.p_value < spec.level)))
        .collect();
    Outcome { record: ReplicationRecord { index: r, seed, converged, error: None }, rows }
}

fn execute(spec: &ExperimentSpec, known: bool, workers: usize) -> Result<ExperimentResult> {
    spec.validate()?;
    if !known && spec.fit_order == 0 {
        return Err(Error::Config("fit_order must be at least 1".into()));
    }
    if !known && spec.n + spec.true_model.order() < 10 * (spec.fit_order + 4) {
        return Err(Error::Config(format!(
            "n = {} is below the fitting minimum for order {}",
            spec.n, spec.fit_order
        )));
    }
    let start = Instant::now();
    let psi = laurent_coeffs(&spec.true_model, DEFAULT_LAURENT_TOL)?;
    let exec = if workers == 1 { Execution::Sequential } else { Execution::Parallel };
    let outcomes = with_workers(workers, || {
        map_indexed(exec, spec.replications, |r| replicate(spec, &psi, r, known, exec))
    });

    let mut counts: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (si, _) in Statistic::ALL.iter().enumerate() {
        for (mi, _) in spec.lags.iter().enumerate() {
            counts.insert((si, mi), (0, 0));
        }
    }
    let mut records = Vec::with_capacity(outcomes.len());
    let mut failed = 0;
    for o in outcomes {
        if o.record.error.is_some() {
            failed += 1;
        }
        for (stat, m, rejected) in o.rows {
            let si = Statistic::ALL.iter().position(|s| *s == stat).unwrap_or(0);
            let mi = spec.lags.iter().position(|&l| l == m).unwrap_or(0);
            let entry = counts.entry((si, mi)).or_insert((0, 0));
            entry.0 += rejected as usize;
            entry.1 += 1;
        }
        records.push(o.record);
    }
    let cells = counts
        .into_iter()
        .map(|((si, mi), (rejections, reps))| Cell {
            statistic: Statistic::ALL[si],
            m: spec.lags[mi],
            rejections,
            replications: reps,
            fraction: if reps == 0 { f64::NAN } else { rejections as f64 / reps as f64 },
        })
        .collect();
    Ok(ExperimentResult {
        spec: spec.clone(),
        known_params: known,
        cells,
        replications: records,
        failed,
        flagged: failed as f64 > FAILURE_FLAG_THRESHOLD * spec.replications as f64,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Full pipeline with maximum-likelihood fitting, on the global thread pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    execute(spec, false, 0)
}

/// As [`run_experiment`] on a pool of `workers` threads (1 runs sequentially,
/// 0 uses the global pool). The cells do not depend on `workers`.
pub fn run_experiment_with_workers(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentResult> {
    execute(spec, false, workers)
}

/// Skips fitting: residuals come from the true model.
pub fn size_under_known_params(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    execute(spec, true, 0)
}

pub fn size_under_known_params_with_workers(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentResult> {
    execute(spec, true, workers)
}
