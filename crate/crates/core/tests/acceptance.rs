//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Criterion 7 takes hours on one core and
//! runs only with NCAR_FULL_ACCEPTANCE=1.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use ncar::ar::{laurent_coeffs, simulate_with_innovations, ArModel, DEFAULT_LAURENT_TOL};
use ncar::diagnostics::{pacf_from_acf, rank_correlations, trim, trimmed_acf, CorrelationKind, CorrelationVector, TrimSpec};
use ncar::estimation::{residuals, FitConfig};
use ncar::harness::{
    child_seed, run_experiment, run_experiment_with_workers, size_under_known_params,
    size_under_known_params_with_workers, ExperimentSpec,
};
use ncar::par::{map_indexed, Execution};
use ncar::portmanteau::{moment_matched_gamma, q_gvtest, Statistic};
use ncar::special::{chi_square_cdf, gamma_fn};
use ncar::stable::{stable_pdf, stable_sample, StableParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mixed_ar2_spec(alpha: f64, n: usize, replications: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        true_model: ArModel::new(vec![2.8, -1.6]).unwrap(),
        noise: StableParams::new(alpha, 0.0, 1.0, 0.0).unwrap(),
        n,
        fit_order: 2,
        lags: vec![5, 10, 15, 20, 25],
        replications,
        level: 0.05,
        fit_config: FitConfig::desk(),
        master_seed: seed,
        trim: TrimSpec::default(),
    }
}

fn criterion_1() -> Outcome {
    let gauss = stable_pdf(0.0, &StableParams::new(2.0, 0.0, 1.0, 0.0).unwrap()).unwrap();
    let cauchy = stable_pdf(0.0, &StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap()).unwrap();
    let e1 = (gauss - 1.0 / (2.0 * PI.sqrt())).abs();
    let e2 = (cauchy - 1.0 / PI).abs();
    let q1 = (chi_square_cdf(3.841, 1.0).unwrap() - 0.95).abs();
    let q3 = (chi_square_cdf(7.815, 3.0).unwrap() - 0.95).abs();
    // the tabulated quantiles are rounded to 3 decimals; the CDF is compared
    // at the exact quantiles and the rounded ones are reported
    let e3 = (chi_square_cdf(3.841458820694124, 1.0).unwrap() - 0.95).abs();
    let e4 = (chi_square_cdf(7.814727903251178, 3.0).unwrap() - 0.95).abs();
    outcome(
        e1 < 1e-8 && e2 < 1e-8 && e3 < 1e-6 && e4 < 1e-6,
        format!("pdf errors {e1:.1e} {e2:.1e}; chi2 quantile errors {e3:.1e} {e4:.1e} (rounded quantiles {q1:.1e} {q3:.1e})"),
    )
}

/// P(X > x) ≈ C_α(1+β)x^{−α} beyond the integration range.
fn tail_mass(alpha: f64, beta: f64, x: f64) -> f64 {
    gamma_fn(alpha) * (PI * alpha / 2.0).sin() / PI * (1.0 + beta) * x.powf(-alpha)
}

/// CDF on a grid by composite Simpson integration of the density, anchored
/// with the asymptotic left-tail mass.
fn cdf_grid(p: &StableParams) -> (Vec<f64>, Vec<f64>) {
    let outer = 1e5f64;
    let mut grid: Vec<f64> = (0..=200).map(|i| -outer * (40.0 / outer).powf(i as f64 / 200.0)).collect();
    grid.extend((1..4000).map(|i| -40.0 + 0.02 * i as f64));
    grid.extend((0..=200).map(|i| outer * (40.0 / outer).powf(1.0 - i as f64 / 200.0)));
    let f = |x: f64| stable_pdf(x, p).unwrap();
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = tail_mass(p.alpha, -p.beta, outer);
    cdf.push(acc);
    let mut fa = f(grid[0]);
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fb = f(b);
        acc += (b - a) / 6.0 * (fa + 4.0 * f(0.5 * (a + b)) + fb);
        cdf.push(acc);
        fa = fb;
    }
    (grid, cdf)
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (i, &alpha) in [0.8, 1.2, 1.5, 1.8].iter().enumerate() {
        for (j, &beta) in [0.0, 0.5].iter().enumerate() {
            let p = StableParams::new(alpha, beta, 1.0, 0.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + 10 * i as u64 + j as u64);
            let mut draws = stable_sample(&p, 100_000, &mut rng).unwrap();
            draws.sort_by(f64::total_cmp);
            let (grid, cdf) = cdf_grid(&p);
            let n = draws.len() as f64;
            let d = grid
                .iter()
                .zip(&cdf)
                .map(|(x, f)| {
                    let below = draws.partition_point(|v| v < x) as f64 / n;
                    let at_or_below = draws.partition_point(|v| v <= x) as f64 / n;
                    (below - f).abs().max((at_or_below - f).abs())
                })
                .fold(0.0, f64::max);
            worst = worst.max(d);
            details.push(format!("({alpha},{beta})={d:.4}"));
        }
    }
    outcome(worst < 0.01, format!("max KS {worst:.4}: {}", details.join(" ")))
}

fn criterion_3() -> Outcome {
    let noise = StableParams::new(1.5, 0.0, 1.0, 0.0).unwrap();
    let mut worst = 0.0f64;
    for coeffs in [vec![2.8, -1.6], vec![-1.2, 1.6]] {
        let model = ArModel::new(coeffs.clone()).unwrap();
        let k = laurent_coeffs(&model, DEFAULT_LAURENT_TOL).unwrap().truncation();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let path = simulate_with_innovations(&model, &noise, 1000, k, &mut rng).unwrap();
        let z = residuals(&path.values, &model).unwrap();
        let err = z.iter().zip(&path.innovations[2..]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    outcome(worst < 1e-6, format!("max |Ẑ − Z| = {worst:.2e}"))
}

fn variance(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

fn criterion_4() -> Outcome {
    let spec = ExperimentSpec { lags: vec![10], ..mixed_ar2_spec(1.8, 1000, 1000, 2024) };
    let model = spec.true_model.clone();
    let k = laurent_coeffs(&model, DEFAULT_LAURENT_TOL).unwrap().truncation();
    let root_n = (spec.n as f64).sqrt();
    let lag_one: Vec<(f64, f64, f64)> = map_indexed(Execution::Parallel, spec.replications, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(spec.master_seed, r));
        let path = simulate_with_innovations(&model, &spec.noise, spec.n, k, &mut rng).unwrap();
        let z = residuals(&path.values, &model).unwrap();
        let acf = trimmed_acf(&trim(&z, &spec.trim).unwrap(), 1).unwrap();
        let pacf = pacf_from_acf(&acf, 1).unwrap();
        let rank = rank_correlations(&z, 1, false).unwrap();
        (root_n * acf.values[0], root_n * pacf.values[0], 12.0 * root_n * rank.values[0])
    });
    let v_rho = variance(&lag_one.iter().map(|t| t.0).collect::<Vec<_>>());
    let v_pi = variance(&lag_one.iter().map(|t| t.1).collect::<Vec<_>>());
    let v_rank = variance(&lag_one.iter().map(|t| t.2).collect::<Vec<_>>());

    let sizes = size_under_known_params(&spec).unwrap();
    let checked = [
        Statistic::LjungBox,
        Statistic::Monti,
        Statistic::Rank,
        Statistic::RankSquared,
        Statistic::GeneralizedVariance,
        Statistic::WeightedLjungBox,
    ];
    let fractions: Vec<(Statistic, f64)> = checked.iter().map(|&s| (s, sizes.cell(s, 10).unwrap().fraction)).collect();
    let var_ok = [v_rho, v_pi, v_rank].iter().all(|v| (0.85..=1.15).contains(v));
    let size_ok = fractions.iter().all(|(_, f)| (0.03..=0.07).contains(f));
    let listed: Vec<String> = fractions.iter().map(|(s, f)| format!("{s}={f:.3}")).collect();
    outcome(
        var_ok && size_ok,
        format!("variances rho={v_rho:.3} pi={v_pi:.3} rank={v_rank:.3}; sizes m=10 {}", listed.join(" ")),
    )
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    for m in 1..=50usize {
        let w: Vec<f64> = (1..=m).map(|k| (m - k + 1) as f64 / m as f64).collect();
        let (shape, scale) = moment_matched_gamma(&w).unwrap();
        let mf = m as f64;
        let want_shape = 3.0 * mf * (mf + 1.0) / (8.0 * mf + 4.0);
        let want_scale = 2.0 * (2.0 * mf + 1.0) / (3.0 * mf);
        worst = worst.max(((shape - want_shape) / want_shape).abs()).max(((scale - want_scale) / want_scale).abs());
    }
    outcome(worst < 1e-12, format!("max relative error {worst:.1e} over m = 1..50"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(1..=20usize);
        // autocorrelations of a random moving average are positive definite
        let q = rng.random_range(1..=25usize);
        let theta: Vec<f64> = (0..=q).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c0: f64 = theta.iter().map(|t| t * t).sum();
        let rho: Vec<f64> = (1..=m)
            .map(|k| if k > q { 0.0 } else { theta[..=q - k].iter().zip(&theta[k..]).map(|(a, b)| a * b).sum::<f64>() / c0 })
            .collect();
        let n = 500;
        let acf = CorrelationVector { values: rho.clone(), n, kind: CorrelationKind::TrimmedAcf };
        let got = q_gvtest(&acf, m).unwrap().statistic;
        let dense = DMatrix::from_fn(m + 1, m + 1, |i, j| {
            let d = i.abs_diff(j);
            if d == 0 { 1.0 } else { rho[d - 1] }
        });
        let want = -3.0 * n as f64 / (2 * m + 1) as f64 * dense.determinant().ln();
        worst = worst.max((got - want).abs());
    }
    outcome(worst < 1e-10, format!("max |DL − dense| = {worst:.1e} over 100 inputs"))
}

fn criterion_7() -> Outcome {
    let spec = ExperimentSpec { lags: vec![10], ..mixed_ar2_spec(1.8, 500, 200, 7) };
    let r = run_experiment(&spec).unwrap();
    let targets =
        [(Statistic::LjungBox, 0.050), (Statistic::Monti, 0.049), (Statistic::Rank, 0.035), (Statistic::GeneralizedVariance, 0.020), (Statistic::WeightedLjungBox, 0.039)];
    let mut ok = !r.flagged;
    let mut parts = Vec::new();
    for (s, want) in targets {
        let got = r.cell(s, 10).unwrap().fraction;
        ok &= (got - want).abs() <= 0.035;
        parts.push(format!("{s}={got:.3}(ref {want:.3})"));
    }
    outcome(ok, format!("{}; failed fits {}/{}; {:.0}s", parts.join(" "), r.failed, spec.replications, r.wall_time_secs))
}

fn criterion_8() -> Outcome {
    let spec = ExperimentSpec {
        true_model: ArModel::new(vec![-1.2, 1.6]).unwrap(),
        noise: StableParams::new(0.8, 0.0, 1.0, 0.0).unwrap(),
        n: 50,
        fit_order: 1,
        lags: vec![5],
        replications: 200,
        level: 0.05,
        fit_config: FitConfig::desk(),
        master_seed: 8,
        trim: TrimSpec::default(),
    };
    let r = run_experiment(&spec).unwrap();
    let rk = r.cell(Statistic::Rank, 5).unwrap().fraction;
    let mt = r.cell(Statistic::Monti, 5).unwrap().fraction;
    outcome(
        rk > 0.75 && rk > mt && !r.flagged,
        format!("Q_rk={rk:.3} Q_mt={mt:.3}; failed fits {}/200; {:.0}s", r.failed, r.wall_time_secs),
    )
}

fn criterion_9() -> Outcome {
    let size = |alpha: f64| {
        let spec = ExperimentSpec { lags: vec![10], ..mixed_ar2_spec(alpha, 500, 500, 9) };
        size_under_known_params(&spec).unwrap().cell(Statistic::LjungBox, 10).unwrap().fraction
    };
    let (low, high) = (size(0.8), size(1.8));
    outcome(low > high, format!("Q_lb size m=10: alpha 0.8 -> {low:.3}, alpha 1.8 -> {high:.3}"))
}

fn criterion_10() -> Outcome {
    let fitted = ExperimentSpec {
        fit_config: FitConfig { n_starts: 40, n_refine: 2, ..FitConfig::desk() },
        ..mixed_ar2_spec(1.5, 100, 8, 10)
    };
    let known = mixed_ar2_spec(1.5, 500, 200, 10);
    let mut same = true;
    let mut shown = String::new();
    for (label, spec, fit) in [("fitted", &fitted, true), ("known", &known, false)] {
        let csvs: Vec<String> = [1usize, 4, 16]
            .iter()
            .map(|&w| {
                let r = if fit { run_experiment_with_workers(spec, w) } else { size_under_known_params_with_workers(spec, w) };
                r.unwrap().to_csv().unwrap()
            })
            .collect();
        same &= csvs.windows(2).all(|p| p[0] == p[1]);
        shown.push_str(&format!("{label}: {} bytes x3 ", csvs[0].len()));
    }
    outcome(same, format!("{shown}identical={same}"))
}

/// (number, label, check, runs without NCAR_FULL_ACCEPTANCE)
type Entry = (u32, &'static str, fn() -> Outcome, bool);

fn main() -> ExitCode {
    let full = std::env::var("NCAR_FULL_ACCEPTANCE").is_ok_and(|v| v == "1");
    let criteria: [Entry; 10] = [
        (1, "stable special cases and chi-square quantiles", criterion_1, true),
        (2, "sampler vs integrated density (KS)", criterion_2, true),
        (3, "Laurent filter inversion", criterion_3, true),
        (4, "known-parameter distributional suite", criterion_4, true),
        (5, "gamma approximation identity", criterion_5, true),
        (6, "generalized-variance log-det identity", criterion_6, true),
        (7, "desk-scale size table, full pipeline", criterion_7, full),
        (8, "desk-scale power direction", criterion_8, true),
        (9, "size inflation as alpha decreases", criterion_9, true),
        (10, "harness determinism across workers", criterion_10, true),
    ];
    let mut failed = 0;
    for (id, name, run, enabled) in criteria {
        if !enabled {
            println!("criterion {id:>2} SKIP  {name} (set NCAR_FULL_ACCEPTANCE=1)");
            continue;
        }
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {id:>2} {tag}  {name}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
