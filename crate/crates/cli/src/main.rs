use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncar::ar::{laurent_coeffs, simulate, ArModel, DEFAULT_LAURENT_TOL};
use ncar::diagnostics::TrimSpec;
use ncar::estimation::{fit_mle, residuals, FitConfig};
use ncar::harness::{run_experiment_with_workers, size_under_known_params_with_workers, ExperimentSpec};
use ncar::portmanteau::{all_statistics, Row};
use ncar::stable::StableParams;
use ncar::Error;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "ncar", version, about = "Non-causal stable autoregressions: simulate, fit, test, experiment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a stationary path; writes one value per line.
    Simulate(SimulateArgs),
    /// Fit an AR(p) with stable noise by multistart maximum likelihood.
    Fit(FitArgs),
    /// Portmanteau tests on residuals.
    Test(TestArgs),
    /// Monte-Carlo size/power experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// AR coefficients, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    phi: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    delta: f64,
    /// Observations after the p presample values.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Innovations discarded on each side (default: the Laurent truncation).
    #[arg(long)]
    burn: Option<usize>,
}

#[derive(Args, Serialize)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    #[arg(long, default_value_t = 200)]
    starts: usize,
    #[arg(long, default_value_t = 4)]
    refine: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
struct TestArgs {
    /// Series (with --model) or residuals (without).
    #[arg(long = "in")]
    input: PathBuf,
    /// Inline coefficients such as "2.8,-1.6", or a fit report JSON path.
    #[arg(long, allow_hyphen_values = true)]
    model: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25")]
    lags: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.99", num_args = 1)]
    trim: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Skip fitting and test the true model's residuals.
    #[arg(long)]
    known_params: bool,
}

#[derive(Serialize, Deserialize)]
struct FitReport {
    phi_hat: Vec<f64>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    loglik: f64,
    converged: bool,
    n_evaluations: usize,
}

#[derive(Serialize)]
struct TestRow {
    statistic: String,
    m: usize,
    value: Option<f64>,
    p_value: Option<f64>,
    error: Option<String>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Config(_) | Error::Io(_) | Error::SeriesTooShort { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

fn echo<T: Serialize>(name: &str, args: &T) {
    eprintln!("ncar {name}: {}", serde_json::to_string(args).unwrap_or_default());
}

fn read_series(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|_| Failure::Usage(format!("{}: line {} is not a number: {l:?}", path.display(), i + 1)))
        })
        .collect()
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let model = ArModel::new(args.phi.clone())?;
    let noise = StableParams::new(args.alpha, args.beta, args.gamma, args.delta)?;
    let burn = match args.burn {
        Some(b) => b,
        None => laurent_coeffs(&model, DEFAULT_LAURENT_TOL)?.truncation(),
    };
    echo("simulate", &serde_json::json!({ "args": &args, "burn": burn }));
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let path = simulate(&model, &noise, args.n, burn, &mut rng)?;
    let mut text = String::with_capacity(path.len() * 24);
    for v in &path {
        text.push_str(&v.to_string());
        text.push('\n');
    }
    fs::write(&args.out, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<(), Failure> {
    let config = FitConfig { n_starts: args.starts, n_refine: args.refine, ..FitConfig::desk() };
    echo("fit", &serde_json::json!({ "args": &args, "fit_config": &config }));
    let series = read_series(&args.input)?;
    let fit = fit_mle(&series, args.order as usize, &config, args.seed)?;
    let report = FitReport {
        phi_hat: fit.model.coeffs().to_vec(),
        alpha: fit.noise.alpha,
        beta: fit.noise.beta,
        gamma: fit.noise.gamma,
        delta: fit.noise.delta,
        loglik: fit.loglik,
        converged: fit.converged,
        n_evaluations: fit.n_evaluations,
    };
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Numerical(e.to_string()))?);
    Ok(())
}

fn parse_model(spec: &str) -> Result<ArModel, Failure> {
    let inline: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let coeffs = match inline {
        Ok(c) => c,
        Err(_) => {
            let text = fs::read_to_string(spec)
                .map_err(|e| Failure::Usage(format!("--model is neither coefficients nor a readable file: {e}")))?;
            let report: FitReport = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{spec}: not a fit report: {e}")))?;
            report.phi_hat
        }
    };
    Ok(ArModel::new(coeffs)?)
}

fn cmd_test(args: TestArgs) -> Result<(), Failure> {
    if args.trim.len() != 2 {
        return Err(Failure::Usage("--trim takes exactly two values: lower,upper".into()));
    }
    let trim = TrimSpec::new(args.trim[0], args.trim[1])?;
    if args.lags.is_empty() || args.lags.contains(&0) {
        return Err(Failure::Usage("--lags must be positive integers".into()));
    }
    echo("test", &args);
    let data = read_series(&args.input)?;
    let z = match &args.model {
        Some(spec) => residuals(&data, &parse_model(spec)?)?,
        None => data,
    };
    let rows: Vec<TestRow> = all_statistics(&z, &trim, &args.lags)
        .into_iter()
        .map(|Row { statistic, m, outcome }| match outcome {
            Ok(r) => TestRow { statistic: statistic.to_string(), m, value: Some(r.statistic), p_value: Some(r.p_value), error: None },
            Err(e) => TestRow { statistic: statistic.to_string(), m, value: None, p_value: None, error: Some(e.to_string()) },
        })
        .collect();

    match args.format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&rows).map_err(|e| Failure::Numerical(e.to_string()))?);
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let io = |e: csv::Error| Failure::Usage(e.to_string());
            w.write_record(["statistic", "m", "value", "p_value", "error"]).map_err(io)?;
            for r in &rows {
                w.write_record([r.statistic.clone(), r.m.to_string(), opt(r.value), opt(r.p_value), r.error.clone().unwrap_or_default()])
                    .map_err(io)?;
            }
            w.flush().map_err(|e| Failure::Usage(e.to_string()))?;
        }
    }
    if let Some(first) = rows.iter().find_map(|r| r.error.clone()) {
        if rows.iter().all(|r| r.error.is_some()) {
            return Err(Failure::Numerical(format!("every statistic failed: {first}")));
        }
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let spec = ExperimentSpec::from_json(&text)?;
    echo("experiment", &serde_json::json!({ "args": &args, "spec": &spec }));
    fs::create_dir_all(&args.out_dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let result = if args.known_params {
        size_under_known_params_with_workers(&spec, args.workers)?
    } else {
        run_experiment_with_workers(&spec, args.workers)?
    };
    result.write_csv(&args.out_dir.join("results.csv"))?;
    result.write_json(&args.out_dir.join("results.json"))?;
    if result.flagged {
        eprintln!("warning: {} of {} replications failed", result.failed, spec.replications);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Test(a) => cmd_test(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
