//! `spikecov`: run the Monte Carlo experiments, fit covariance estimators to
//! a data panel, and print the large-sample predictions of a spiked model.
//!
//! Exit status: 0 on success, 1 when a run fails, 2 for usage or
//! validation errors.

mod matrix_io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use spikecov_core::error::Error as CoreError;
use spikecov_core::estimators::{poet, sample_estimate, spoet, CovEstimate, Method, Shrinkage, ThresholdConfig};
use spikecov_core::linalg::extreme_eigenvalues;
use spikecov_core::randgen::SpikedModelSpec;
use spikecov_core::spiked::summarize;
use spikecov_harness::{ExperimentConfig, ExperimentKind, HarnessError};

#[derive(Debug, Parser)]
#[command(name = "spikecov", version, about = "Spiked covariance experiments and estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a seeded Monte Carlo experiment and write <name>.csv and <name>.summary.
    Simulate(SimulateArgs),
    /// Fit the sample covariance, POET or S-POET to a p x T data panel.
    ///
    /// The input CSV has no header and one variable per row: p rows, T
    /// columns (observations).
    Fit(FitArgs),
    /// Print c_j, c_bar, eigenvalue bias, angle limits and a_jk for a spiked model.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// eigen, angles, rates, spoet-errors or fdp.
    experiment: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory (default: the config's output_dir, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment parameter override, e.g. --set n=100 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// p x T panel, one variable per row, no header.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "poet")]
    method: String,
    /// Number of spikes (ignored by the sample method).
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Threshold constant.
    #[arg(long = "C", default_value_t = 0.5)]
    c: f64,
    /// soft, hard or scad.
    #[arg(long, default_value = "soft")]
    shrinkage: String,
    /// Subtract row means before fitting.
    #[arg(long)]
    center: bool,
    /// Accepted for uniformity with simulate; fitting is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Comma-separated spike eigenvalues, descending.
    #[arg(long, value_delimiter = ',', required = true)]
    spikes: Vec<f64>,
    /// Non-spike eigenvalue, or a comma-separated list of p - m values.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    nonspike: Vec<f64>,
    /// Accepted for uniformity with simulate; the oracle is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_validation() {
            Failure::Usage(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let kind: ExperimentKind = args.experiment.parse()?;
    let mut cfg = ExperimentConfig::new(kind);
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(Failure::Usage)?;
        cfg.apply_text(&text)?;
    }
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(out) = args.out {
        cfg.output_dir = Some(out);
    }
    cfg.validate()?;
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let report = spikecov_harness::run(&cfg)?;
    let (csv_path, summary_path) = report.save(&dir)?;
    print!("{}", report.summary_text());
    println!("wall_time_secs={:.3}", report.wall_time.as_secs_f64());
    println!("wrote {} and {}", csv_path.display(), summary_path.display());
    Ok(())
}

fn fit_failure(e: CoreError) -> Failure {
    match e {
        CoreError::InvalidInput(_) | CoreError::Rank { .. } | CoreError::Regime { .. } => Failure::Usage(e.into()),
        other => Failure::Runtime(other.into()),
    }
}

fn fit(args: FitArgs) -> Result<(), Failure> {
    let method: Method = args.method.parse().map_err(fit_failure)?;
    let shrinkage: Shrinkage = args.shrinkage.parse().map_err(fit_failure)?;
    let cfg = ThresholdConfig {
        c: args.c,
        shrinkage,
        ..ThresholdConfig::default()
    };
    cfg.validate().map_err(fit_failure)?;
    let y = matrix_io::read_panel(&args.input)
        .map_err(Failure::Usage)?
        .map_err(|e| usage(format!("malformed input {}: {e}", args.input.display())))?;
    let y = if args.center { y.center_rows() } else { y };
    let (p, t) = (y.n_rows(), y.n_cols());
    if method != Method::Sample && (args.m == 0 || args.m >= p.min(t)) {
        return Err(usage(format!("--m {} is infeasible for a {p} x {t} panel", args.m)));
    }
    let est = match method {
        Method::Sample => sample_estimate(&y, false),
        Method::Poet => poet(&y, args.m, &cfg),
        Method::Spoet => spoet(&y, args.m, &cfg),
    }
    .map_err(fit_failure)?;
    write_estimate(&est, &args.out)?;

    let sigma = est.assemble();
    let (_, min_resid) = extreme_eigenvalues(&est.residual).map_err(|e| Failure::Runtime(e.into()))?;
    println!("method={}", method.name());
    println!("p={p}");
    println!("T={t}");
    println!("m={}", est.m());
    println!("trace={:.16e}", sigma.trace());
    println!("min_residual_eigenvalue={min_resid:.16e}");
    if let Some(c) = est.c_hat {
        println!("c_hat={c:.16e}");
    }
    println!("wrote estimate files to {}", args.out.display());
    Ok(())
}

/// `spike_values.csv` (`lambda_j` rows, then `c_hat` for S-POET),
/// `spike_vectors.csv` (p x m), `residual.csv` and `covariance.csv` (p x p).
fn write_estimate(est: &CovEstimate, dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut named: Vec<(String, f64)> = est
        .spike_values
        .iter()
        .enumerate()
        .map(|(j, v)| (format!("lambda_{}", j + 1), *v))
        .collect();
    if let Some(c) = est.c_hat {
        named.push(("c_hat".into(), c));
    }
    matrix_io::write_named(&dir.join("spike_values.csv"), &named)?;
    matrix_io::write_matrix(&dir.join("spike_vectors.csv"), est.spike_vectors.view())?;
    matrix_io::write_matrix(&dir.join("residual.csv"), est.residual.view())?;
    matrix_io::write_matrix(&dir.join("covariance.csv"), est.assemble().view())?;
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<(), Failure> {
    if args.p == 0 || args.n == 0 {
        return Err(usage("--n and --p must be positive"));
    }
    let m = args.spikes.len();
    let spec = SpikedModelSpec::new(args.p, args.n, args.spikes.clone(), &args.nonspike)
        .map_err(|e| Failure::Usage(e.into()))?;
    let s = summarize(&spec).map_err(|e| Failure::Usage(e.into()))?;
    println!("c_bar = {:.4}", s.c_bar);
    println!("{:>3} {:>12} {:>10} {:>10} {:>12}", "j", "lambda", "c_j", "eig_bias", "angle_limit");
    for j in 0..m {
        println!(
            "{:>3} {:>12.4} {:>10.4} {:>10.4} {:>12.4}",
            j + 1,
            args.spikes[j],
            s.c[j],
            s.eig_bias[j],
            s.angle_limit[j]
        );
    }
    if m > 1 {
        println!("a_jk:");
        for j in 0..m {
            let row: Vec<String> = (0..m).map(|k| format!("{:>10.4}", s.a[[j, k]])).collect();
            println!("{:>3} {}", j + 1, row.join(" "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            eprintln!("run `spikecov --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
