//! `featmatch`: fit autoregressions by multi-step prediction matching.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

mod config;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use featmatch::{
    aic_baseline, fit_match, run_experiment, select_order, simulate_arma_with, simulate_tar_with, ArmaSpec,
    FitOptions, Innovations, SeriesF64, TarSpec,
};

use crate::output::Format;

pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<featmatch::Error> for Failure {
    fn from(e: featmatch::Error) -> Self {
        Failure::runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "featmatch", version, about = "Fit AR models by matching multi-step predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an AR(p) model by minimizing 1..m-step prediction errors.
    Fit(FitArgs),
    /// Choose the AR order by the bootstrap-penalized log criterion.
    Select(SelectArgs),
    /// Simulate an ARMA or threshold AR series, one value per line.
    Simulate(SimulateArgs),
    /// Run a replicated Monte-Carlo comparison described by a config file.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SeriesArgs {
    /// Series file: one number per line, optional "value" header.
    #[arg(long)]
    input: PathBuf,
    /// Subtract the sample mean before fitting.
    #[arg(long)]
    center: bool,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    series: SeriesArgs,
    /// AR order p.
    #[arg(long)]
    order: usize,
    /// Maximum prediction horizon m.
    #[arg(long)]
    steps: usize,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[arg(long)]
    max_order: usize,
    #[arg(long)]
    steps: usize,
    /// Bootstrap replicates per order.
    #[arg(long)]
    bootstrap: usize,
    #[arg(long)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Arma,
    Tar,
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    Gaussian,
    T,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// AR coefficients, e.g. "0.75,-0.5".
    #[arg(long, value_parser = list, default_value = "", allow_hyphen_values = true)]
    ar: Coeffs,
    /// MA coefficients.
    #[arg(long, value_parser = list, default_value = "", allow_hyphen_values = true)]
    ma: Coeffs,
    /// Lower-regime AR coefficients (tar).
    #[arg(long, value_parser = list, default_value = "", allow_hyphen_values = true)]
    ar_low: Coeffs,
    /// Upper-regime AR coefficients (tar).
    #[arg(long, value_parser = list, default_value = "", allow_hyphen_values = true)]
    ar_high: Coeffs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    threshold: f64,
    #[arg(long, default_value_t = 1)]
    delay: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Warm-up steps (default 200 for arma, 500 for tar).
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long, value_enum, default_value_t = Law::Gaussian)]
    innovations: Law,
    /// Degrees of freedom for t innovations.
    #[arg(long, default_value_t = 5.0)]
    df: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    /// Directory receiving report.csv and summary.json.
    #[arg(long)]
    output: PathBuf,
}

/// A whole comma-separated list as one flag value.
#[derive(Clone)]
struct Coeffs(Vec<f64>);

fn list(s: &str) -> Result<Coeffs, String> {
    config::parse_list(s).map(Coeffs)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Select(args) => cmd_select(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("featmatch: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(args: &SeriesArgs) -> Result<(SeriesF64, Option<f64>), Failure> {
    let series = SeriesF64::new(input::read_series(&args.input)?)?;
    if args.center {
        let (centered, mean) = series.centered();
        Ok((centered, Some(mean)))
    } else {
        Ok((series, None))
    }
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    match jobs {
        Some(0) => return Err(Failure::usage("--jobs must be at least 1")),
        Some(j) => builder = builder.num_threads(j),
        None => {}
    }
    builder.build().map_err(|e| Failure::runtime(e.to_string()))
}

fn cmd_fit(args: FitArgs) -> Result<(), Failure> {
    if args.steps == 0 {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    let (series, mean) = load(&args.series)?;
    let fit = fit_match(&series, args.order, args.steps, &FitOptions::default())?;
    let text = output::fit_report(&fit, mean, args.series.format);
    output::emit(args.series.output.as_deref(), &text)
}

fn cmd_select(args: SelectArgs) -> Result<(), Failure> {
    if args.steps == 0 {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    if args.bootstrap == 0 {
        return Err(Failure::usage("--bootstrap must be at least 1"));
    }
    let pool = thread_pool(args.jobs)?;
    let (series, mean) = load(&args.series)?;
    let opts = FitOptions::default();
    let result = pool.install(|| select_order(&series, args.max_order, args.steps, args.bootstrap, args.seed, &opts))?;
    let aic = aic_baseline(&series, args.max_order).ok();
    let text = output::selection_report(&result, aic.as_ref(), mean, args.series.format);
    output::emit(args.series.output.as_deref(), &text)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let law = match args.innovations {
        Law::Gaussian => Innovations::Gaussian,
        Law::T => Innovations::StudentT { df: args.df },
    };
    let values = match args.model {
        Model::Arma => {
            let spec = ArmaSpec::new(args.ar.0, args.ma.0, args.sigma2).map_err(|e| Failure::usage(e.to_string()))?;
            simulate_arma_with(&spec, args.n, args.seed, args.burnin.unwrap_or(200), law)
        }
        Model::Tar => {
            let spec = TarSpec {
                phi_low: args.ar_low.0,
                phi_high: args.ar_high.0,
                threshold: args.threshold,
                delay: args.delay,
                sigma2: args.sigma2,
            };
            spec.validate().map_err(|e| Failure::usage(e.to_string()))?;
            simulate_tar_with(&spec, args.n, args.seed, args.burnin.unwrap_or(500), law)
        }
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let mut text = String::new();
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    output::emit(args.output.as_deref(), &text)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let pool = thread_pool(args.jobs)?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::runtime(format!("cannot read {}: {e}", args.config.display())))?;
    let plan = config::parse_plan(&text).map_err(|e| Failure::usage(format!("{}: {e}", args.config.display())))?;
    let report = pool.install(|| run_experiment(&plan))?;
    std::fs::create_dir_all(&args.output)
        .map_err(|e| Failure::runtime(format!("cannot create {}: {e}", args.output.display())))?;
    output::emit(Some(&args.output.join("report.csv")), &output::experiment_rows(&report))?;
    output::emit(Some(&args.output.join("summary.json")), &output::experiment_summary(&report))
}
