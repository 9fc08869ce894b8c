use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use tmc_cli::verify::DEFAULT_EXAMPLE_N;
use tmc_cli::{
    emit_csv, render_checks, render_csv, run, verify_anova, with_threads, Benchmark, ExperimentConfig, Settings,
};

/// Toeplitz Monte Carlo benchmark harness.
#[derive(Parser)]
#[command(name = "tmc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multivariate normal point generation with a random covariance.
    Mvn(Options),
    /// 1D diffusion problem with a uniform random coefficient.
    #[command(name = "ode1d-uniform")]
    Ode1dUniform(Options),
    /// 1D diffusion problem with a log-normal random coefficient.
    #[command(name = "ode1d-lognormal")]
    Ode1dLognormal(Options),
    /// 2D diffusion problem on the unit square.
    Pde2d(Options),
    /// Check the variance formulas against exact enumeration.
    #[command(name = "anova-verify")]
    AnovaVerify(Options),
    /// Run the benchmark named by `--benchmark` or by the config file.
    Run {
        #[arg(long)]
        benchmark: Option<String>,
        #[command(flatten)]
        options: Options,
    },
}

/// Every value is kept as text and parsed together with the config file.
#[derive(Args)]
struct Options {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ladder relation such as `N=M=s` or `N=M^2=s`, expanded over `--N`.
    #[arg(long)]
    ladder: Option<String>,
    /// Sample sizes, comma separated.
    #[arg(long = "N", value_name = "LIST")]
    n: Option<String>,
    /// Mesh sizes, comma separated.
    #[arg(long = "M", value_name = "LIST")]
    m: Option<String>,
    /// Dimensions, comma separated.
    #[arg(long = "s", value_name = "LIST")]
    s: Option<String>,
    /// Replications per method and triple [default: 25].
    #[arg(long = "R")]
    r: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated subset of MC,TMC [default: MC,TMC].
    #[arg(long)]
    methods: Option<String>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; affects timing only, never values.
    #[arg(long)]
    threads: Option<String>,
}

impl Options {
    fn settings(&self, benchmark: Option<&str>) -> Result<Settings> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        let pairs = [
            ("benchmark", benchmark),
            ("ladder", self.ladder.as_deref()),
            ("N", self.n.as_deref()),
            ("M", self.m.as_deref()),
            ("s", self.s.as_deref()),
            ("R", self.r.as_deref()),
            ("seed", self.seed.as_deref()),
            ("methods", self.methods.as_deref()),
            ("out", self.out.as_deref()),
            ("threads", self.threads.as_deref()),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v)?;
            }
        }
        settings.overlay(&flags);
        Ok(settings)
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let (benchmark, options) = match &cli.command {
        Command::Mvn(o) => (Some(Benchmark::Mvn.name()), o),
        Command::Ode1dUniform(o) => (Some(Benchmark::Ode1dUniform.name()), o),
        Command::Ode1dLognormal(o) => (Some(Benchmark::Ode1dLognormal.name()), o),
        Command::Pde2d(o) => (Some(Benchmark::Pde2d.name()), o),
        Command::AnovaVerify(o) => (Some(Benchmark::AnovaVerify.name()), o),
        Command::Run { benchmark, options } => (benchmark.as_deref(), options),
    };
    let config = ExperimentConfig::from_settings(&options.settings(benchmark)?)?;

    if config.benchmark == Benchmark::AnovaVerify {
        let mut example_n: Vec<usize> = config.triples()?.iter().map(|t| t.n).collect();
        if example_n.is_empty() {
            example_n = DEFAULT_EXAMPLE_N.to_vec();
        }
        let checks = with_threads(config.threads, || verify_anova(&example_n, config.base_seed))??;
        for c in &checks {
            println!("{c}");
        }
        if let Some(path) = &config.out {
            std::fs::write(path, render_checks(&checks)).with_context(|| format!("writing {}", path.display()))?;
        }
        return Ok(checks.iter().all(|c| c.passed));
    }

    let records = with_threads(config.threads, || run(&config))??;
    for r in records.iter().filter(|r| r.is_failed()) {
        eprintln!(
            "{} {} {} failed: {}",
            r.benchmark,
            r.method,
            r.triple,
            r.failure.as_deref().unwrap_or_default()
        );
    }
    match &config.out {
        Some(path) => {
            emit_csv(&records, path)?;
            eprintln!("wrote {} rows to {}", records.len(), path.display());
        }
        None => print!("{}", render_csv(&records)?),
    }
    Ok(records.iter().all(|r| !r.is_failed()))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
