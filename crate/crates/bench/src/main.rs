use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use drsub_bench::config::{CheckConfig, ExperimentConfig};
use drsub_bench::{checks, init_thread_pool, presets, run_experiment};
use drsub_core::streams::compute_w0_quadratic;

#[derive(Parser)]
#[command(name = "drsub", version, about = "Online DR-submodular maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run this single seed instead of the config's list.
        #[arg(long)]
        seed_override: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the built-in experiments.
    Reproduce {
        #[arg(value_parser = presets::NAMES)]
        experiment: String,
        #[arg(long, requires = "movielens_movies")]
        movielens_ratings: Option<PathBuf>,
        #[arg(long, requires = "movielens_ratings")]
        movielens_movies: Option<PathBuf>,
        #[arg(long)]
        seed_override: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the DR-submodularity, monotonicity, strong DR-submodularity and
    /// smoothness checks on one utility. Exits with status 3 if any fails.
    CheckFunction {
        #[arg(long)]
        config: PathBuf,
    },
    /// Block size threshold for random-order quadratic streams.
    W0 {
        #[arg(long)]
        mu: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        t: usize,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    init_thread_pool()?;
    match cli.command {
        Command::Run {
            config,
            seed_override,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            execute(cfg, seed_override, out)?;
        }
        Command::Reproduce {
            experiment,
            movielens_ratings,
            movielens_movies,
            seed_override,
            out,
        } => {
            let cfg = match (movielens_ratings, movielens_movies) {
                (Some(r), Some(m)) => {
                    if experiment != "exp1" {
                        bail!("MovieLens files only apply to exp1");
                    }
                    presets::exp1_movielens(r, m)?
                }
                _ => presets::preset(&experiment)?,
            };
            execute(cfg, seed_override, out)?;
        }
        Command::CheckFunction { config } => {
            let cfg = CheckConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            let report = checks::check_function(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.holds {
                return Ok(ExitCode::from(3));
            }
        }
        Command::W0 {
            mu,
            l,
            eps,
            delta,
            n,
            t,
        } => {
            println!("{}", compute_w0_quadratic(mu, l, eps, delta, n, t)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn execute(mut cfg: ExperimentConfig, seed_override: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    if let Some(s) = seed_override {
        cfg.seeds = vec![s];
    }
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("drsub-out").join(&cfg.experiment));
    let output = run_experiment(&cfg)?;
    let written = output.write(&dir)?;
    print!("{}", output.summary().table());
    println!("wrote {} files to {}", written.len(), dir.display());
    Ok(())
}
