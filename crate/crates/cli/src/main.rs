//! Experiment runner for the six vertex / ASEP toolkit.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid configuration or a
//! violated precondition (named in the message).

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Outcome;
use config::{resolve, ConfigResult, Resolved};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sixv",
    about = "Stationary stochastic six vertex model and ASEP experiments",
    version
)]
struct Cli {
    /// Config file (INI sections or flat JSON; a manifest.json works too).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base seed (overrides the config key `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Replicate count (overrides `replicates`).
    #[arg(long, global = true)]
    replicates: Option<u64>,

    /// Output directory (overrides `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads, 0 = all cores (overrides `workers`).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample ensembles and write binary dumps.
    Sample { overrides: Vec<String> },
    /// Exact enumeration tables on tiny lattices.
    Oracle { overrides: Vec<String> },
    /// Closed-form equilibrium quantities as JSON.
    Analytics { overrides: Vec<String> },
    /// Closed-form MGF against the exact oracle over a parameter grid.
    MgfCheck { overrides: Vec<String> },
    /// Marginal and independence tests of the stationary family.
    Stationarity { overrides: Vec<String> },
    /// Second-class particle constructions and exit points.
    SecondClass { overrides: Vec<String> },
    /// Tail curve of the centered stationary height.
    HeightTail { overrides: Vec<String> },
    /// Step-data tail against the explicit template.
    StepTail { overrides: Vec<String> },
    /// ASEP current / second-class runs.
    Asep { overrides: Vec<String> },
    /// S6V-to-ASEP degeneration distances.
    Degenerate { overrides: Vec<String> },
    /// Two-point function, exact or Monte Carlo, both routes.
    TwoPoint { overrides: Vec<String> },
}

fn resolve_with_globals(
    cli: &Cli,
    name: &'static str,
    schema: Vec<config::Entry>,
    overrides: &[String],
) -> ConfigResult<Resolved> {
    let mut all = overrides.to_vec();
    if let Some(seed) = cli.seed {
        all.push(format!("seed={seed}"));
    }
    if let Some(replicates) = cli.replicates {
        all.push(format!("replicates={replicates}"));
    }
    if let Some(out) = &cli.out {
        all.push(format!("out={}", out.display()));
    }
    if let Some(workers) = cli.workers {
        all.push(format!("workers={workers}"));
    }
    resolve(name, &schema, cli.config.as_deref(), &all)
}

fn dispatch(cli: &Cli) -> ConfigResult<Outcome> {
    use commands::*;
    match &cli.command {
        Command::Sample { overrides } => {
            run_sample(&resolve_with_globals(cli, "sample", sample_schema(), overrides)?)
        }
        Command::Oracle { overrides } => {
            run_oracle(&resolve_with_globals(cli, "oracle", oracle_schema(), overrides)?)
        }
        Command::Analytics { overrides } => run_analytics(&resolve_with_globals(
            cli,
            "analytics",
            analytics_schema(),
            overrides,
        )?),
        Command::MgfCheck { overrides } => run_mgf_check(&resolve_with_globals(
            cli,
            "mgf-check",
            mgf_check_schema(),
            overrides,
        )?),
        Command::Stationarity { overrides } => run_stationarity(&resolve_with_globals(
            cli,
            "stationarity",
            stationarity_schema(),
            overrides,
        )?),
        Command::SecondClass { overrides } => run_second_class(&resolve_with_globals(
            cli,
            "second-class",
            second_class_schema(),
            overrides,
        )?),
        Command::HeightTail { overrides } => run_height_tail(&resolve_with_globals(
            cli,
            "height-tail",
            height_tail_schema(),
            overrides,
        )?),
        Command::StepTail { overrides } => run_step_tail(&resolve_with_globals(
            cli,
            "step-tail",
            step_tail_schema(),
            overrides,
        )?),
        Command::Asep { overrides } => {
            run_asep(&resolve_with_globals(cli, "asep", asep_schema(), overrides)?)
        }
        Command::Degenerate { overrides } => run_degenerate(&resolve_with_globals(
            cli,
            "degenerate",
            degenerate_schema(),
            overrides,
        )?),
        Command::TwoPoint { overrides } => run_two_point(&resolve_with_globals(
            cli,
            "two-point",
            two_point_schema(),
            overrides,
        )?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Outcome::Pass) => ExitCode::from(0),
        Ok(Outcome::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            ExitCode::from(2)
        }
    }
}
