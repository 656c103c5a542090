//! Command-line front end: parses flags, assembles the run configuration,
//! and dispatches to the library commands. All analysis lives in the
//! library; this binary only wires files to functions.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gwdrought::commands::{
    cmd_anomaly, cmd_attribute, cmd_drought, cmd_ndvi_prep, cmd_optimal_period, cmd_oracle,
    cmd_report, cmd_synth, CommandError,
};
use gwdrought::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "gwdrought",
    version,
    about = "Groundwater drought analytics: anomalies, optimal accumulation periods, drought events, vegetation coupling, attribution"
)]
struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Random seed (overrides the config file).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory (overrides the config file).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads; affects speed only, never results.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Extra config overrides, e.g. --set k_max=24 (repeatable; flags win
    /// over the config file).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build storage-anomaly fields and regional series.
    Anomaly,
    /// Sweep precipitation accumulation periods and select the optimum.
    OptimalPeriod,
    /// Detect drought events, areal extent, and period change.
    Drought,
    /// Decompose storage variance onto precipitation and vegetation.
    Attribute,
    /// Prepare vegetation series, strata, and seasonal comparisons.
    NdviPrep,
    /// Generate the bundled synthetic scenario.
    Synth,
    /// Check production operations against brute-force oracles.
    Oracle,
    /// Assemble plot-ready tables and the checksummed manifest.
    Report,
}

fn build_config(cli: &Cli) -> Result<RunConfig, CommandError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path).map_err(|e| match e {
            gwdrought::Error::Io(_) => CommandError::MissingInput(path.display().to_string()),
            other => CommandError::Format(other),
        })?,
        None => RunConfig::default(),
    };
    for pair in &cli.set {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            CommandError::Format(gwdrought::Error::Parse(format!(
                "--set expects KEY=VALUE, got `{pair}`"
            )))
        })?;
        cfg.set(key.trim(), value.trim(), None)
            .map_err(CommandError::Format)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<i32, CommandError> {
    match cli.command {
        Command::Anomaly => report_files(cmd_anomaly(cfg)?),
        Command::OptimalPeriod => report_files(cmd_optimal_period(cfg)?),
        Command::Drought => report_files(cmd_drought(cfg)?),
        Command::Attribute => report_files(cmd_attribute(cfg)?),
        Command::NdviPrep => report_files(cmd_ndvi_prep(cfg)?),
        Command::Synth => report_files(cmd_synth(cfg)?),
        Command::Report => report_files(cmd_report(cfg)?),
        Command::Oracle => {
            let (files, all_pass) = cmd_oracle(cfg)?;
            report_files(files);
            if !all_pass {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn report_files(files: Vec<PathBuf>) {
    for f in files {
        eprintln!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let pool = cli.threads.map(|n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
    });

    let result = (|| {
        let cfg = build_config(&cli)?;
        match &pool {
            Some(pool) => pool.install(|| run(&cli, &cfg)),
            None => run(&cli, &cfg),
        }
    })();

    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
