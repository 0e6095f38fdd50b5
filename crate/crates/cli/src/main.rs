//! `fso-adapt`: parameters, ASE curves, required SNR and Monte Carlo runs
//! for adaptive MQAM over gamma-gamma FSO links with pointing errors.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::{Artifact, Report};
use config::{ConfigError, RunConfig};

const WORKERS_ENV: &str = "FSO_ADAPT_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] fso_adapt::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 3,
            CliError::Config(_) | CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fso-adapt", version, about = "ASE limits of adaptive MQAM over FSO links")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Output file (directory for `reproduce`); stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo realizations per SNR point.
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Worker streams and threads; FSO_ADAPT_WORKERS takes precedence.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Channel and policy parameters.
    Params,
    /// ASE limit, discrete ASE, Monte Carlo estimate and high-SNR asymptote over the SNR grid.
    Ase,
    /// Required SNR for fixed and adaptive MQAM, weak and strong turbulence, with and without pointing errors.
    RequiredSnr {
        /// Comma-separated R/B targets; defaults to `required.targets`.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<f64>,
    },
    /// Monte Carlo ASE and power-constraint audit for both policies.
    Mc,
    /// Write the data behind a table or figure.
    Reproduce { artifact: Artifact },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        cfg.apply_text(&text, &path.display().to_string())?;
    }
    for kv in &cli.set {
        cfg.apply_override(kv)?;
    }
    if let Some(s) = cli.seed {
        cfg.mc_seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.mc_samples = n;
    }
    if let Some(w) = cli.workers {
        cfg.mc_workers = w;
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        cfg.mc_workers = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{WORKERS_ENV}=`{v}` is not a positive integer")))?;
    }
    if let Some(o) = &cli.out {
        cfg.output_path = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    output::emit(text, path).map_err(|source| CliError::Io {
        path: path.map_or("<stdout>".into(), |p| p.display().to_string()),
        source,
    })
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = load_config(&cli)?;
    // Threads only; results depend on the worker streams, not the pool size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.mc_workers)
        .build_global();
    let report: Report = match &cli.command {
        Command::Params => commands::params(&cfg)?,
        Command::Ase => commands::ase(&cfg)?,
        Command::RequiredSnr { targets } => {
            let t = if targets.is_empty() { &cfg.required_targets } else { targets };
            if t.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(CliError::Usage("targets must be positive".into()));
            }
            commands::required_snr(&cfg, t)?
        }
        Command::Mc => commands::mc(&cfg)?,
        Command::Reproduce { artifact } => {
            let report = commands::reproduce(*artifact, &cfg)?;
            let dir = cfg.output_path.clone().unwrap_or_else(|| PathBuf::from("."));
            let base = dir.join(artifact.name());
            write(&report.table.to_csv(), Some(&base.with_extension("csv")))?;
            write(&report.table.to_dat(), Some(&base.with_extension("dat")))?;
            let echo = RunConfig {
                output_path: None,
                ..commands::reproduction_config(&cfg)
            };
            write(&echo.to_text(), Some(&base.with_extension("cfg")))?;
            eprintln!("wrote {0}.csv, {0}.dat and {0}.cfg", base.display());
            return Ok(!report.failed);
        }
    };
    write(&report.table.to_csv(), cfg.output_path.as_deref())?;
    Ok(!report.failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more grid points failed; their cells read NaN");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
