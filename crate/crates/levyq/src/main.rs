use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use levyq::experiments;
use levyq::report::{read_grid, write_grid};
use levyq::{ExperimentConfig, ExperimentReport};

/// Simulation and Lévy-exponent estimation for Lévy-driven storage systems.
#[derive(Parser)]
#[command(name = "levyq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (TOML). Defaults to the canonical
    /// Gamma + inverse Gaussian model.
    #[arg(long, value_name = "PATH", global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long, value_name = "U64", global = true)]
    seed: Option<u64>,
    /// Output CSV; the summary goes next to it as `<stem>.summary.csv`.
    /// Without it the report is written to stdout and the summary to stderr.
    #[arg(long, value_name = "PATH", global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replications (default: all cores).
    #[arg(long, value_name = "K", global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write its grid as `i,t,v`.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate φ at the configured α values from one probe sample.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Read the grid from an `i,t,v` CSV instead of simulating it.
        #[arg(long, value_name = "PATH")]
        grid: Option<PathBuf>,
    },
    /// Track the estimation error along a doubling horizon schedule.
    Consistency {
        #[command(flatten)]
        common: Common,
    },
    /// Confidence-interval coverage over independent replications.
    Coverage {
        #[command(flatten)]
        common: Common,
    },
    /// Dispersion of the resampling estimator for several K and Δ.
    Resample {
        #[command(flatten)]
        common: Common,
    },
    /// Curves on α ∈ [0, 10] for the three standard figure setups.
    Figures {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)
            .with_context(|| format!("invalid config {}", path.display()))?,
        None => ExperimentConfig::canonical(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn emit(common: &Common, report: &ExperimentReport, grid: Option<&levyq_core::GridObservations>) -> Result<()> {
    let write_main = |w: &mut dyn Write| -> Result<()> {
        match grid {
            Some(g) => write_grid(g, w)?,
            None => report.write_rows(w)?,
        }
        Ok(())
    };
    match &common.out {
        Some(out) => {
            let mut w = create(out)?;
            write_main(&mut w)?;
            w.flush()?;
            let mut s = create(&summary_path(out))?;
            report.write_summary(&mut s)?;
            s.flush()?;
        }
        None => {
            write_main(&mut io::stdout().lock())?;
            report.write_summary(io::stderr().lock())?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Simulate { common }
        | Command::Estimate { common, .. }
        | Command::Consistency { common }
        | Command::Coverage { common }
        | Command::Resample { common }
        | Command::Figures { common } => common.clone(),
    };
    if let Some(k) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("cannot start thread pool")?;
    }
    let config = load_config(&common)?;

    match &cli.command {
        Command::Simulate { .. } => {
            let (grid, report) = experiments::simulate(&config)?;
            emit(&common, &report, Some(&grid))
        }
        Command::Estimate { grid, .. } => {
            let observed = match grid {
                Some(path) => {
                    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
                    Some(read_grid(f).with_context(|| format!("invalid grid {}", path.display()))?)
                }
                None => None,
            };
            emit(&common, &experiments::estimate(&config, observed)?, None)
        }
        Command::Consistency { .. } => emit(&common, &experiments::consistency(&config)?, None),
        Command::Coverage { .. } => emit(&common, &experiments::coverage(&config)?, None),
        Command::Resample { .. } => emit(&common, &experiments::resample(&config)?, None),
        Command::Figures { .. } => emit(&common, &experiments::figures(&config)?, None),
    }
}
