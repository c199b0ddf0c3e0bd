//! Command-line driver: parameter sweeps written as CSV, and the
//! acceptance checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod sweep;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use induco_core::validation::DEFAULT_TRIALS;
use induco_core::ExperimentParams;

use commands::{McSettings, Table};
use config::{Config, ConfigError, Overrides};
use sweep::SweepSpec;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "induco",
    version,
    about = "Induced-coherence interferometer simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form predictions.
    Analytic(SweepArgs),
    /// Exact Gaussian moment propagation.
    Engine(SweepArgs),
    /// Truncated Fock-space simulation.
    Oracle {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Photon-number cutoff per mode.
        #[arg(long, default_value_t = 8)]
        cutoff: usize,
    },
    /// Coincidence-counting Monte Carlo.
    Mc {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Independent trials pooled per point and arm.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Delay histograms, one row per gate, arm and point.
        #[arg(long)]
        hist_out: Option<PathBuf>,
        /// Keep the configured efficiencies instead of calibrating them to
        /// the target singles rates.
        #[arg(long)]
        raw_efficiencies: bool,
        /// Gates on each side of the zero-delay gate.
        #[arg(long, default_value_t = 10)]
        half_width: usize,
    },
    /// Run the acceptance checks.
    Validate {
        /// Only the closed-form and moment-engine checks.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `var:start:stop:n[:log]` or `var:v1,v2,...` with var one of
    /// t_mag, v2, gamma_mag, gain.
    #[arg(long)]
    pub sweep: Option<String>,
    #[command(flatten)]
    pub overrides: Overrides,
}

impl SweepArgs {
    /// Config after overrides, and the parameter set of every sweep point.
    pub fn resolve(&self) -> Result<(Config, Vec<ExperimentParams>)> {
        let mut config = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        self.overrides.apply(&mut config)?;
        if let Some(seed) = self.seed {
            config.detection.rng_seed = seed;
        }
        config.experiment = config.experiment.validate()?;
        config.detection = config.detection.validate()?;
        let points = match &self.sweep {
            Some(spec) => SweepSpec::parse(spec)?.points(&config.experiment),
            None => vec![config.experiment],
        };
        Ok((config, points))
    }
}

fn write_table(table: &Table, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            table.write(BufWriter::new(file))
        }
        None => table.write(io::stdout().lock()),
    }
}

/// Exit status for an error: config and range problems, truncation and
/// resource limits, or anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use induco_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Range { .. } | E::UnknownMode(_) | E::ZeroGain | E::Regime(_) => EXIT_CONFIG,
                E::Truncation { .. } | E::Resource { .. } => EXIT_RESOURCE,
                _ => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analytic(args) => {
            let (_, points) = args.resolve()?;
            write_table(&commands::analytic(&points)?, args.out.as_deref())?;
        }
        Command::Engine(args) => {
            let (_, points) = args.resolve()?;
            write_table(&commands::engine(&points)?, args.out.as_deref())?;
        }
        Command::Oracle { sweep, cutoff } => {
            let (_, points) = sweep.resolve()?;
            write_table(&commands::oracle(&points, cutoff)?, sweep.out.as_deref())?;
        }
        Command::Mc {
            sweep,
            trials,
            hist_out,
            raw_efficiencies,
            half_width,
        } => {
            let (config, points) = sweep.resolve()?;
            let settings = McSettings {
                detection: config.detection,
                trials,
                raw_efficiencies,
                half_width,
            };
            let output = commands::monte_carlo(&points, &settings)?;
            write_table(&output.table, sweep.out.as_deref())?;
            if let Some(path) = hist_out {
                write_table(&output.histograms, Some(&path))?;
            }
        }
        Command::Validate {
            quick,
            trials,
            seed,
        } => {
            let results = commands::validate(quick, trials, seed);
            let mut out = io::stdout().lock();
            for r in &results {
                writeln!(out, "{r}")?;
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            writeln!(out, "{} passed, {failed} failed", results.len() - failed)?;
            return Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE });
        }
    }
    Ok(EXIT_OK)
}

/// Parses arguments, runs the command and reports errors on stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
