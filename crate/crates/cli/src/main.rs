//! `impactlab`: simulate impact models, generate a synthetic tape, and run
//! the estimation pipeline, all from one experiment configuration.
//!
//! Every invocation resolves its configuration the same way: file defaults,
//! then the config file named by `--config`, then flags, which win. The
//! effective configuration is hashed and stamped (with the seed) into every
//! output file, so any artifact can be traced back to the exact run that
//! produced it. A run either writes all of its files or none of them.

mod commands;
mod config;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::book::BookArgs;
use commands::fit::{FitCurveArgs, SurfaceArgs};
use commands::ingest::IngestArgs;
use commands::overlap::OverlapArgs;
use commands::paths::PathsArgs;
use commands::simulate::SimulateArgs;
use config::{Overrides, OutputFormat};

#[derive(Parser)]
#[command(
    name = "impactlab",
    version,
    about = "Market-impact laboratory: model trajectories, synthetic tapes, \
             and the estimation pipeline"
)]
struct Cli {
    /// Experiment configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Experiment seed; wins over the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; wins over the config file.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Table format; wins over the config file. Datasets stay CSV and
    /// reports stay JSON regardless.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model-generated impact trajectories, one file per sweep value.
    Simulate(SimulateArgs),
    /// A synthetic tape: per-day minute bars, orders, and a report.
    Generate,
    /// Filter orders against bar data into an impact dataset.
    Ingest(IngestArgs),
    /// Binned impact curve in pi, with one fit per configured family.
    FitCurve(FitCurveArgs),
    /// Binned impact surface in (eta, f), with fits.
    FitSurface(SurfaceArgs),
    /// Standardized residuals of the leading surface family.
    Residuals(SurfaceArgs),
    /// Local power-law exponents across the (eta, f) surface.
    LocalExponents(SurfaceArgs),
    /// Averaged within-execution impact paths per duration bin.
    Trajectories(PathsArgs),
    /// Renormalized impact decay past completion.
    Decay(PathsArgs),
    /// Order co-activity statistics per duration bin.
    Overlap(OverlapArgs),
    /// Impact-versus-volume curves from latent book profiles.
    BookInvert(BookArgs),
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let overrides = Overrides { seed: cli.seed, out: cli.out.clone(), format: cli.format };
    let mut cfg = config::load(cli.config.as_deref(), &overrides)?;
    // Command flags fold into the config before anything runs, so the
    // stamped hash always describes the effective settings.
    let artifacts = match &cli.command {
        Command::Simulate(args) => {
            commands::simulate::apply_flags(&mut cfg, args);
            commands::simulate::run(&cfg)?
        }
        Command::Generate => commands::generate::run(&cfg)?,
        Command::Ingest(args) => commands::ingest::run(&cfg, args)?,
        Command::FitCurve(args) => {
            commands::fit::apply_curve_flags(&mut cfg, args);
            commands::fit::run_curve(&cfg, args)?
        }
        Command::FitSurface(args) => {
            commands::fit::apply_surface_flags(&mut cfg, args);
            commands::fit::run_surface(&cfg, args)?
        }
        Command::Residuals(args) => {
            commands::fit::apply_surface_flags(&mut cfg, args);
            commands::fit::run_residuals(&cfg, args)?
        }
        Command::LocalExponents(args) => {
            commands::fit::apply_surface_flags(&mut cfg, args);
            commands::fit::run_local_exponents(&cfg, args)?
        }
        Command::Trajectories(args) => commands::paths::run_trajectories(&cfg, args)?,
        Command::Decay(args) => commands::paths::run_decay(&cfg, args)?,
        Command::Overlap(args) => commands::overlap::run(&cfg, args)?,
        Command::BookInvert(args) => {
            commands::book::apply_flags(&mut cfg, args);
            commands::book::run(&cfg)?
        }
    };
    artifacts.flush()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
