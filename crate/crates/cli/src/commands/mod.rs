//! One module per subcommand, plus the sample sources the estimation
//! commands share.

pub mod book;
pub mod fit;
pub mod generate;
pub mod ingest;
pub mod overlap;
pub mod paths;
pub mod simulate;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use impactlab::market::Sign;
use impactlab::synth::generate_population;

use crate::config::ExperimentConfig;
use crate::presets::Preset;

/// One filtered order with its measured completion impact; the row format
/// of `dataset.csv`, which `ingest` writes and the fit commands read back.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetRow {
    pub symbol: String,
    pub date: NaiveDate,
    pub sign: Sign,
    pub eta: f64,
    pub duration_f: f64,
    pub daily_fraction: f64,
    pub v_start: f64,
    pub v_end: f64,
    pub impact: f64,
}

/// Where estimation samples come from: a bundled impact law or a dataset
/// produced by `ingest`.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Generate samples from a named impact law.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Read samples from an ingest-produced dataset.csv.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRow>> {
    let file = fs::File::open(path)
        .with_context(|| format!("opening dataset {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        let row: DatasetRow =
            record.with_context(|| format!("reading dataset {}", path.display()))?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("no-data: dataset {} holds no rows", path.display());
    }
    Ok(rows)
}

/// Descriptor draws plus noisy preset evaluations. The noise stream is
/// separated from the population stream so changing the noise level never
/// reshuffles the descriptors.
fn preset_samples(cfg: &ExperimentConfig, preset: Preset) -> Result<Vec<(f64, f64, f64)>> {
    let population = generate_population(&cfg.population.to_config(cfg.seed))?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let samples = population
        .orders
        .iter()
        .map(|o| {
            let y = if preset.is_surface() {
                preset.eval_surface(o.eta, o.duration_f)
            } else {
                preset.eval_curve(o.eta * o.duration_f)
            };
            let noise: f64 = StandardNormal.sample(&mut rng);
            (o.eta, o.duration_f, y + cfg.estimation.generator_noise * noise)
        })
        .collect();
    Ok(samples)
}

/// `(pi, impact)` samples for the one-variable commands.
pub fn curve_samples(cfg: &ExperimentConfig, source: &SourceArgs) -> Result<Vec<(f64, f64)>> {
    match (source.preset, &source.dataset) {
        (Some(preset), None) => {
            if preset.is_surface() {
                bail!("preset {preset:?} is a surface; this command fits curves in pi");
            }
            Ok(preset_samples(cfg, preset)?
                .into_iter()
                .map(|(eta, f, y)| (eta * f, y))
                .collect())
        }
        (None, Some(path)) => Ok(read_dataset(path)?
            .into_iter()
            .map(|r| (r.daily_fraction, r.impact))
            .collect()),
        _ => unreachable!("clap enforces exactly one source"),
    }
}

/// `(eta, f, impact)` samples for the surface commands.
pub fn surface_samples(
    cfg: &ExperimentConfig,
    source: &SourceArgs,
) -> Result<Vec<(f64, f64, f64)>> {
    match (source.preset, &source.dataset) {
        (Some(preset), None) => {
            if !preset.is_surface() {
                bail!("preset {preset:?} is a curve; this command fits surfaces in (eta, f)");
            }
            preset_samples(cfg, preset)
        }
        (None, Some(path)) => Ok(read_dataset(path)?
            .into_iter()
            .map(|r| (r.eta, r.duration_f, r.impact))
            .collect()),
        _ => unreachable!("clap enforces exactly one source"),
    }
}
