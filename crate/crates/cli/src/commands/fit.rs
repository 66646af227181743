//! The estimation commands: `fit-curve`, `fit-surface`, `residuals`, and
//! `local-exponents`. All of them accept either a preset law or an ingest
//! dataset as the sample source.

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use impactlab::estimation::{
    default_init, fit_surface, impact_curve, local_exponent_map, residual_map, weighted_nls,
    FitFamily, FitResult, SurfaceGrid,
};

use crate::commands::{curve_samples, surface_samples, SourceArgs};
use crate::config::ExperimentConfig;
use crate::output::Artifacts;

#[derive(Debug, Args)]
pub struct FitCurveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Equal-count bins along pi.
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Equal-count bins along eta.
    #[arg(long)]
    pub eta_bins: Option<usize>,
    /// Equal-count bins along duration.
    #[arg(long)]
    pub f_bins: Option<usize>,
}

/// Fit summary with the parameter names alongside, so a JSON consumer does
/// not need the family definitions to label the values.
#[derive(Serialize)]
struct FitSummary {
    family: FitFamily,
    param_names: Vec<&'static str>,
    params: Vec<f64>,
    std_errors: Vec<f64>,
    e_rms: f64,
    n_points: usize,
    iterations: usize,
}

impl From<FitResult> for FitSummary {
    fn from(fit: FitResult) -> Self {
        FitSummary {
            family: fit.family,
            param_names: fit.family.param_names().to_vec(),
            params: fit.params,
            std_errors: fit.std_errors,
            e_rms: fit.e_rms,
            n_points: fit.n_points,
            iterations: fit.iterations,
        }
    }
}

/// Sorts ascending by the comparison error so the preferred model is first.
fn summaries(mut fits: Vec<FitResult>) -> Vec<FitSummary> {
    fits.sort_by(|a, b| a.e_rms.total_cmp(&b.e_rms));
    fits.into_iter().map(FitSummary::from).collect()
}

pub fn apply_curve_flags(cfg: &mut ExperimentConfig, args: &FitCurveArgs) {
    if let Some(bins) = args.bins {
        cfg.estimation.curve_bins = bins;
    }
}

pub fn apply_surface_flags(cfg: &mut ExperimentConfig, args: &SurfaceArgs) {
    if let Some(bins) = args.eta_bins {
        cfg.estimation.surface_eta_bins = bins;
    }
    if let Some(bins) = args.f_bins {
        cfg.estimation.surface_f_bins = bins;
    }
}

pub fn run_curve(cfg: &ExperimentConfig, args: &FitCurveArgs) -> Result<Artifacts> {
    let bins = cfg.estimation.curve_bins;
    let samples = curve_samples(cfg, &args.source)?;
    let curve = impact_curve(&samples, bins)?;
    let points = curve.fit_points();

    let mut fits = Vec::new();
    for &family in &cfg.estimation.curve_families {
        if family.is_surface() {
            bail!("estimation.curve_families holds {family:?}, a surface family");
        }
        let init = default_init(family, &points)?;
        let fit = weighted_nls(family, &points, &init)
            .with_context(|| format!("fitting {family:?}"))?;
        fits.push(fit);
    }

    let mut artifacts = Artifacts::new(cfg);
    artifacts.table("curve", &curve.rows)?;
    artifacts.json("fits", summaries(fits))?;
    Ok(artifacts)
}

#[derive(Serialize)]
struct SurfaceRow {
    i: usize,
    j: usize,
    eta_mean: f64,
    f_mean: f64,
    impact_mean: f64,
    impact_se: f64,
    count: usize,
}

fn surface_rows(grid: &SurfaceGrid) -> Vec<SurfaceRow> {
    let mut rows = Vec::new();
    for (i, row) in grid.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(c) = cell {
                rows.push(SurfaceRow {
                    i,
                    j,
                    eta_mean: c.eta_mean,
                    f_mean: c.f_mean,
                    impact_mean: c.impact_mean,
                    impact_se: c.impact_se,
                    count: c.count,
                });
            }
        }
    }
    rows
}

pub fn run_surface(cfg: &ExperimentConfig, args: &SurfaceArgs) -> Result<Artifacts> {
    let (n_eta, n_f) = (cfg.estimation.surface_eta_bins, cfg.estimation.surface_f_bins);
    let samples = surface_samples(cfg, &args.source)?;
    if cfg.estimation.surface_families.is_empty() {
        bail!("estimation.surface_families is empty");
    }

    let mut grid = None;
    let mut fits = Vec::new();
    for &family in &cfg.estimation.surface_families {
        let (g, fit) = fit_surface(&samples, n_eta, n_f, family, None)
            .with_context(|| format!("fitting {family:?}"))?;
        // The grid depends only on the samples, so keeping the first is
        // keeping them all.
        grid.get_or_insert(g);
        fits.push(fit);
    }

    let mut artifacts = Artifacts::new(cfg);
    artifacts.table("surface", &surface_rows(&grid.expect("at least one family fit")))?;
    artifacts.json("fits", summaries(fits))?;
    Ok(artifacts)
}

#[derive(Serialize)]
struct ResidualRow {
    i: usize,
    j: usize,
    eta_mean: f64,
    f_mean: f64,
    impact_mean: f64,
    /// Standardized `(mean - model) / se`; empty when the cell mean carries
    /// no standard error to judge against.
    residual: Option<f64>,
}

pub fn run_residuals(cfg: &ExperimentConfig, args: &SurfaceArgs) -> Result<Artifacts> {
    let (n_eta, n_f) = (cfg.estimation.surface_eta_bins, cfg.estimation.surface_f_bins);
    let samples = surface_samples(cfg, &args.source)?;
    let family = *cfg
        .estimation
        .surface_families
        .first()
        .ok_or_else(|| anyhow::anyhow!("estimation.surface_families is empty"))?;
    let (grid, fit) =
        fit_surface(&samples, n_eta, n_f, family, None).with_context(|| format!("fitting {family:?}"))?;
    let residuals = residual_map(&grid, &fit);

    let mut rows = Vec::new();
    for (i, row) in grid.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(c) = cell {
                rows.push(ResidualRow {
                    i,
                    j,
                    eta_mean: c.eta_mean,
                    f_mean: c.f_mean,
                    impact_mean: c.impact_mean,
                    residual: residuals[i][j],
                });
            }
        }
    }

    let mut artifacts = Artifacts::new(cfg);
    artifacts.table("residuals", &rows)?;
    artifacts.json("fit", FitSummary::from(fit))?;
    Ok(artifacts)
}

#[derive(Serialize)]
struct ExponentRow {
    i: usize,
    j: usize,
    eta_mean: f64,
    f_mean: f64,
    /// Local participation exponent; empty where the window was degenerate.
    delta: Option<f64>,
    /// Local duration exponent.
    gamma1: Option<f64>,
}

pub fn run_local_exponents(cfg: &ExperimentConfig, args: &SurfaceArgs) -> Result<Artifacts> {
    let (n_eta, n_f) = (cfg.estimation.surface_eta_bins, cfg.estimation.surface_f_bins);
    let samples = surface_samples(cfg, &args.source)?;
    let map = local_exponent_map(&samples, n_eta, n_f, cfg.estimation.exponent_window)?;

    let mut rows = Vec::new();
    for (i, row) in map.grid.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(c) = cell {
                rows.push(ExponentRow {
                    i,
                    j,
                    eta_mean: c.eta_mean,
                    f_mean: c.f_mean,
                    delta: map.delta[i][j],
                    gamma1: map.gamma1[i][j],
                });
            }
        }
    }

    let mut artifacts = Artifacts::new(cfg);
    artifacts.table("local_exponents", &rows)?;
    Ok(artifacts)
}
