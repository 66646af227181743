//! `trajectories` and `decay`: averaged within-execution impact paths and
//! renormalized post-completion decay, measured from orders against their
//! bar data.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use impactlab::estimation::{decay_curves, order_path, trajectory_curves, OrderPath};
use impactlab::market::{apply_filters, impact_series, FilteredOrder};

use crate::commands::ingest::{load_day_contexts, read_orders, DayMap};
use crate::config::ExperimentConfig;
use crate::output::Artifacts;

#[derive(Debug, Args)]
pub struct PathsArgs {
    /// Metaorder CSV (symbol, sign, volume, start, end).
    #[arg(long)]
    pub orders: PathBuf,
    /// Directory of per-day minute bar files.
    #[arg(long)]
    pub bars: PathBuf,
}

/// Loads, filters, and rescales each surviving order's impact series,
/// observed out to `horizon_multiple` times its own duration (truncated at
/// the session close like any real observation).
fn load_paths(
    cfg: &ExperimentConfig,
    args: &PathsArgs,
    horizon_multiple: f64,
) -> Result<Vec<OrderPath>> {
    let (orders, _) = read_orders(&args.orders)?;
    let (days, _) = load_day_contexts(&args.bars)?;
    let (survivors, _) = apply_filters(&orders, &days, &cfg.filters);
    survivors
        .par_iter()
        .map(|s| observed_path(s, &days, horizon_multiple))
        .collect()
}

fn observed_path(
    survivor: &FilteredOrder,
    days: &DayMap,
    horizon_multiple: f64,
) -> Result<OrderPath> {
    let order = &survivor.order;
    let d = &survivor.descriptors;
    let ctx = &days[&(order.symbol.clone(), order.start.date())];
    let horizon = d.v_start + d.duration * horizon_multiple;
    let series = impact_series(order, ctx, horizon)
        .with_context(|| format!("impact series for {} {}", order.symbol, order.start))?;
    Ok(order_path(&series, d))
}

#[derive(Serialize)]
struct TrajectoryRow {
    bin: usize,
    eta_mean: f64,
    f_mean: f64,
    orders: usize,
    /// Volume time since the order start, `z * f_mean`.
    x: f64,
    impact: f64,
    se: f64,
}

#[derive(Serialize)]
struct MarkerRow {
    bin: usize,
    eta_mean: f64,
    f_mean: f64,
    orders: usize,
    impact: f64,
    se: f64,
}

pub fn run_trajectories(cfg: &ExperimentConfig, args: &PathsArgs) -> Result<Artifacts> {
    let est = &cfg.estimation;
    let paths = load_paths(cfg, args, 1.0)?;
    let range = (est.trajectory_eta_range[0], est.trajectory_eta_range[1]);
    let curves = trajectory_curves(&paths, range, est.trajectory_f_bins)?;

    let mut rows = Vec::new();
    let mut markers = Vec::new();
    for (bin, curve) in curves.iter().enumerate() {
        for &(x, impact, se) in &curve.points {
            rows.push(TrajectoryRow {
                bin,
                eta_mean: curve.eta_mean,
                f_mean: curve.f_mean,
                orders: curve.orders,
                x,
                impact,
                se,
            });
        }
        markers.push(MarkerRow {
            bin,
            eta_mean: curve.eta_mean,
            f_mean: curve.f_mean,
            orders: curve.orders,
            impact: curve.marker_impact,
            se: curve.marker_se,
        });
    }

    let mut artifacts = Artifacts::new(cfg);
    artifacts.table("trajectories", &rows)?;
    artifacts.table("markers", &markers)?;
    Ok(artifacts)
}

#[derive(Serialize)]
struct DecayRow {
    curve: usize,
    eta_mean: f64,
    f_mean: f64,
    orders: usize,
    excluded: usize,
    /// Time since the order start in units of its duration; 1 is
    /// completion.
    z: f64,
    i_ren: f64,
    se: f64,
    count: usize,
}

pub fn run_decay(cfg: &ExperimentConfig, args: &PathsArgs) -> Result<Artifacts> {
    let est = &cfg.estimation;
    let paths = load_paths(cfg, args, est.horizon_multiple)?;
    let curves = decay_curves(&paths, est.decay_eta_bins, est.decay_f_bins, est.horizon_multiple)?;

    let mut rows = Vec::new();
    for (index, curve) in curves.iter().enumerate() {
        for point in &curve.points {
            rows.push(DecayRow {
                curve: index,
                eta_mean: curve.eta_mean,
                f_mean: curve.f_mean,
                orders: curve.orders,
                excluded: curve.excluded,
                z: point.z,
                i_ren: point.i_ren,
                se: point.se,
                count: point.count,
            });
        }
    }

    let mut artifacts = Artifacts::new(cfg);
    artifacts.table("decay", &rows)?;
    Ok(artifacts)
}
