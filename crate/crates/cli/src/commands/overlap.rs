//! `overlap`: co-activity statistics over a metaorder file, per duration
//! bin of the reference order.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use impactlab::estimation::overlap_stats;

use crate::commands::ingest::read_orders;
use crate::config::ExperimentConfig;
use crate::output::Artifacts;

#[derive(Debug, Args)]
pub struct OverlapArgs {
    /// Metaorder CSV (symbol, sign, volume, start, end).
    #[arg(long)]
    pub orders: PathBuf,
}

pub fn run(cfg: &ExperimentConfig, args: &OverlapArgs) -> Result<Artifacts> {
    let est = &cfg.estimation;
    let (orders, _) = read_orders(&args.orders)?;
    let rows = overlap_stats(&orders, est.overlap_horizon, &est.duration_edges)?;

    let mut artifacts = Artifacts::new(cfg);
    artifacts.table("overlap", &rows)?;
    Ok(artifacts)
}
