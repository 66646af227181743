//! `ingest`: orders plus minute bars in, a filtered dataset of execution
//! descriptors and completion impacts out.
//!
//! Bar files are named `<symbol>-<YYYY-MM-DD>.csv`, one trading day each.
//! Malformed rows are skipped with a warning; a file where more than a
//! tenth of the rows are bad aborts the run (the readers enforce that), as
//! does a bars directory with nothing usable in it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use impactlab::market::{
    apply_filters, impact_series, read_metaorders, read_minute_bars, DayContext, FilterReport,
    FilteredOrder, Metaorder,
};
use impactlab::estimation::order_path;

use crate::commands::DatasetRow;
use crate::config::ExperimentConfig;
use crate::output::Artifacts;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Metaorder CSV (symbol, sign, volume, start, end).
    #[arg(long)]
    pub orders: PathBuf,
    /// Directory of per-day minute bar files.
    #[arg(long)]
    pub bars: PathBuf,
}

/// Day contexts keyed by (symbol, date), the shape `apply_filters` wants.
pub type DayMap = BTreeMap<(String, NaiveDate), DayContext>;

#[derive(Serialize)]
struct IngestReport {
    orders_read: usize,
    order_rows_skipped: usize,
    days_loaded: usize,
    day_files_rejected: usize,
    filters: FilterReport,
    survivors_after_stage: [usize; 4],
}

pub fn run(cfg: &ExperimentConfig, args: &IngestArgs) -> Result<Artifacts> {
    let (orders, order_rows_skipped) = read_orders(&args.orders)?;
    let (days, day_files_rejected) = load_day_contexts(&args.bars)?;
    let (survivors, report) = apply_filters(&orders, &days, &cfg.filters);

    let rows = survivors
        .par_iter()
        .map(|s| dataset_row(s, &days))
        .collect::<Result<Vec<DatasetRow>>>()?;

    let mut artifacts = Artifacts::new(cfg);
    artifacts.csv_table("dataset", &rows)?;
    artifacts.json(
        "filter_report",
        IngestReport {
            orders_read: orders.len(),
            order_rows_skipped,
            days_loaded: days.len(),
            day_files_rejected,
            survivors_after_stage: report.survivors_after_stage(),
            filters: report,
        },
    )?;
    Ok(artifacts)
}

pub fn read_orders(path: &Path) -> Result<(Vec<Metaorder>, usize)> {
    let file =
        fs::File::open(path).with_context(|| format!("opening orders {}", path.display()))?;
    let report =
        read_metaorders(file).with_context(|| format!("reading orders {}", path.display()))?;
    for issue in &report.skipped {
        log::warn!("{}:{}: skipped order row: {}", path.display(), issue.line, issue.message);
    }
    Ok((report.rows, report.skipped.len()))
}

/// Reads every `*.csv` in `dir` as one day of bars. Files that fail to
/// parse or to build a context are rejected with a warning; only an empty
/// result is fatal.
pub fn load_day_contexts(dir: &Path) -> Result<(DayMap, usize)> {
    let mut files = Vec::new();
    let entries =
        fs::read_dir(dir).with_context(|| format!("reading bars directory {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        bail!("no-data: no bar files (*.csv) in {}", dir.display());
    }

    let loaded: Vec<Option<((String, NaiveDate), DayContext)>> = files
        .par_iter()
        .map(|path| match load_day_file(path) {
            Ok(keyed) => Some(keyed),
            Err(err) => {
                log::warn!("{}: rejected: {err:#}", path.display());
                None
            }
        })
        .collect();
    let rejected = loaded.iter().filter(|d| d.is_none()).count();
    let days: BTreeMap<_, _> = loaded.into_iter().flatten().collect();
    if days.is_empty() {
        bail!("no-data: none of the {} bar files in {} were usable", files.len(), dir.display());
    }
    Ok((days, rejected))
}

fn load_day_file(path: &Path) -> Result<((String, NaiveDate), DayContext)> {
    let (symbol, date) = parse_bar_file_name(path)?;
    let file = fs::File::open(path)?;
    let report = read_minute_bars(file)?;
    for issue in &report.skipped {
        log::warn!("{}:{}: skipped bar row: {}", path.display(), issue.line, issue.message);
    }
    let ctx = DayContext::build(symbol.clone(), &report.rows)?;
    if ctx.date != date {
        bail!("file is named {date} but its bars are dated {}", ctx.date);
    }
    Ok(((symbol, date), ctx))
}

fn parse_bar_file_name(path: &Path) -> Result<(String, NaiveDate)> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| anyhow!("bar file name is not valid UTF-8"))?;
    let (symbol, date) = stem
        .rsplit_once('-')
        .and_then(|(head, _)| head.rsplit_once('-'))
        .and_then(|(head, _)| head.rsplit_once('-'))
        .filter(|(symbol, _)| !symbol.is_empty())
        .map(|(symbol, _)| (symbol, &stem[symbol.len() + 1..]))
        .ok_or_else(|| anyhow!("expected <symbol>-<YYYY-MM-DD>.csv, got {stem:?}"))?;
    let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
        .with_context(|| format!("expected <symbol>-<YYYY-MM-DD>.csv, got {stem:?}"))?;
    Ok((symbol.to_string(), date))
}

fn dataset_row(survivor: &FilteredOrder, days: &DayMap) -> Result<DatasetRow> {
    let order = &survivor.order;
    let d = &survivor.descriptors;
    let ctx = &days[&(order.symbol.clone(), order.start.date())];
    let series = impact_series(order, ctx, 1.0)?;
    let impact = order_path(&series, d)
        .value_at(1.0)
        .ok_or_else(|| anyhow!("completion impact unobservable for {} {}", order.symbol, order.start))?;
    Ok(DatasetRow {
        symbol: order.symbol.clone(),
        date: order.start.date(),
        sign: order.sign,
        eta: d.eta,
        duration_f: d.duration,
        daily_fraction: d.daily_fraction,
        v_start: d.v_start,
        v_end: d.v_end,
        impact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bar_file_names_parse_and_reject() {
        let (symbol, date) = parse_bar_file_name(Path::new("bars/SYN-2014-06-02.csv")).unwrap();
        assert_eq!(symbol, "SYN");
        assert_eq!(date, NaiveDate::from_ymd_opt(2014, 6, 2).unwrap());

        // Hyphenated symbols keep everything before the date.
        let (symbol, _) = parse_bar_file_name(Path::new("BRK-B-2014-06-02.csv")).unwrap();
        assert_eq!(symbol, "BRK-B");

        assert!(parse_bar_file_name(Path::new("2014-06-02.csv")).is_err());
        assert!(parse_bar_file_name(Path::new("SYN.csv")).is_err());
        assert!(parse_bar_file_name(Path::new("SYN-2014-13-02.csv")).is_err());
    }
}
