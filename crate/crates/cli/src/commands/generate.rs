//! `generate`: a synthetic tape. Writes one bar file per day, the executed
//! orders, and a per-day report.

use anyhow::Result;
use chrono::NaiveDate;
use serde::Serialize;

use impactlab::market::{write_metaorders, write_minute_bars, Sign};
use impactlab::synth::generate_market;

use crate::config::ExperimentConfig;
use crate::output::Artifacts;

#[derive(Serialize)]
struct DayReport {
    date: NaiveDate,
    mood: Sign,
    orders: usize,
    shed: usize,
    sigma: f64,
}

#[derive(Serialize)]
struct GenerateReport {
    days: usize,
    orders: usize,
    shed: usize,
    per_day: Vec<DayReport>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let market = cfg
        .generate
        .to_market(cfg.population.to_config(cfg.seed), &cfg.model);
    let days = generate_market(&market)?;

    let mut artifacts = Artifacts::new(cfg);
    let mut orders = Vec::new();
    let mut per_day = Vec::with_capacity(days.len());
    for day in &days {
        artifacts.stamped_csv(format!("bars/{}-{}", market.symbol, day.date), |buf| {
            write_minute_bars(buf, &day.bars)?;
            Ok(())
        })?;
        per_day.push(DayReport {
            date: day.date,
            mood: day.mood,
            orders: day.orders.len(),
            shed: day.shed.len(),
            sigma: day.sigma,
        });
        orders.extend(day.orders.iter().cloned());
    }
    artifacts.stamped_csv("orders", |buf| {
        write_metaorders(buf, &orders)?;
        Ok(())
    })?;
    artifacts.json(
        "generate_report",
        GenerateReport {
            days: per_day.len(),
            orders: orders.len(),
            shed: per_day.iter().map(|d| d.shed).sum(),
            per_day,
        },
    )?;
    Ok(artifacts)
}
