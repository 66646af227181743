//! The four-stage metaorder filter chain.
//!
//! Orders pass, in sequence: (1) symbol whitelist and day-data availability,
//! (2) execution finishing before the end-of-day cutoff, (3) wall-clock
//! duration strictly above the minimum, (4) participation rate strictly
//! below the cap. Decisions are per-order, so the surviving set does not
//! depend on input order.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};

use super::{compute_descriptors, DayContext, ExecutionDescriptors, Metaorder};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Symbols admitted to the analysis; `None` admits everything.
    pub symbol_whitelist: Option<BTreeSet<String>>,
    /// Orders must finish strictly before this time of day.
    pub latest_end: NaiveTime,
    /// Orders must run strictly longer than this many wall-clock minutes.
    pub min_duration_minutes: f64,
    /// Participation rate must stay strictly below this cap.
    pub max_participation: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            symbol_whitelist: None,
            latest_end: NaiveTime::from_hms_opt(16, 1, 0).unwrap(),
            min_duration_minutes: 2.0,
            max_participation: 0.3,
        }
    }
}

/// An order that passed every stage, with its descriptors attached.
#[derive(Debug, Clone)]
pub struct FilteredOrder {
    pub order: Metaorder,
    pub descriptors: ExecutionDescriptors,
}

/// Per-stage rejection tally. `survivors_after_stage` reproduces the usual
/// "N after filter k" bookkeeping.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub input: usize,
    pub rejected_whitelist: usize,
    pub rejected_no_data: usize,
    pub rejected_end_time: usize,
    pub rejected_duration: usize,
    pub rejected_participation: usize,
    /// Orders whose execution window saw no traded volume (stage 4 cannot
    /// compute a participation rate for them).
    pub rejected_degenerate_window: usize,
    pub survivors: usize,
}

impl FilterReport {
    /// Survivor counts after each of the four stages.
    pub fn survivors_after_stage(&self) -> [usize; 4] {
        let s1 = self.input - self.rejected_whitelist - self.rejected_no_data;
        let s2 = s1 - self.rejected_end_time;
        let s3 = s2 - self.rejected_duration;
        let s4 = s3 - self.rejected_participation - self.rejected_degenerate_window;
        [s1, s2, s3, s4]
    }
}

/// Runs the filter chain over `orders`, resolving each against its
/// (symbol, start date) day context.
pub fn apply_filters(
    orders: &[Metaorder],
    days: &BTreeMap<(String, NaiveDate), DayContext>,
    cfg: &FilterConfig,
) -> (Vec<FilteredOrder>, FilterReport) {
    let mut report = FilterReport {
        input: orders.len(),
        ..FilterReport::default()
    };
    let mut survivors = Vec::new();
    for order in orders {
        // Stage 1: whitelist, then data availability.
        if let Some(wl) = &cfg.symbol_whitelist {
            if !wl.contains(&order.symbol) {
                report.rejected_whitelist += 1;
                continue;
            }
        }
        let key = (order.symbol.clone(), order.start.date());
        let Some(ctx) = days.get(&key) else {
            report.rejected_no_data += 1;
            continue;
        };
        // Stage 2: must finish within the day, before the cutoff.
        if order.end.date() != order.start.date() || order.end.time() >= cfg.latest_end {
            report.rejected_end_time += 1;
            continue;
        }
        // Stage 3: strictly longer than the minimum duration.
        if order.duration_minutes() <= cfg.min_duration_minutes {
            report.rejected_duration += 1;
            continue;
        }
        // Stage 4: participation strictly below the cap.
        let descriptors = match compute_descriptors(order, &ctx.clock) {
            Ok(d) => d,
            Err(_) => {
                report.rejected_degenerate_window += 1;
                continue;
            }
        };
        if descriptors.eta >= cfg.max_participation {
            report.rejected_participation += 1;
            continue;
        }
        survivors.push(FilteredOrder {
            order: order.clone(),
            descriptors,
        });
    }
    report.survivors = survivors.len();
    (survivors, report)
}
