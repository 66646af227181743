//! Co-activity of metaorders sharing a symbol and session.
//!
//! Impact measured on one order is contaminated by whoever else trades the
//! same tape at the same time. These statistics quantify the crowding: how
//! many orders intersect a reference order's measurement window, and how
//! their signs split. A same-sign fraction above one half is herding and
//! inflates apparent impact persistence.

use super::EstimationError;
use crate::market::Metaorder;
use serde::Serialize;
use std::collections::BTreeMap;

/// Duration bin edges in minutes; the last edge is a full session.
pub const DEFAULT_DURATION_BINS: [f64; 7] = [0.0, 10.0, 25.0, 50.0, 100.0, 200.0, 390.0];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OverlapRow {
    pub duration_lo: f64,
    pub duration_hi: f64,
    /// Reference orders whose duration falls in this bin.
    pub orders: usize,
    pub mean_overlaps: f64,
    /// Fraction of co-active orders trading the same direction; NaN when
    /// the bin saw no overlaps at all.
    pub same_sign_fraction: f64,
    pub opposite_sign_fraction: f64,
}

/// Counts, for each order, the same-symbol same-day orders whose execution
/// intersects the window from its start to `horizon_multiple` durations
/// later, split by sign. Results are aggregated per duration bin of the
/// reference order; a shared endpoint (one order ending exactly when the
/// window opens) does not count as overlap.
pub fn overlap_stats(
    orders: &[Metaorder],
    horizon_multiple: f64,
    duration_edges: &[f64],
) -> Result<Vec<OverlapRow>, EstimationError> {
    if !horizon_multiple.is_finite() || horizon_multiple <= 0.0 {
        return Err(EstimationError::Parameter {
            name: "horizon_multiple",
            value: horizon_multiple,
            requirement: "> 0",
        });
    }
    if duration_edges.len() < 2 {
        return Err(EstimationError::TooFewValues {
            what: "duration bin edges",
            needed: 2,
            got: duration_edges.len(),
        });
    }
    for w in duration_edges.windows(2) {
        if w[0].is_nan() || w[1].is_nan() || w[1] <= w[0] {
            return Err(EstimationError::Parameter {
                name: "duration_edges",
                value: w[1],
                requirement: "strictly increasing",
            });
        }
    }

    // Times as minutes into the session day, so window arithmetic stays in
    // plain f64.
    let minutes = |t: chrono::NaiveDateTime| {
        (t - t.date().and_hms_opt(0, 0, 0).unwrap()).num_seconds() as f64 / 60.0
    };
    let mut groups: BTreeMap<(&str, chrono::NaiveDate), Vec<usize>> = BTreeMap::new();
    for (i, o) in orders.iter().enumerate() {
        groups
            .entry((o.symbol.as_str(), o.start.date()))
            .or_default()
            .push(i);
    }

    let n_bins = duration_edges.len() - 1;
    let last_edge = duration_edges[n_bins];
    let mut count = vec![0usize; n_bins];
    let mut overlaps = vec![0usize; n_bins];
    let mut same = vec![0usize; n_bins];
    let mut opposite = vec![0usize; n_bins];

    for members in groups.values() {
        let spans: Vec<(f64, f64)> = members
            .iter()
            .map(|&i| (minutes(orders[i].start), minutes(orders[i].end)))
            .collect();
        for (a, &i) in members.iter().enumerate() {
            let (s, e) = spans[a];
            let duration = e - s;
            if duration < duration_edges[0] || duration > last_edge {
                continue;
            }
            let bin = if duration == last_edge {
                n_bins - 1
            } else {
                duration_edges.partition_point(|&edge| edge <= duration) - 1
            };
            count[bin] += 1;
            let window_end = s + horizon_multiple * duration;
            for (b, &j) in members.iter().enumerate() {
                if a == b {
                    continue;
                }
                let (s2, e2) = spans[b];
                if s2 < window_end && e2 > s {
                    overlaps[bin] += 1;
                    if orders[i].sign == orders[j].sign {
                        same[bin] += 1;
                    } else {
                        opposite[bin] += 1;
                    }
                }
            }
        }
    }

    Ok((0..n_bins)
        .map(|b| {
            let total = (same[b] + opposite[b]) as f64;
            OverlapRow {
                duration_lo: duration_edges[b],
                duration_hi: duration_edges[b + 1],
                orders: count[b],
                mean_overlaps: if count[b] > 0 {
                    overlaps[b] as f64 / count[b] as f64
                } else {
                    0.0
                },
                same_sign_fraction: same[b] as f64 / total,
                opposite_sign_fraction: opposite[b] as f64 / total,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Sign;
    use chrono::{NaiveDate, NaiveTime};

    fn order(symbol: &str, sign: Sign, day: u32, start_min: u32, end_min: u32) -> Metaorder {
        let date = NaiveDate::from_ymd_opt(2014, 6, 1 + day).unwrap();
        let open = NaiveTime::from_hms_opt(9, 30, 0).unwrap();
        let t = |m: u32| date.and_time(open) + chrono::Duration::minutes(m as i64);
        Metaorder::new(symbol, sign, 1000.0, t(start_min), t(end_min)).unwrap()
    }

    #[test]
    fn concurrent_orders_see_each_other() {
        let orders = vec![
            order("A", Sign::Buy, 0, 0, 60),
            order("A", Sign::Buy, 0, 30, 90),
            order("A", Sign::Sell, 0, 100, 160),
        ];
        let rows = overlap_stats(&orders, 3.0, &DEFAULT_DURATION_BINS).unwrap();
        // All three orders are 60 minutes long: bin [50, 100). The first
        // two see each other and the late seller ahead of them; the seller
        // sees nobody because both buys end before it starts. 4 overlaps.
        let row = &rows[3];
        assert_eq!(row.orders, 3);
        assert_eq!(row.mean_overlaps * row.orders as f64, 4.0);
        assert_eq!(row.same_sign_fraction, 0.5);
        assert_eq!(row.opposite_sign_fraction, 0.5);
    }

    #[test]
    fn other_symbols_and_days_do_not_overlap() {
        let orders = vec![
            order("A", Sign::Buy, 0, 0, 60),
            order("B", Sign::Buy, 0, 0, 60),
            order("A", Sign::Buy, 1, 0, 60),
        ];
        let rows = overlap_stats(&orders, 3.0, &DEFAULT_DURATION_BINS).unwrap();
        assert!(rows.iter().all(|r| r.mean_overlaps == 0.0));
        assert!(rows[3].same_sign_fraction.is_nan());
    }

    #[test]
    fn touching_endpoints_are_not_overlap() {
        let orders = vec![
            order("A", Sign::Buy, 0, 0, 60),
            // Starts exactly at the end of the first order's window
            // (0 + 1 * 60), and the first ends exactly at its start.
            order("A", Sign::Buy, 0, 60, 120),
        ];
        let rows = overlap_stats(&orders, 1.0, &DEFAULT_DURATION_BINS).unwrap();
        assert!(rows.iter().all(|r| r.mean_overlaps == 0.0));
    }

    #[test]
    fn fractions_split_the_overlaps_exactly() {
        let orders = vec![
            order("A", Sign::Buy, 0, 0, 100),
            order("A", Sign::Buy, 0, 10, 110),
            order("A", Sign::Sell, 0, 20, 120),
        ];
        let rows = overlap_stats(&orders, 3.0, &DEFAULT_DURATION_BINS).unwrap();
        let row = &rows[4];
        assert_eq!(row.orders, 3);
        let sum = row.same_sign_fraction + row.opposite_sign_fraction;
        assert!((sum - 1.0).abs() < 1e-15);
        assert_eq!(row.same_sign_fraction, 2.0 / 6.0);
    }

    #[test]
    fn sampled_population_herds_at_the_configured_rate() {
        use crate::synth::{generate_population, PopulationConfig};

        let config = PopulationConfig {
            n_orders: 20_000,
            days: 25,
            herding_p_same: 0.55,
            seed: 17,
            ..PopulationConfig::default()
        };
        let population = generate_population(&config).unwrap();
        let orders: Vec<Metaorder> = population
            .orders
            .iter()
            .map(|p| {
                // Flat intraday volume: volume time is linear in the clock.
                let start = (p.v_start * 390.0).floor() as u32;
                let end = (((p.v_start + p.duration_f) * 390.0).ceil() as u32)
                    .clamp(start + 1, 390);
                order("SYN", p.sign, p.day as u32, start, end)
            })
            .collect();
        let rows = overlap_stats(&orders, 3.0, &DEFAULT_DURATION_BINS).unwrap();
        let mut checked = 0;
        for row in &rows {
            let pairs = row.mean_overlaps * row.orders as f64;
            if pairs < 2000.0 {
                continue;
            }
            assert!(
                (row.same_sign_fraction - 0.55).abs() < 0.02,
                "bin [{}, {}): fraction {}",
                row.duration_lo,
                row.duration_hi,
                row.same_sign_fraction
            );
            checked += 1;
        }
        assert!(checked >= 3, "only {checked} bins had enough overlaps");
    }
}
