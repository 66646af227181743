//! Execution descriptors of a metaorder against its day's volume clock.

use serde::{Deserialize, Serialize};

use super::{MarketError, Metaorder, VolumeClock};

/// The three descriptors impact laws are expressed in, plus the volume-time
/// execution window they derive from.
///
/// - `eta`: participation rate, order volume over market volume traded during
///   the execution window;
/// - `duration`: window length in volume time, F = v(end) - v(start);
/// - `daily_fraction`: order volume over the full day's volume, pi = eta * F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutionDescriptors {
    pub eta: f64,
    pub duration: f64,
    pub daily_fraction: f64,
    pub v_start: f64,
    pub v_end: f64,
}

pub fn compute_descriptors(
    order: &Metaorder,
    clock: &VolumeClock,
) -> Result<ExecutionDescriptors, MarketError> {
    if order.start.date() != clock.date() {
        return Err(MarketError::DayMismatch {
            order_date: order.start.date(),
            day_date: clock.date(),
        });
    }
    let shares_start = clock.cumulative_shares(order.start);
    let shares_end = clock.cumulative_shares(order.end);
    let window = shares_end - shares_start;
    if window <= 0.0 {
        return Err(MarketError::ZeroVolumeWindow {
            start: order.start,
            end: order.end,
        });
    }
    let total = clock.total_shares();
    Ok(ExecutionDescriptors {
        eta: order.volume / window,
        duration: window / total,
        daily_fraction: order.volume / total,
        v_start: shares_start / total,
        v_end: shares_end / total,
    })
}
