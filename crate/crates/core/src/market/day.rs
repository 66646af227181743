//! Per-day measurement context and impact extraction.

use chrono::NaiveDate;

use super::{build_volume_clock, daily_volatility_proxy, MarketError, Metaorder, MinuteBar,
            VolumeClock};

/// Everything needed to measure impact on one (symbol, day): the volume
/// clock, the volatility proxy, and the rescaled log-price sampled in volume
/// time at bar closes (prepended with the opening price at v = 0).
#[derive(Debug, Clone)]
pub struct DayContext {
    pub symbol: String,
    pub date: NaiveDate,
    pub sigma_d: f64,
    pub clock: VolumeClock,
    /// (v, s) with s = ln(price) / sigma_d, sampled at the open and at each
    /// bar close.
    pub log_price: Vec<(f64, f64)>,
    /// Count of missing minutes between consecutive bars; price over those
    /// gaps is linearly interpolated in volume time by construction.
    pub gaps_filled: usize,
}

impl DayContext {
    /// Builds the context from one day of bars. Days whose volatility proxy
    /// is zero cannot rescale prices and are rejected.
    pub fn build(symbol: impl Into<String>, bars: &[MinuteBar]) -> Result<Self, MarketError> {
        let clock = build_volume_clock(bars)?;
        let sigma_d = daily_volatility_proxy(bars)?;
        if sigma_d <= 0.0 {
            return Err(MarketError::ZeroVolatilityDay { date: clock.date() });
        }
        let total = clock.total_shares();
        let mut log_price = Vec::with_capacity(bars.len() + 1);
        log_price.push((0.0, bars[0].open.ln() / sigma_d));
        let mut cum = 0.0;
        let mut gaps_filled = 0usize;
        for (i, bar) in bars.iter().enumerate() {
            cum += bar.volume;
            log_price.push((cum / total, bar.close.ln() / sigma_d));
            if i > 0 {
                let step = (bar.time - bars[i - 1].time).num_minutes();
                gaps_filled += (step - 1).max(0) as usize;
            }
        }
        Ok(Self {
            symbol: symbol.into(),
            date: clock.date(),
            sigma_d,
            clock,
            log_price,
            gaps_filled,
        })
    }

    /// Rescaled log-price at volume time v, linear between samples. Repeated
    /// v values (zero-volume bars) resolve to the latest sample.
    pub fn log_price_at(&self, v: f64) -> f64 {
        let pts = &self.log_price;
        let n = pts.len();
        let idx = pts.partition_point(|(x, _)| *x <= v);
        if idx == 0 {
            return pts[0].1;
        }
        if idx == n {
            return pts[n - 1].1;
        }
        let (x0, y0) = pts[idx - 1];
        let (x1, y1) = pts[idx];
        if x1 == x0 {
            return y1;
        }
        y0 + (y1 - y0) * (v - x0) / (x1 - x0)
    }
}

/// Signed impact of one order sampled in volume time.
#[derive(Debug, Clone)]
pub struct ImpactSeries {
    pub v_start: f64,
    pub v_end: f64,
    /// (v, epsilon * (s(v) - s(v_start))) from v_start to the horizon,
    /// sampled at the order start and every following bar close.
    pub points: Vec<(f64, f64)>,
}

/// Extracts the impact path of `order` against its day, out to `horizon`
/// (volume time, >= the order's completion; clamped at the day close).
pub fn impact_series(
    order: &Metaorder,
    ctx: &DayContext,
    horizon: f64,
) -> Result<ImpactSeries, MarketError> {
    if order.start.date() != ctx.date {
        return Err(MarketError::DayMismatch {
            order_date: order.start.date(),
            day_date: ctx.date,
        });
    }
    let v_start = ctx.clock.volume_time(order.start);
    let v_end = ctx.clock.volume_time(order.end);
    let horizon = horizon.min(1.0);
    if horizon < v_end {
        return Err(MarketError::HorizonBeforeEnd { horizon, v_end });
    }
    let s0 = ctx.log_price_at(v_start);
    let eps = order.sign.as_f64();
    let mut points = vec![(v_start, 0.0)];
    for &(v, s) in &ctx.log_price {
        if v > v_start && v <= horizon {
            points.push((v, eps * (s - s0)));
        }
    }
    Ok(ImpactSeries {
        v_start,
        v_end,
        points,
    })
}
