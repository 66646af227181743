//! Minute-bar synthesis: planned orders in, ingestible market days out.
//!
//! Each day's log price superposes the propagator trajectory of every active
//! order (signed, in rescaled units) with Brownian noise in volume time, then
//! exponentiates at `day_sigma` per unit of rescaled move. The first bar's
//! high/low are widened to span `day_sigma * base_price`, so on days whose
//! path stays inside that range the volatility proxy measured downstream
//! equals `day_sigma` exactly and extracted impact curves sit in the same
//! units the model was evaluated in. Days that move more (crowded books,
//! hot noise) let the proxy float up to the realized range instead: impact
//! contaminating the volatility estimate is a feature of real tapes, not a
//! generation failure.

use chrono::{Duration, NaiveDate, NaiveTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_population, PlannedOrder, PopulationConfig, SynthError};
use crate::market::{Metaorder, MinuteBar, Sign};
use crate::models::{alpha_trajectory, vwap_trajectory, PropagatorParams};

pub const MINUTES_PER_DAY: usize = 390;

/// Intraday volume curve; fractions, independent of the day's total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeProfile {
    Flat,
    /// Parabolic smile: the first and last minutes trade about 3.5x the
    /// midday minute.
    UShaped,
}

impl VolumeProfile {
    fn minute_volumes(self, daily_volume: f64) -> Vec<f64> {
        match self {
            VolumeProfile::Flat => {
                vec![daily_volume / MINUTES_PER_DAY as f64; MINUTES_PER_DAY]
            }
            VolumeProfile::UShaped => {
                let mid = (MINUTES_PER_DAY as f64 - 1.0) / 2.0;
                let weights: Vec<f64> = (0..MINUTES_PER_DAY)
                    .map(|m| {
                        let u = (m as f64 - mid) / mid;
                        1.0 + 2.5 * u * u
                    })
                    .collect();
                let total: f64 = weights.iter().sum();
                weights.iter().map(|w| daily_volume * w / total).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketConfig {
    pub population: PopulationConfig,
    /// Propagator exponents used as ground truth for every order.
    pub delta: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Brownian noise per unit volume time, in rescaled log-price units.
    pub noise_scale: f64,
    /// Target daily volatility proxy (high - low) / open.
    pub day_sigma: f64,
    pub base_price: f64,
    pub daily_volume: f64,
    pub volume_profile: VolumeProfile,
    pub symbol: String,
    pub start_date: NaiveDate,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            population: PopulationConfig::default(),
            delta: 0.5,
            gamma: 0.5,
            alpha: 0.0,
            noise_scale: 0.25,
            day_sigma: 0.02,
            base_price: 100.0,
            daily_volume: 1e6,
            volume_profile: VolumeProfile::Flat,
            symbol: "SYN".to_string(),
            start_date: NaiveDate::from_ymd_opt(2014, 6, 2).unwrap(),
        }
    }
}

impl MarketConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        self.population.validate()?;
        PropagatorParams::new(self.delta, self.gamma, self.alpha, 1.0, 1.0)?;
        if !self.noise_scale.is_finite() || self.noise_scale < 0.0 {
            return Err(SynthError::Parameter {
                name: "noise_scale",
                value: self.noise_scale,
                requirement: ">= 0 and finite",
            });
        }
        if !self.day_sigma.is_finite() || self.day_sigma <= 0.0 || self.day_sigma > 1.0 {
            return Err(SynthError::Parameter {
                name: "day_sigma",
                value: self.day_sigma,
                requirement: "in (0, 1]",
            });
        }
        if !self.base_price.is_finite() || self.base_price <= 0.0 {
            return Err(SynthError::Parameter {
                name: "base_price",
                value: self.base_price,
                requirement: "> 0",
            });
        }
        if !self.daily_volume.is_finite() || self.daily_volume <= 0.0 {
            return Err(SynthError::Parameter {
                name: "daily_volume",
                value: self.daily_volume,
                requirement: "> 0",
            });
        }
        if self.symbol.is_empty() {
            return Err(SynthError::Parameter {
                name: "symbol",
                value: 0.0,
                requirement: "non-empty symbol",
            });
        }
        Ok(())
    }

    pub fn date_of(&self, day: usize) -> NaiveDate {
        self.start_date + Duration::days(day as i64)
    }
}

/// One generated day: bars plus the orders that shaped them, in exactly the
/// form the ingestion side consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarketDay {
    pub date: NaiveDate,
    pub mood: Sign,
    pub bars: Vec<MinuteBar>,
    /// Orders that actually traded, in the day's planned-order iteration
    /// order.
    pub orders: Vec<Metaorder>,
    /// Positions (within this day's planned orders) that were shed because
    /// some minute's stacked participation would have passed the whole tape.
    pub shed: Vec<usize>,
    /// Realized volatility proxy; `day_sigma` unless the path outran it.
    pub sigma: f64,
}

struct SnappedOrder {
    sign: Sign,
    shares: f64,
    minute_start: usize,
    minute_end: usize,
    params: PropagatorParams,
    v_start: f64,
}

/// Volume-time grid shared by every day of a market: cumulative shares and
/// fractions at the 391 minute boundaries.
struct MinuteGrid {
    volumes: Vec<f64>,
    cum_shares: Vec<f64>,
    cum_frac: Vec<f64>,
}

impl MinuteGrid {
    fn build(volumes: Vec<f64>) -> Self {
        let mut cum_shares = Vec::with_capacity(MINUTES_PER_DAY + 1);
        cum_shares.push(0.0);
        let mut acc = 0.0;
        for v in &volumes {
            acc += v;
            cum_shares.push(acc);
        }
        // Same left-to-right accumulation and division the volume clock
        // performs, so boundary fractions match it bit for bit.
        let cum_frac = cum_shares.iter().map(|c| c / acc).collect();
        MinuteGrid { volumes, cum_shares, cum_frac }
    }
}

/// Snaps a planned order to minute boundaries: the start moves down to the
/// nearest boundary, the end up to the first boundary covering the planned
/// duration. Participation is preserved exactly; the duration can only grow.
fn snap_order(
    config: &MarketConfig,
    grid: &MinuteGrid,
    order: &PlannedOrder,
) -> Result<SnappedOrder, SynthError> {
    let minute_start = grid.cum_frac.partition_point(|&c| c <= order.v_start) - 1;
    let v_start = grid.cum_frac[minute_start];
    let target = v_start + order.duration_f;
    let minute_end = grid
        .cum_frac
        .partition_point(|&c| c < target)
        .clamp(minute_start + 1, MINUTES_PER_DAY);
    let duration_f = grid.cum_frac[minute_end] - v_start;
    let params = PropagatorParams::new(
        config.delta,
        config.gamma,
        config.alpha,
        order.eta,
        duration_f,
    )?;
    Ok(SnappedOrder {
        sign: order.sign,
        shares: order.eta * (grid.cum_shares[minute_end] - grid.cum_shares[minute_start]),
        minute_start,
        minute_end,
        params,
        v_start,
    })
}

/// Signed model impact of one snapped order at volume time `v`, zero at and
/// before its start.
fn signed_impact(o: &SnappedOrder, v: f64) -> Result<f64, SynthError> {
    if v <= o.v_start {
        return Ok(0.0);
    }
    let z = (v - o.v_start) / o.params.duration_f;
    // The vwap route avoids a hypergeometric evaluation per boundary.
    let impact = if o.params.alpha == 0.0 {
        vwap_trajectory(&o.params, z)?
    } else {
        alpha_trajectory(&o.params, z)?
    };
    Ok(o.sign.as_f64() * impact)
}

fn session_time(minute: usize) -> NaiveTime {
    NaiveTime::from_hms_opt(9, 30, 0).unwrap() + Duration::minutes(minute as i64)
}

/// Builds one market day from explicit orders. `day` picks the date and the
/// noise stream; orders' own `day` fields are ignored.
pub fn synthesize_day(
    config: &MarketConfig,
    day: usize,
    mood: Sign,
    orders: &[PlannedOrder],
) -> Result<SyntheticMarketDay, SynthError> {
    config.validate()?;
    let grid = MinuteGrid::build(config.volume_profile.minute_volumes(config.daily_volume));
    build_day(config, &grid, day, mood, orders)
}

fn build_day(
    config: &MarketConfig,
    grid: &MinuteGrid,
    day: usize,
    mood: Sign,
    orders: &[PlannedOrder],
) -> Result<SyntheticMarketDay, SynthError> {
    let snapped: Vec<SnappedOrder> = orders
        .iter()
        .map(|o| snap_order(config, grid, o))
        .collect::<Result<_, _>>()?;

    // Metaorders trade inside the printed volume, so the rates stacked on
    // any single minute cannot exceed the whole tape. An order that would
    // break that is shed: it arrived at a market with no room for it.
    let mut per_minute = vec![0.0f64; MINUTES_PER_DAY];
    let mut kept: Vec<SnappedOrder> = Vec::with_capacity(snapped.len());
    let mut shed = Vec::new();
    for (i, o) in snapped.into_iter().enumerate() {
        let window = o.minute_start..o.minute_end;
        if per_minute[window.clone()].iter().all(|&p| p + o.params.eta <= 1.0 + 1e-12) {
            for slot in &mut per_minute[window] {
                *slot += o.params.eta;
            }
            kept.push(o);
        } else {
            shed.push(i);
        }
    }
    if !shed.is_empty() {
        log::warn!(
            "day {day}: shed {} of {} planned orders; the tape cannot absorb them",
            shed.len(),
            shed.len() + kept.len()
        );
    }

    let mut impact = vec![0.0f64; MINUTES_PER_DAY + 1];
    for (m, slot) in impact.iter_mut().enumerate() {
        let v = grid.cum_frac[m];
        for o in &kept {
            *slot += signed_impact(o, v)?;
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(config.population.seed);
    // Stream 0 belongs to the population; each day gets its own.
    rng.set_stream(1 + day as u64);
    let mut prices = Vec::with_capacity(MINUTES_PER_DAY + 1);
    let mut w = 0.0;
    for (m, &imp) in impact.iter().enumerate() {
        if m > 0 {
            let dv = grid.cum_frac[m] - grid.cum_frac[m - 1];
            let gauss: f64 = rng.sample(StandardNormal);
            w += dv.sqrt() * gauss;
        }
        let log_move = config.day_sigma * (imp + config.noise_scale * w);
        prices.push(config.base_price * log_move.exp());
    }
    let peak = prices.iter().copied().fold(f64::MIN, f64::max);
    let trough = prices.iter().copied().fold(f64::MAX, f64::min);
    let span = (config.day_sigma * config.base_price).max(peak - trough);
    // Center the widened first bar around the realized range. prices[0] is
    // the base price and peak >= base, so low0 >= trough/2 > 0.
    let low0 = trough - (span - (peak - trough)) / 2.0;
    let high0 = low0 + span;

    let date = config.date_of(day);
    let mut bars = Vec::with_capacity(MINUTES_PER_DAY);
    for m in 0..MINUTES_PER_DAY {
        let (open, close) = (prices[m], prices[m + 1]);
        let (high, low) = if m == 0 {
            (high0, low0)
        } else {
            (open.max(close), open.min(close))
        };
        let bar = MinuteBar::new(date, session_time(m), open, high, low, close, grid.volumes[m])
            .expect("bar prices are positive and bracketed by construction");
        bars.push(bar);
    }
    let orders = kept
        .iter()
        .map(|o| {
            Metaorder::new(
                &config.symbol,
                o.sign,
                o.shares,
                date.and_time(session_time(o.minute_start)),
                date.and_time(session_time(o.minute_end)),
            )
            .expect("snapped windows are non-empty with positive shares")
        })
        .collect();
    Ok(SyntheticMarketDay {
        date,
        mood,
        bars,
        orders,
        shed,
        // The same division the downstream proxy performs.
        sigma: (high0 - low0) / prices[0],
    })
}

/// Generates the whole market: population, then one day at a time (in
/// parallel; every day derives its noise stream from the shared seed, so the
/// output is independent of thread count).
pub fn generate_market(config: &MarketConfig) -> Result<Vec<SyntheticMarketDay>, SynthError> {
    config.validate()?;
    let population = generate_population(&config.population)?;
    let grid = MinuteGrid::build(config.volume_profile.minute_volumes(config.daily_volume));
    let mut by_day: Vec<Vec<PlannedOrder>> = vec![Vec::new(); config.population.days];
    for o in &population.orders {
        by_day[o.day].push(*o);
    }
    (0..config.population.days)
        .into_par_iter()
        .map(|day| build_day(config, &grid, day, population.moods[day], &by_day[day]))
        .collect()
}
