//! Market data primitives: minute bars, metaorders, the volume clock, and
//! the per-day context impact is measured against.
//!
//! All intraday bookkeeping runs in volume time: v(t) is the fraction of the
//! day's traded volume executed up to t, so v = 0 at the open and v = 1 at
//! the close regardless of the wall-clock session length. Prices enter as
//! log-prices rescaled by the day's volatility proxy
//! `sigma_D = (high - low) / open`, which makes impact measurements
//! comparable across days and symbols.

mod clock;
mod csv_io;
mod day;
mod descriptors;
mod filters;

pub use clock::{build_volume_clock, daily_volatility_proxy, VolumeClock};
pub use csv_io::{
    read_metaorders, read_minute_bars, write_metaorders, write_minute_bars, CsvReadError,
    CsvReport, RowIssue,
};
pub use day::{impact_series, DayContext, ImpactSeries};
pub use descriptors::{compute_descriptors, ExecutionDescriptors};
pub use filters::{apply_filters, FilterConfig, FilterReport, FilteredOrder};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Trade direction of a metaorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Buy,
    Sell,
}

impl Sign {
    /// +1 for buys, -1 for sells; the epsilon in impact definitions.
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Buy => 1.0,
            Sign::Sell => -1.0,
        }
    }

    pub fn opposite(self) -> Sign {
        match self {
            Sign::Buy => Sign::Sell,
            Sign::Sell => Sign::Buy,
        }
    }
}

/// One minute of OHLCV data. `time` is the bar's opening minute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinuteBar {
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl MinuteBar {
    pub fn new(
        date: NaiveDate,
        time: NaiveTime,
        open: f64,
        high: f64,
        low: f64,
        close: f64,
        volume: f64,
    ) -> Result<Self, MarketError> {
        let bar = Self {
            date,
            time,
            open,
            high,
            low,
            close,
            volume,
        };
        bar.validate()?;
        Ok(bar)
    }

    fn validate(&self) -> Result<(), MarketError> {
        let fields = [self.open, self.high, self.low, self.close, self.volume];
        if fields.iter().any(|x| !x.is_finite()) {
            return self.invalid("non-finite field");
        }
        if self.open <= 0.0 || self.low <= 0.0 {
            return self.invalid("prices must be positive");
        }
        if self.low > self.open.min(self.close) {
            return self.invalid("low above open/close");
        }
        if self.high < self.open.max(self.close) {
            return self.invalid("high below open/close");
        }
        if self.volume < 0.0 {
            return self.invalid("negative volume");
        }
        Ok(())
    }

    fn invalid(&self, reason: &'static str) -> Result<(), MarketError> {
        Err(MarketError::InvalidBar {
            date: self.date,
            time: self.time,
            reason,
        })
    }
}

/// A metaorder: a sequence of same-direction trades by one participant,
/// summarized by its total volume and execution window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metaorder {
    pub symbol: String,
    pub sign: Sign,
    /// Executed shares; strictly positive.
    pub volume: f64,
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl Metaorder {
    pub fn new(
        symbol: impl Into<String>,
        sign: Sign,
        volume: f64,
        start: NaiveDateTime,
        end: NaiveDateTime,
    ) -> Result<Self, MarketError> {
        if !(volume.is_finite() && volume > 0.0) {
            return Err(MarketError::InvalidOrder {
                reason: "volume must be positive and finite",
            });
        }
        if end <= start {
            return Err(MarketError::InvalidOrder {
                reason: "end must follow start",
            });
        }
        Ok(Self {
            symbol: symbol.into(),
            sign,
            volume,
            start,
            end,
        })
    }

    /// Execution duration in wall-clock minutes.
    pub fn duration_minutes(&self) -> f64 {
        (self.end - self.start).num_seconds() as f64 / 60.0
    }
}

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("invalid bar {date} {time}: {reason}")]
    InvalidBar {
        date: NaiveDate,
        time: NaiveTime,
        reason: &'static str,
    },
    #[error("invalid metaorder: {reason}")]
    InvalidOrder { reason: &'static str },
    #[error("no bars supplied for the day")]
    EmptyDay,
    #[error("bars must be sorted by time without duplicates (offender at {time})")]
    UnsortedBars { time: NaiveTime },
    #[error("bars span multiple dates ({first} and {second})")]
    MixedDates { first: NaiveDate, second: NaiveDate },
    #[error("day {date} traded zero volume")]
    ZeroVolumeDay { date: NaiveDate },
    #[error("day {date} has zero volatility proxy; impact cannot be rescaled")]
    ZeroVolatilityDay { date: NaiveDate },
    #[error("order window [{start}, {end}] saw zero traded volume")]
    ZeroVolumeWindow {
        start: NaiveDateTime,
        end: NaiveDateTime,
    },
    #[error("order dated {order_date} does not belong to day {day_date}")]
    DayMismatch {
        order_date: NaiveDate,
        day_date: NaiveDate,
    },
    #[error("horizon {horizon} lies before the order end v = {v_end}")]
    HorizonBeforeEnd { horizon: f64, v_end: f64 },
}
