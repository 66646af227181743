//! The volume clock: wall-clock time to traded-volume fraction.

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};

use super::{MarketError, MinuteBar};

/// Monotone map from wall-clock instants to the fraction of the day's volume
/// executed so far. Volume accrues linearly inside each minute bar; the clock
/// is flat across gaps and zero-volume bars.
#[derive(Debug, Clone)]
pub struct VolumeClock {
    date: NaiveDate,
    /// Opening time of each bar, strictly increasing.
    bar_opens: Vec<NaiveTime>,
    /// Cumulative shares at the end of each bar.
    cum_shares: Vec<f64>,
    total_shares: f64,
}

/// Builds the clock from one day of bars (sorted, single date, total > 0).
pub fn build_volume_clock(bars: &[MinuteBar]) -> Result<VolumeClock, MarketError> {
    if bars.is_empty() {
        return Err(MarketError::EmptyDay);
    }
    let date = bars[0].date;
    let mut bar_opens = Vec::with_capacity(bars.len());
    let mut cum_shares = Vec::with_capacity(bars.len());
    let mut cum = 0.0;
    for (i, bar) in bars.iter().enumerate() {
        bar.validate()?;
        if bar.date != date {
            return Err(MarketError::MixedDates {
                first: date,
                second: bar.date,
            });
        }
        if i > 0 && bar.time <= bars[i - 1].time {
            return Err(MarketError::UnsortedBars { time: bar.time });
        }
        cum += bar.volume;
        bar_opens.push(bar.time);
        cum_shares.push(cum);
    }
    if cum <= 0.0 {
        return Err(MarketError::ZeroVolumeDay { date });
    }
    Ok(VolumeClock {
        date,
        bar_opens,
        cum_shares,
        total_shares: cum,
    })
}

impl VolumeClock {
    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn total_shares(&self) -> f64 {
        self.total_shares
    }

    /// Session open: start of the first bar.
    pub fn open_time(&self) -> NaiveTime {
        self.bar_opens[0]
    }

    /// Volume fraction in [0, 1] at instant t. Instants before the day map
    /// to 0, instants after it to 1.
    pub fn volume_time(&self, t: NaiveDateTime) -> f64 {
        self.cumulative_shares(t) / self.total_shares
    }

    /// Cumulative traded shares at instant t, interpolated linearly within
    /// the bar minute containing t.
    pub fn cumulative_shares(&self, t: NaiveDateTime) -> f64 {
        if t.date() < self.date {
            return 0.0;
        }
        if t.date() > self.date {
            return self.total_shares;
        }
        let time = t.time();
        // Rightmost bar opening at or before `time`.
        let idx = match self.bar_opens.partition_point(|open| *open <= time) {
            0 => return 0.0,
            n => n - 1,
        };
        let before = if idx == 0 { 0.0 } else { self.cum_shares[idx - 1] };
        let in_bar = self.cum_shares[idx] - before;
        let elapsed = seconds_into_minute(self.bar_opens[idx], time);
        before + in_bar * (elapsed / 60.0).min(1.0)
    }
}

fn seconds_into_minute(open: NaiveTime, t: NaiveTime) -> f64 {
    let d = t.signed_duration_since(open);
    d.num_seconds() as f64 + f64::from(t.nanosecond()) * 1e-9
}

/// Daily volatility proxy `(max high - min low) / open`, the scale impact is
/// measured in.
pub fn daily_volatility_proxy(bars: &[MinuteBar]) -> Result<f64, MarketError> {
    if bars.is_empty() {
        return Err(MarketError::EmptyDay);
    }
    let date = bars[0].date;
    let mut high = f64::MIN;
    let mut low = f64::MAX;
    for bar in bars {
        bar.validate()?;
        if bar.date != date {
            return Err(MarketError::MixedDates {
                first: date,
                second: bar.date,
            });
        }
        high = high.max(bar.high);
        low = low.min(bar.low);
    }
    Ok((high - low) / bars[0].open)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::NaiveDate;

    pub(crate) fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2008, 3, 5).unwrap()
    }

    pub(crate) fn t(h: u32, m: u32) -> NaiveTime {
        NaiveTime::from_hms_opt(h, m, 0).unwrap()
    }

    fn bar(minute: u32, volume: f64) -> MinuteBar {
        MinuteBar::new(
            day(),
            t(9, 30) + chrono::Duration::minutes(minute as i64),
            100.0,
            100.5,
            99.5,
            100.0,
            volume,
        )
        .unwrap()
    }

    #[test]
    fn cumulative_fractions_follow_volumes() {
        let bars = vec![bar(0, 1.0), bar(1, 1.0), bar(2, 2.0)];
        let clock = build_volume_clock(&bars).unwrap();
        let at = |h, m| clock.volume_time(day().and_time(t(h, m)));
        assert_relative_eq!(at(9, 31), 0.25);
        assert_relative_eq!(at(9, 32), 0.5);
        assert_relative_eq!(at(9, 33), 1.0);
        assert_relative_eq!(at(16, 0), 1.0);
        assert_relative_eq!(at(9, 0), 0.0);
    }

    #[test]
    fn constant_volume_day_puts_midday_near_half() {
        let bars: Vec<_> = (0..390).map(|m| bar(m, 10.0)).collect();
        let clock = build_volume_clock(&bars).unwrap();
        let midday = day().and_time(t(12, 45)); // minute 195 of 390
        assert!((clock.volume_time(midday) - 0.5).abs() <= 0.5 / 390.0 + 1e-12);
    }

    #[test]
    fn interpolates_within_the_minute() {
        let bars = vec![bar(0, 60.0), bar(1, 60.0)];
        let clock = build_volume_clock(&bars).unwrap();
        let half_past = day().and_time(NaiveTime::from_hms_opt(9, 30, 30).unwrap());
        assert_relative_eq!(clock.volume_time(half_past), 0.25);
    }

    #[test]
    fn flat_across_zero_volume_run_and_gaps() {
        // Bars at minutes 0, 1 (zero), 2 (zero), then a gap, then 10.
        let bars = vec![bar(0, 5.0), bar(1, 0.0), bar(2, 0.0), bar(10, 5.0)];
        let clock = build_volume_clock(&bars).unwrap();
        let v = |m: u32| clock.volume_time(day().and_time(t(9, 30 + m)));
        assert_relative_eq!(v(1), 0.5);
        assert_relative_eq!(v(3), 0.5);
        assert_relative_eq!(v(8), 0.5);
        assert_relative_eq!(v(11), 1.0);
        // Monotone over a fine sweep.
        let mut prev = 0.0;
        for sec in (0..=46 * 60).step_by(7) {
            let instant = day().and_time(t(9, 30)) + chrono::Duration::seconds(sec);
            let now = clock.volume_time(instant);
            assert!(now >= prev);
            prev = now;
        }
    }

    #[test]
    fn zero_volume_day_is_rejected() {
        let bars = vec![bar(0, 0.0), bar(1, 0.0)];
        assert!(matches!(
            build_volume_clock(&bars),
            Err(MarketError::ZeroVolumeDay { .. })
        ));
    }

    #[test]
    fn unsorted_bars_are_rejected() {
        let bars = vec![bar(5, 1.0), bar(3, 1.0)];
        assert!(matches!(
            build_volume_clock(&bars),
            Err(MarketError::UnsortedBars { .. })
        ));
    }

    #[test]
    fn volatility_proxy_on_fabricated_day() {
        let mut bars = vec![bar(0, 1.0), bar(1, 1.0)];
        bars[0].high = 102.0;
        bars[1].low = 98.0;
        assert_relative_eq!(daily_volatility_proxy(&bars).unwrap(), 4.0 / 100.0);
    }

    #[test]
    fn constant_price_day_has_zero_proxy() {
        let bars = vec![
            MinuteBar::new(day(), t(9, 30), 100.0, 100.0, 100.0, 100.0, 1.0).unwrap(),
            MinuteBar::new(day(), t(9, 31), 100.0, 100.0, 100.0, 100.0, 1.0).unwrap(),
        ];
        assert_relative_eq!(daily_volatility_proxy(&bars).unwrap(), 0.0);
    }
}
