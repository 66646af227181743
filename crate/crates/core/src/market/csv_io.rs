//! CSV formats for minute bars and metaorders.
//!
//! Bars: `date,time,open,high,low,close,volume` with ISO dates and HH:MM
//! times. Metaorders: `symbol,sign,volume,start,end` with sign in {+1,-1}
//! and ISO-8601 minute timestamps (2008-03-05T10:30). Readers skip malformed
//! rows with line-numbered diagnostics and abort when more than 10% of the
//! data rows are malformed. Lines starting with `#` are comments, so files
//! stamped with a provenance header read back unchanged.

use std::io;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use thiserror::Error;

use super::{Metaorder, MinuteBar, Sign};

const BAR_HEADER: [&str; 7] = ["date", "time", "open", "high", "low", "close", "volume"];
const ORDER_HEADER: [&str; 5] = ["symbol", "sign", "volume", "start", "end"];
const DATE_FMT: &str = "%Y-%m-%d";
const TIME_FMT: &str = "%H:%M";
const STAMP_FMT: &str = "%Y-%m-%dT%H:%M";
/// Malformed-row fraction above which ingestion aborts.
const MALFORMED_LIMIT: f64 = 0.10;

/// A skipped input row and why it was skipped.
#[derive(Debug, Clone)]
pub struct RowIssue {
    /// 1-based line number in the input (header is line 1).
    pub line: u64,
    pub message: String,
}

/// Parsed rows plus diagnostics for the rows that were dropped.
#[derive(Debug)]
pub struct CsvReport<T> {
    pub rows: Vec<T>,
    pub skipped: Vec<RowIssue>,
}

#[derive(Debug, Error)]
pub enum CsvReadError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}; expected {expected:?}")]
    Header {
        expected: &'static [&'static str],
        found: Vec<String>,
    },
    #[error("{bad} of {total} data rows malformed (> {limit:.0}%); aborting ingestion")]
    TooManyMalformed { bad: usize, total: usize, limit: f64 },
}

fn check_header(
    reader: &mut csv::Reader<impl io::Read>,
    expected: &'static [&'static str],
) -> Result<(), CsvReadError> {
    let found = reader.headers()?;
    if found.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(CsvReadError::Header {
            expected,
            found: found.iter().map(String::from).collect(),
        });
    }
    Ok(())
}

fn enforce_malformed_limit<T>(report: CsvReport<T>) -> Result<CsvReport<T>, CsvReadError> {
    let bad = report.skipped.len();
    let total = bad + report.rows.len();
    if total > 0 && (bad as f64) > MALFORMED_LIMIT * total as f64 {
        return Err(CsvReadError::TooManyMalformed {
            bad,
            total,
            limit: MALFORMED_LIMIT * 100.0,
        });
    }
    Ok(report)
}

pub fn read_minute_bars(input: impl io::Read) -> Result<CsvReport<MinuteBar>, CsvReadError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    check_header(&mut reader, &BAR_HEADER)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match parse_bar(&record) {
            Ok(bar) => rows.push(bar),
            Err(message) => skipped.push(RowIssue { line, message }),
        }
    }
    enforce_malformed_limit(CsvReport { rows, skipped })
}

fn parse_bar(record: &csv::StringRecord) -> Result<MinuteBar, String> {
    if record.len() != BAR_HEADER.len() {
        return Err(format!("expected {} fields, got {}", BAR_HEADER.len(), record.len()));
    }
    let date = NaiveDate::parse_from_str(&record[0], DATE_FMT)
        .map_err(|e| format!("bad date {:?}: {e}", &record[0]))?;
    let time = NaiveTime::parse_from_str(&record[1], TIME_FMT)
        .map_err(|e| format!("bad time {:?}: {e}", &record[1]))?;
    let num = |i: usize, name: &str| -> Result<f64, String> {
        record[i]
            .parse::<f64>()
            .map_err(|e| format!("bad {name} {:?}: {e}", &record[i]))
    };
    MinuteBar::new(
        date,
        time,
        num(2, "open")?,
        num(3, "high")?,
        num(4, "low")?,
        num(5, "close")?,
        num(6, "volume")?,
    )
    .map_err(|e| e.to_string())
}

pub fn write_minute_bars(
    output: impl io::Write,
    bars: &[MinuteBar],
) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(BAR_HEADER)?;
    for bar in bars {
        writer.write_record(&[
            bar.date.format(DATE_FMT).to_string(),
            bar.time.format(TIME_FMT).to_string(),
            format_price(bar.open),
            format_price(bar.high),
            format_price(bar.low),
            format_price(bar.close),
            format_price(bar.volume),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_metaorders(input: impl io::Read) -> Result<CsvReport<Metaorder>, CsvReadError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    check_header(&mut reader, &ORDER_HEADER)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match parse_order(&record) {
            Ok(order) => rows.push(order),
            Err(message) => skipped.push(RowIssue { line, message }),
        }
    }
    enforce_malformed_limit(CsvReport { rows, skipped })
}

fn parse_order(record: &csv::StringRecord) -> Result<Metaorder, String> {
    if record.len() != ORDER_HEADER.len() {
        return Err(format!(
            "expected {} fields, got {}",
            ORDER_HEADER.len(),
            record.len()
        ));
    }
    let sign = match &record[1] {
        "+1" | "1" => Sign::Buy,
        "-1" => Sign::Sell,
        other => return Err(format!("bad sign {other:?}; expected +1 or -1")),
    };
    let volume = record[2]
        .parse::<f64>()
        .map_err(|e| format!("bad volume {:?}: {e}", &record[2]))?;
    let start = NaiveDateTime::parse_from_str(&record[3], STAMP_FMT)
        .map_err(|e| format!("bad start {:?}: {e}", &record[3]))?;
    let end = NaiveDateTime::parse_from_str(&record[4], STAMP_FMT)
        .map_err(|e| format!("bad end {:?}: {e}", &record[4]))?;
    Metaorder::new(record[0].to_string(), sign, volume, start, end).map_err(|e| e.to_string())
}

pub fn write_metaorders(
    output: impl io::Write,
    orders: &[Metaorder],
) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(ORDER_HEADER)?;
    for order in orders {
        writer.write_record(&[
            order.symbol.clone(),
            match order.sign {
                Sign::Buy => "+1".to_string(),
                Sign::Sell => "-1".to_string(),
            },
            format_price(order.volume),
            order.start.format(STAMP_FMT).to_string(),
            order.end.format(STAMP_FMT).to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Shortest representation that round-trips through f64.
fn format_price(x: f64) -> String {
    let mut s = format!("{x}");
    if !s.contains('.') && !s.contains('e') && s.parse::<i64>().is_ok() {
        s.push_str(".0");
    }
    s
}
