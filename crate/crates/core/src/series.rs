//! Daily close series: CSV ingestion, validation, date lookup and resampling.
//!
//! The time variable of every fit in this crate is the trading-day index,
//! i.e. the 0-based row number of the loaded series. Dates are labels only.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HEADER: &str = "date,close";
const DATE_FORMAT: &str = "%Y-%m-%d";

/// Half-open interval `[lo, hi)` of trading-day indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexRange {
    pub lo: usize,
    pub hi: usize,
}

impl IndexRange {
    pub const fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub const fn len(&self) -> usize {
        self.hi.saturating_sub(self.lo)
    }

    pub const fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub const fn contains(&self, t: usize) -> bool {
        self.lo <= t && t < self.hi
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.lo..self.hi
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// Ordered `(date, close)` observations. Row `i` has trading-day index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    label: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl DailySeries {
    /// Builds a validated series.
    ///
    /// Rows reported in errors are 1-based data rows (the header is row 0).
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::LengthMismatch {
                dates: dates.len(),
                closes: closes.len(),
            });
        }
        for (i, &c) in closes.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonNumericClose {
                    row: i + 1,
                    value: c.to_string(),
                });
            }
            if c <= 0.0 {
                return Err(Error::NonPositiveClose {
                    row: i + 1,
                    value: c.to_string(),
                });
            }
        }
        for (i, pair) in dates.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::NonIncreasingDate {
                    row: i + 2,
                    date: pair[1],
                    previous: pair[0],
                });
            }
        }
        if closes.len() < 2 {
            return Err(Error::TooFewRows(closes.len()));
        }
        Ok(Self {
            label: label.into(),
            dates,
            closes,
        })
    }

    /// Consecutive calendar days starting at `start`; handy for synthetic data.
    pub fn from_closes(label: impl Into<String>, start: NaiveDate, closes: Vec<f64>) -> Result<Self> {
        let dates = start.iter_days().take(closes.len()).collect();
        Self::new(label, dates, closes)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    /// Always false: a valid series has at least two rows.
    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn full_range(&self) -> IndexRange {
        IndexRange::new(0, self.len())
    }

    /// Natural log of every close.
    pub fn ln_closes(&self) -> Vec<f64> {
        self.closes.iter().map(|c| c.ln()).collect()
    }

    pub(crate) fn check_range(&self, range: IndexRange, min_len: usize) -> Result<()> {
        if range.lo > range.hi || range.hi > self.len() {
            return Err(Error::RangeOutOfBounds {
                lo: range.lo,
                hi: range.hi,
                len: self.len(),
            });
        }
        if range.len() < min_len {
            return Err(Error::RangeTooShort {
                len: range.len(),
                min: min_len,
            });
        }
        Ok(())
    }

    /// Trading-day index of `date`.
    pub fn index_of_date(&self, date: NaiveDate) -> Result<usize> {
        self.dates
            .binary_search(&date)
            .map_err(|pos| Error::DateNotFound {
                date,
                before: pos.checked_sub(1).map(|i| self.dates[i]),
                after: self.dates.get(pos).copied(),
            })
    }

    /// Keeps rows `0, stride, 2*stride, ...` plus the final row.
    pub fn resample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidStride);
        }
        if stride == 1 {
            return Ok(self.clone());
        }
        let n = self.len();
        let mut keep: Vec<usize> = (0..n).step_by(stride).collect();
        if keep.last() != Some(&(n - 1)) {
            keep.push(n - 1);
        }
        let label = format!(
            "{} (stride {stride} of {n} rows: row t <- original t*{stride}, last <- original {})",
            self.label,
            n - 1
        );
        Ok(Self {
            label,
            dates: keep.iter().map(|&i| self.dates[i]).collect(),
            closes: keep.iter().map(|&i| self.closes[i]).collect(),
        })
    }

    /// Writes the series in the same CSV dialect `parse_csv` reads.
    ///
    /// Closes use the shortest decimal that round-trips to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 24);
        out.push_str(HEADER);
        out.push('\n');
        for (d, c) in self.dates.iter().zip(&self.closes) {
            out.push_str(&format!("{},{}\n", d.format(DATE_FORMAT), c));
        }
        out
    }
}

/// Parses `date,close` CSV bytes into a validated series.
///
/// Accepts LF or CRLF line endings and a trailing newline. No quoting and no
/// thousands separators. The label is left empty.
pub fn parse_csv(raw: &[u8]) -> Result<DailySeries> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::MalformedRow {
        row: 0,
        reason: format!("input is not UTF-8: {e}"),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));

    let header = lines.next().unwrap_or("");
    if header != HEADER {
        return Err(Error::BadHeader(header.to_string()));
    }

    let mut dates = Vec::new();
    let mut closes = Vec::new();
    let mut rows: Vec<&str> = lines.collect();
    // a single trailing newline leaves one empty element
    if rows.last() == Some(&"") {
        rows.pop();
    }
    for (i, line) in rows.into_iter().enumerate() {
        let row = i + 1;
        let mut fields = line.split(',');
        let (Some(date_field), Some(close_field), None) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected 2 fields in `{line}`"),
            });
        };
        let date = parse_date(date_field).ok_or_else(|| Error::MalformedRow {
            row,
            reason: format!("invalid date `{date_field}`"),
        })?;
        let close = parse_close(close_field).ok_or_else(|| Error::NonNumericClose {
            row,
            value: close_field.to_string(),
        })?;
        if close <= 0.0 {
            return Err(Error::NonPositiveClose {
                row,
                value: close_field.to_string(),
            });
        }
        if let Some(&previous) = dates.last() {
            if date <= previous {
                return Err(Error::NonIncreasingDate {
                    row,
                    date,
                    previous,
                });
            }
        }
        dates.push(date);
        closes.push(close);
    }
    DailySeries::new(String::new(), dates, closes)
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    let shape_ok = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !shape_ok {
        return None;
    }
    NaiveDate::parse_from_str(s, DATE_FORMAT).ok()
}

fn parse_close(s: &str) -> Option<f64> {
    // f64::from_str also takes "inf"/"NaN"; only plain decimal literals are valid here
    let plain = !s.is_empty()
        && s
            .bytes()
            .all(|c| c.is_ascii_digit() || matches!(c, b'.' | b'e' | b'E' | b'+' | b'-'));
    if !plain {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}
