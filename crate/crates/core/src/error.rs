use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised by the analysis library.
///
/// Every variant is a validation failure of some input; I/O is handled by
/// callers so that the CLI can map it to a distinct exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("missing or invalid header: expected `date,close`, found `{0}`")]
    BadHeader(String),

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("non-numeric close at row {row}: `{value}`")]
    NonNumericClose { row: usize, value: String },

    #[error("non-positive close at row {row}: {value}")]
    NonPositiveClose { row: usize, value: String },

    #[error("non-increasing date at row {row}: {date} does not follow {previous}")]
    NonIncreasingDate {
        row: usize,
        date: NaiveDate,
        previous: NaiveDate,
    },

    #[error("series needs at least 2 rows, found {0}")]
    TooFewRows(usize),

    #[error("series columns differ in length: {dates} dates, {closes} closes")]
    LengthMismatch { dates: usize, closes: usize },

    #[error("date {date} not in series (nearest earlier: {}, nearest later: {})", fmt_opt(.before), fmt_opt(.after))]
    DateNotFound {
        date: NaiveDate,
        before: Option<NaiveDate>,
        after: Option<NaiveDate>,
    },

    #[error("stride must be at least 1")]
    InvalidStride,

    #[error("degenerate interval: t1 equals t2")]
    DegenerateInterval,

    #[error("index values must be positive and finite, got {0}")]
    NonPositiveValue(f64),

    #[error("range [{lo}, {hi}) out of bounds for series of length {len}")]
    RangeOutOfBounds { lo: usize, hi: usize, len: usize },

    #[error("range of length {len} too short, need at least {min}")]
    RangeTooShort { len: usize, min: usize },

    #[error("horizon must be at least 1")]
    InvalidHorizon,

    #[error("bound lines are parallel")]
    ParallelLines,

    #[error("bound lines cover different ranges")]
    MismatchedRanges,

    #[error("anchor point is not on the {0} envelope of the range")]
    AnchorNotOnEnvelope(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("series of length {len} too long for exhaustive search (max {max})")]
    SeriesTooLong { len: usize, max: usize },

    #[error("chart grid {width}x{height} too small (min 40x10)")]
    GridTooSmall { width: usize, height: usize },
}

fn fmt_opt(d: &Option<NaiveDate>) -> String {
    d.map_or_else(|| "none".to_string(), |d| d.to_string())
}

pub type Result<T> = std::result::Result<T, Error>;
