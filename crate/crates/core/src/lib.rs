//! Log-scale regime analysis of daily index closes.
//!
//! Fits exponential trends, draws support and resistance envelopes through
//! local extremes, classifies regimes (exponential growth or decline,
//! horizontal channel, squeeze) and segments long histories into epochs by
//! exact penalised changepoint search.

pub mod bounds;
pub mod chart;
pub mod cost;
pub mod error;
pub mod report;
pub mod segment;
pub mod series;
pub mod synthetic;
pub mod trend;

pub use bounds::{
    classify_bounds, decade_level, local_extrema, resistance_line, resistance_through,
    squeeze_apex, support_line, support_through, BoundKind, BoundLine, ChannelKind, DecadeLevel,
};
pub use chart::render_chart;
pub use cost::{segment_cost, PrefixCost};
pub use error::{Error, Result};
pub use report::{analyze, Analysis, AnalysisReport};
pub use segment::{
    brute_force_partition, brute_force_segment, classify_epoch, optimal_partition, segment, Epoch,
    EpochClass, Partition, Penalty, SegmentationParams,
};
pub use series::{parse_csv, DailySeries, IndexRange};
pub use trend::{evaluate_trend, fit_log_linear, project, two_point_alpha, TrendFit};
