//! Optimal partition of a series into epochs.
//!
//! The objective is the sum of log-linear segment SSEs plus a fixed penalty
//! per breakpoint, minimised exactly by dynamic programming. Ties go to fewer
//! segments, then to the earliest last breakpoint, then recursively to the
//! earliest breakpoint before it.
//!
//! The objective of a partition is always accumulated left to right as
//! `((c0 + p) + c1 + p) + c2 ...` so that the DP and the exhaustive oracle
//! produce bitwise-identical values.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    classify_bounds, decade_level, hull_line, BoundKind, BoundLine, ChannelKind, DecadeLevel,
    DEFAULT_FLAT_EPS, DEFAULT_TOUCH_TOL, DEFAULT_WINDOW,
};
use crate::cost::PrefixCost;
use crate::error::{Error, Result};
use crate::series::{DailySeries, IndexRange};
use crate::trend::{fit_log_linear, TrendFit};

/// Largest series [`brute_force_segment`] will enumerate.
pub const BRUTE_FORCE_MAX_LEN: usize = 60;
/// Minimum segment length for full-history daily runs.
pub const DEFAULT_MIN_LEN: usize = 250;

// rows below this are scanned serially; above, candidates are split across threads
const PARALLEL_SCAN_MIN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "value")]
pub enum Penalty {
    /// `2 * sigma^2 * ln N`, with `sigma^2` the residual variance of one
    /// log-linear fit over the whole series.
    Auto,
    Manual(f64),
}

impl Penalty {
    pub fn resolve(&self, series: &DailySeries) -> Result<f64> {
        match *self {
            Penalty::Manual(p) => Ok(p),
            Penalty::Auto => {
                let n = series.len();
                if n <= 2 {
                    return Ok(0.0);
                }
                let global = fit_log_linear(series, series.full_range())?;
                let variance = global.sse / (n - 2) as f64;
                Ok(2.0 * variance * (n as f64).ln())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    pub penalty: Penalty,
    /// Minimum segment length in rows.
    pub min_len: usize,
    pub max_segments: Option<usize>,
    /// Local-extremum half-width.
    pub window: usize,
    pub flat_eps: f64,
    pub touch_tol: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            penalty: Penalty::Auto,
            min_len: DEFAULT_MIN_LEN,
            max_segments: None,
            window: DEFAULT_WINDOW,
            flat_eps: DEFAULT_FLAT_EPS,
            touch_tol: DEFAULT_TOUCH_TOL,
        }
    }
}

impl SegmentationParams {
    pub fn with_min_len(mut self, min_len: usize) -> Self {
        self.min_len = min_len;
        self
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_max_segments(mut self, max_segments: Option<usize>) -> Self {
        self.max_segments = max_segments;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.min_len < 3 {
            return bad(format!("min_len must be at least 3, got {}", self.min_len));
        }
        if let Penalty::Manual(p) = self.penalty {
            if !(p >= 0.0 && p.is_finite()) {
                return bad(format!("penalty must be finite and non-negative, got {p}"));
            }
        }
        if self.max_segments == Some(0) {
            return bad("max_segments must be at least 1".into());
        }
        if self.window < 1 {
            return bad("window must be at least 1".into());
        }
        if !(self.flat_eps >= 0.0 && self.flat_eps.is_finite()) {
            return bad(format!("flat_eps must be finite and non-negative, got {}", self.flat_eps));
        }
        if !(self.touch_tol >= 0.0 && self.touch_tol.is_finite()) {
            return bad(format!("touch_tol must be finite and non-negative, got {}", self.touch_tol));
        }
        Ok(())
    }
}

/// Breakpoints of a partition with its penalised objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Start indices of every segment after the first, ascending.
    pub breakpoints: Vec<usize>,
    pub objective: f64,
    pub penalty: f64,
    pub n: usize,
}

impl Partition {
    pub fn segments(&self) -> usize {
        self.breakpoints.len() + 1
    }

    pub fn ranges(&self) -> Vec<IndexRange> {
        let mut edges = Vec::with_capacity(self.breakpoints.len() + 2);
        edges.push(0);
        edges.extend(&self.breakpoints);
        edges.push(self.n);
        edges.windows(2).map(|w| IndexRange::new(w[0], w[1])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpochClass {
    ExponentialGrowth,
    ExponentialDecline,
    HorizontalChannel,
    Squeeze,
}

impl EpochClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExponentialGrowth => "exponential-growth",
            Self::ExponentialDecline => "exponential-decline",
            Self::HorizontalChannel => "horizontal-channel",
            Self::Squeeze => "squeeze",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Self::ExponentialGrowth,
            Self::ExponentialDecline,
            Self::HorizontalChannel,
            Self::Squeeze,
        ]
        .into_iter()
        .find(|c| c.as_str() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub range: IndexRange,
    pub klass: EpochClass,
    pub fit: TrendFit,
    pub support: BoundLine,
    pub resistance: BoundLine,
    pub channel: ChannelKind,
    /// Set for horizontal channels only.
    pub level: Option<DecadeLevel>,
}

/// Regime of one epoch. A squeeze overrides the trend slope.
pub fn classify_epoch(fit: &TrendFit, channel: &ChannelKind, flat_eps: f64) -> EpochClass {
    if matches!(channel, ChannelKind::Squeeze { .. }) {
        EpochClass::Squeeze
    } else if fit.alpha.abs() < flat_eps {
        EpochClass::HorizontalChannel
    } else if fit.alpha >= flat_eps {
        EpochClass::ExponentialGrowth
    } else {
        EpochClass::ExponentialDecline
    }
}

/// Builds the fully annotated epoch for one range (length at least 2).
pub fn build_epoch(
    series: &DailySeries,
    range: IndexRange,
    params: &SegmentationParams,
) -> Result<Epoch> {
    let fit = fit_log_linear(series, range)?;
    let support = hull_line(series, range, BoundKind::Support, params.touch_tol);
    let resistance = hull_line(series, range, BoundKind::Resistance, params.touch_tol);
    let channel = classify_bounds(&support, &resistance, params.flat_eps)?;
    let klass = classify_epoch(&fit, &channel, params.flat_eps);
    let level = match klass {
        EpochClass::HorizontalChannel => Some(decade_level(series, range)?),
        _ => None,
    };
    Ok(Epoch {
        range,
        klass,
        fit,
        support,
        resistance,
        channel,
        level,
    })
}

/// Penalised objective of an explicit breakpoint set.
pub fn partition_objective(costs: &PrefixCost, breakpoints: &[usize], penalty: f64) -> f64 {
    let n = costs.len();
    let mut prev = 0;
    let mut total = None;
    for &b in breakpoints.iter().chain(std::iter::once(&n)) {
        let c = costs.cost(prev, b);
        total = Some(match total {
            None => c,
            Some(acc) => acc + penalty + c,
        });
        prev = b;
    }
    total.expect("at least one segment")
}

fn single_segment(costs: &PrefixCost, penalty: f64) -> Partition {
    Partition {
        breakpoints: vec![],
        objective: costs.cost(0, costs.len()),
        penalty,
        n: costs.len(),
    }
}

/// Best way to end a segment at some row, compared by `(objective, segments, last)`.
#[derive(Debug, Clone, Copy)]
struct Cell {
    objective: f64,
    segments: usize,
    last: usize,
}

impl Cell {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.objective
            .total_cmp(&other.objective)
            .then(self.segments.cmp(&other.segments))
            .then(self.last.cmp(&other.last))
    }

    fn min(self, other: Self) -> Self {
        if other.key_cmp(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

/// Minimum over candidate last breakpoints `lo..=hi` (inclusive), deterministic
/// regardless of how the scan is split.
fn best_candidate(lo: usize, hi: usize, candidate: impl Fn(usize) -> Option<Cell> + Sync) -> Option<Cell> {
    if lo > hi {
        return None;
    }
    let fold = |acc: Option<Cell>, c: Option<Cell>| match (acc, c) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if hi - lo < PARALLEL_SCAN_MIN {
        (lo..=hi).map(&candidate).fold(None, fold)
    } else {
        (lo..=hi)
            .into_par_iter()
            .map(&candidate)
            .reduce(|| None, fold)
    }
}

fn backtrack(cells: &[Option<Cell>], n: usize) -> Vec<usize> {
    let mut bps = Vec::new();
    let mut j = n;
    while let Some(cell) = cells[j] {
        if cell.last == 0 {
            break;
        }
        bps.push(cell.last);
        j = cell.last;
    }
    bps.reverse();
    bps
}

/// Unconstrained number of segments: O(N^2) over end rows.
fn dp_unbounded(costs: &PrefixCost, min_len: usize, penalty: f64) -> Partition {
    let n = costs.len();
    let mut cells: Vec<Option<Cell>> = vec![None; n + 1];
    for j in min_len..=n {
        let whole = Cell {
            objective: costs.cost(0, j),
            segments: 1,
            last: 0,
        };
        let split = if j >= 2 * min_len {
            best_candidate(min_len, j - min_len, |i| {
                cells[i].map(|prev| Cell {
                    objective: prev.objective + penalty + costs.cost(i, j),
                    segments: prev.segments + 1,
                    last: i,
                })
            })
        } else {
            None
        };
        cells[j] = Some(split.map_or(whole, |s| whole.min(s)));
    }
    let best = cells[n].expect("n >= min_len");
    Partition {
        breakpoints: backtrack(&cells, n),
        objective: best.objective,
        penalty,
        n,
    }
}

/// At most `max_segments` segments: one DP layer per segment count.
fn dp_bounded(costs: &PrefixCost, min_len: usize, penalty: f64, max_segments: usize) -> Partition {
    let n = costs.len();
    let layers = max_segments.min(n / min_len);
    // layer k holds the best partition of [0, j) into exactly k + 1 segments
    let mut table: Vec<Vec<Option<Cell>>> = Vec::with_capacity(layers);
    let mut first = vec![None; n + 1];
    for (j, cell) in first.iter_mut().enumerate().skip(min_len) {
        *cell = Some(Cell {
            objective: costs.cost(0, j),
            segments: 1,
            last: 0,
        });
    }
    table.push(first);
    for k in 1..layers {
        let prev = &table[k - 1];
        let mut layer = vec![None; n + 1];
        for (j, slot) in layer.iter_mut().enumerate().skip((k + 1) * min_len) {
            *slot = best_candidate(k * min_len, j - min_len, |i| {
                prev[i].map(|p| Cell {
                    objective: p.objective + penalty + costs.cost(i, j),
                    segments: k + 1,
                    last: i,
                })
            });
        }
        table.push(layer);
    }
    let (k_best, best) = table
        .iter()
        .enumerate()
        .filter_map(|(k, layer)| layer[n].map(|c| (k, c)))
        .reduce(|a, b| if b.1.key_cmp(&a.1) == Ordering::Less { b } else { a })
        .expect("single segment always feasible");
    let mut bps = Vec::with_capacity(k_best);
    let mut j = n;
    for k in (1..=k_best).rev() {
        let cell = table[k][j].expect("backtrack follows feasible cells");
        bps.push(cell.last);
        j = cell.last;
    }
    bps.reverse();
    Partition {
        breakpoints: bps,
        objective: best.objective,
        penalty,
        n,
    }
}

/// Optimal breakpoints by exact dynamic programming.
pub fn optimal_partition(series: &DailySeries, params: &SegmentationParams) -> Result<Partition> {
    params.validate()?;
    let penalty = params.penalty.resolve(series)?;
    let costs = PrefixCost::new(series);
    Ok(partition_with(&costs, params, penalty))
}

pub(crate) fn partition_with(costs: &PrefixCost, params: &SegmentationParams, penalty: f64) -> Partition {
    let n = costs.len();
    if n < 2 * params.min_len || params.max_segments == Some(1) {
        return single_segment(costs, penalty);
    }
    match params.max_segments {
        None => dp_unbounded(costs, params.min_len, penalty),
        Some(k) => dp_bounded(costs, params.min_len, penalty, k),
    }
}

/// Optimal breakpoints by enumerating every admissible partition.
pub fn brute_force_partition(series: &DailySeries, params: &SegmentationParams) -> Result<Partition> {
    params.validate()?;
    let n = series.len();
    if n > BRUTE_FORCE_MAX_LEN {
        return Err(Error::SeriesTooLong {
            len: n,
            max: BRUTE_FORCE_MAX_LEN,
        });
    }
    let penalty = params.penalty.resolve(series)?;
    let costs = PrefixCost::new(series);
    if n < 2 * params.min_len {
        return Ok(single_segment(&costs, penalty));
    }
    let max_segments = params.max_segments.unwrap_or(usize::MAX);

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut current = Vec::new();
    enumerate(n, params.min_len, max_segments, 0, &mut current, &mut |bps| {
        let objective = partition_objective(&costs, bps, penalty);
        let better = match &best {
            None => true,
            Some((obj, prev)) => objective
                .total_cmp(obj)
                .then(bps.len().cmp(&prev.len()))
                .then_with(|| bps.iter().rev().cmp(prev.iter().rev()))
                == Ordering::Less,
        };
        if better {
            best = Some((objective, bps.to_vec()));
        }
    });
    let (objective, breakpoints) = best.expect("single segment always admissible");
    Ok(Partition {
        breakpoints,
        objective,
        penalty,
        n,
    })
}

fn enumerate(
    n: usize,
    min_len: usize,
    max_segments: usize,
    start: usize,
    current: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    // close the partition with one final segment [start, n)
    visit(current);
    if current.len() + 2 > max_segments {
        return;
    }
    for b in start + min_len..=n.saturating_sub(min_len) {
        current.push(b);
        enumerate(n, min_len, max_segments, b, current, visit);
        current.pop();
    }
}

fn epochs_for(series: &DailySeries, partition: &Partition, params: &SegmentationParams) -> Result<Vec<Epoch>> {
    partition
        .ranges()
        .into_iter()
        .map(|r| build_epoch(series, r, params))
        .collect()
}

/// Segments `series` into annotated epochs.
pub fn segment(series: &DailySeries, params: &SegmentationParams) -> Result<Vec<Epoch>> {
    let partition = optimal_partition(series, params)?;
    epochs_for(series, &partition, params)
}

/// Exhaustive-search counterpart of [`segment`], for series up to
/// [`BRUTE_FORCE_MAX_LEN`] rows.
pub fn brute_force_segment(series: &DailySeries, params: &SegmentationParams) -> Result<Vec<Epoch>> {
    let partition = brute_force_partition(series, params)?;
    epochs_for(series, &partition, params)
}
