//! Support and resistance lines in `(t, ln close)` space.
//!
//! A bound line is an edge of the lower (support) or upper (resistance)
//! convex hull of the log-price points of a range, extended across the whole
//! range. Among hull edges the one spanning the most trading days wins; ties
//! go to the edge with more touches, then to the earlier edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{DailySeries, IndexRange};
use crate::trend::project_line;

/// Touch tolerance in log space.
pub const DEFAULT_TOUCH_TOL: f64 = 1e-6;
/// Slopes below this magnitude (per trading day) count as flat.
pub const DEFAULT_FLAT_EPS: f64 = 5e-5;
/// Half-width of the local-extremum window, in trading days.
pub const DEFAULT_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Support,
    Resistance,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Support => "support",
            Self::Resistance => "resistance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundLine {
    pub kind: BoundKind,
    /// Slope of `ln close` per trading day.
    pub alpha: f64,
    /// Line value in log space at `range.lo`.
    pub ln_anchor: f64,
    pub touch_indices: Vec<usize>,
    pub range: IndexRange,
}

impl BoundLine {
    pub fn ln_value_at(&self, t: f64) -> f64 {
        self.ln_anchor + self.alpha * (t - self.range.lo as f64)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.ln_value_at(t).exp()
    }

    /// `ln` value of the line at `t = 0`, for use with [`crate::trend`] formulas.
    pub fn ln_intercept(&self) -> f64 {
        self.ln_anchor - self.alpha * self.range.lo as f64
    }

    /// Line values for the `horizon` trading days after the range.
    pub fn project(&self, horizon: usize) -> Result<Vec<(usize, f64)>> {
        project_line(self.alpha, self.ln_intercept(), self.range.hi, horizon)
    }
}

/// Geometry of a support/resistance pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelKind {
    /// Bounds converge forward in time and meet at `apex`.
    Squeeze { apex: f64 },
    HorizontalChannel,
    RisingChannel,
    FallingChannel,
    Diverging,
}

impl ChannelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Squeeze { .. } => "squeeze",
            Self::HorizontalChannel => "horizontal-channel",
            Self::RisingChannel => "rising-channel",
            Self::FallingChannel => "falling-channel",
            Self::Diverging => "diverging",
        }
    }

    pub fn apex(&self) -> Option<f64> {
        match *self {
            Self::Squeeze { apex } => Some(apex),
            _ => None,
        }
    }

    pub fn from_name(name: &str, apex: Option<f64>) -> Option<Self> {
        Some(match name {
            "squeeze" => Self::Squeeze { apex: apex? },
            "horizontal-channel" => Self::HorizontalChannel,
            "rising-channel" => Self::RisingChannel,
            "falling-channel" => Self::FallingChannel,
            "diverging" => Self::Diverging,
            _ => return None,
        })
    }
}

/// Decade level of a range and the mean absolute `log10` deviation from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeLevel {
    pub level: f64,
    pub deviation: f64,
}

/// Local minima and maxima of `range`, by index.
///
/// `i` is a maximum when no close within `w` trading days (clipped to the
/// range) exceeds it and at least one is strictly lower. The range endpoints
/// are never extrema.
pub fn local_extrema(
    series: &DailySeries,
    range: IndexRange,
    w: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if w < 1 {
        return Err(Error::InvalidParams("extrema window must be at least 1".into()));
    }
    series.check_range(range, 2 * w + 1)?;
    let c = series.closes();
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for i in range.lo + 1..range.hi - 1 {
        let window = &c[i.saturating_sub(w).max(range.lo)..(i + w + 1).min(range.hi)];
        let (mut is_max, mut is_min) = (true, true);
        let (mut above_some, mut below_some) = (false, false);
        for &v in window {
            is_max &= c[i] >= v;
            is_min &= c[i] <= v;
            above_some |= c[i] > v;
            below_some |= c[i] < v;
        }
        if is_max && above_some {
            maxima.push(i);
        }
        if is_min && below_some {
            minima.push(i);
        }
    }
    Ok((minima, maxima))
}

/// Lower envelope line of `ln close` over `range` (length at least 3).
pub fn support_line(series: &DailySeries, range: IndexRange, touch_tol: f64) -> Result<BoundLine> {
    series.check_range(range, 3)?;
    Ok(hull_line(series, range, BoundKind::Support, touch_tol))
}

/// Upper envelope line of `ln close` over `range` (length at least 3).
pub fn resistance_line(
    series: &DailySeries,
    range: IndexRange,
    touch_tol: f64,
) -> Result<BoundLine> {
    series.check_range(range, 3)?;
    Ok(hull_line(series, range, BoundKind::Resistance, touch_tol))
}

/// Log values oriented so that the requested bound is always an upper one.
fn oriented_ln(series: &DailySeries, range: IndexRange, kind: BoundKind) -> Vec<f64> {
    let sign = match kind {
        BoundKind::Resistance => 1.0,
        BoundKind::Support => -1.0,
    };
    series.closes()[range.lo..range.hi]
        .iter()
        .map(|c| sign * c.ln())
        .collect()
}

fn finish_line(
    kind: BoundKind,
    range: IndexRange,
    ys: &[f64],
    alpha: f64,
    anchor: f64,
    touch_tol: f64,
) -> BoundLine {
    let touch_indices = touches(ys, alpha, anchor, touch_tol)
        .into_iter()
        .map(|k| range.lo + k)
        .collect();
    let sign = if kind == BoundKind::Support { -1.0 } else { 1.0 };
    BoundLine {
        kind,
        alpha: sign * alpha,
        ln_anchor: sign * anchor,
        touch_indices,
        range,
    }
}

/// Works for ranges of length 2 as well; callers enforce public minimums.
pub(crate) fn hull_line(
    series: &DailySeries,
    range: IndexRange,
    kind: BoundKind,
    touch_tol: f64,
) -> BoundLine {
    let ys = oriented_ln(series, range, kind);
    let hull = upper_hull(&ys);
    let mut best: Option<(usize, usize, f64, f64)> = None; // (span, touches, alpha, anchor)
    for pair in hull.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let span = b - a;
        if best.is_some_and(|(s, ..)| span < s) {
            continue;
        }
        let alpha = (ys[b] - ys[a]) / span as f64;
        let anchor = ys[a] - alpha * a as f64;
        let n_touch = touches(&ys, alpha, anchor, touch_tol).len();
        let better = match best {
            None => true,
            Some((s, t, ..)) => span > s || n_touch > t,
        };
        if better {
            best = Some((span, n_touch, alpha, anchor));
        }
    }
    let (_, _, alpha, anchor) = best.expect("hull of two or more points has an edge");
    finish_line(kind, range, &ys, alpha, anchor, touch_tol)
}

/// Indices of the upper convex hull of `(k, ys[k])`, left to right.
///
/// Collinear interior points are dropped so each edge is maximal.
fn upper_hull(ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(ys.len());
    for k in 0..ys.len() {
        while let [.., o, a] = hull[..] {
            let cross = (a - o) as f64 * (ys[k] - ys[o]) - (ys[a] - ys[o]) * (k - o) as f64;
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

fn touches(ys: &[f64], alpha: f64, anchor: f64, tol: f64) -> Vec<usize> {
    ys.iter()
        .enumerate()
        .filter(|&(k, y)| (anchor + alpha * k as f64 - y).abs() <= tol)
        .map(|(k, _)| k)
        .collect()
}

/// Resistance line forced through `(t_anchor, value)`.
///
/// The slope is the smallest one that keeps every later point of the range on
/// or below the line; with no later points, the largest one that does so for
/// earlier points. Fails when no line through the anchor bounds the range.
pub fn resistance_through(
    series: &DailySeries,
    range: IndexRange,
    t_anchor: f64,
    value: f64,
    touch_tol: f64,
) -> Result<BoundLine> {
    anchored_line(series, range, t_anchor, value, BoundKind::Resistance, touch_tol)
}

/// Support line forced through `(t_anchor, value)`; dual of [`resistance_through`].
pub fn support_through(
    series: &DailySeries,
    range: IndexRange,
    t_anchor: f64,
    value: f64,
    touch_tol: f64,
) -> Result<BoundLine> {
    anchored_line(series, range, t_anchor, value, BoundKind::Support, touch_tol)
}

fn anchored_line(
    series: &DailySeries,
    range: IndexRange,
    t_anchor: f64,
    value: f64,
    kind: BoundKind,
    touch_tol: f64,
) -> Result<BoundLine> {
    series.check_range(range, 3)?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::NonPositiveValue(value));
    }
    let sign = if kind == BoundKind::Support { -1.0 } else { 1.0 };
    let ys = oriented_ln(series, range, kind);
    let u_p = t_anchor - range.lo as f64;
    let y_p = sign * value.ln();

    let mut min_slope = f64::NEG_INFINITY;
    let mut max_slope = f64::INFINITY;
    for (k, &y) in ys.iter().enumerate() {
        let du = k as f64 - u_p;
        let s = (y - y_p) / du;
        if du > 0.0 {
            min_slope = min_slope.max(s);
        } else if du < 0.0 {
            max_slope = max_slope.min(s);
        }
    }
    let alpha = if min_slope.is_finite() { min_slope } else { max_slope };
    let anchor = y_p - alpha * u_p;
    let envelope_ok = ys
        .iter()
        .enumerate()
        .all(|(k, &y)| y <= anchor + alpha * k as f64 + touch_tol);
    if !envelope_ok {
        return Err(Error::AnchorNotOnEnvelope(kind.as_str()));
    }
    Ok(finish_line(kind, range, &ys, alpha, anchor, touch_tol))
}

/// Index at which the two lines intersect in log space.
pub fn squeeze_apex(support: &BoundLine, resistance: &BoundLine) -> Result<f64> {
    let closing_rate = support.alpha - resistance.alpha;
    if closing_rate == 0.0 {
        return Err(Error::ParallelLines);
    }
    let gap_at_zero = resistance.ln_intercept() - support.ln_intercept();
    Ok(gap_at_zero / closing_rate)
}

/// Classifies a bound pair; the squeeze test takes precedence.
pub fn classify_bounds(
    support: &BoundLine,
    resistance: &BoundLine,
    flat_eps: f64,
) -> Result<ChannelKind> {
    if support.range != resistance.range {
        return Err(Error::MismatchedRanges);
    }
    let (s, r) = (support.alpha, resistance.alpha);
    Ok(if s - r > flat_eps {
        ChannelKind::Squeeze {
            apex: squeeze_apex(support, resistance)?,
        }
    } else if s.abs() < flat_eps && r.abs() < flat_eps {
        ChannelKind::HorizontalChannel
    } else if s > flat_eps && r > flat_eps {
        ChannelKind::RisingChannel
    } else if s < -flat_eps && r < -flat_eps {
        ChannelKind::FallingChannel
    } else {
        ChannelKind::Diverging
    })
}

/// Nearest power of ten to the geometric mean of the closes in `range`.
pub fn decade_level(series: &DailySeries, range: IndexRange) -> Result<DecadeLevel> {
    series.check_range(range, 1)?;
    let logs: Vec<f64> = series.closes()[range.lo..range.hi]
        .iter()
        .map(|c| c.log10())
        .collect();
    let n = logs.len() as f64;
    let exponent = (logs.iter().sum::<f64>() / n).round();
    let deviation = logs.iter().map(|l| (l - exponent).abs()).sum::<f64>() / n;
    Ok(DecadeLevel {
        level: 10f64.powi(exponent as i32),
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(closes: Vec<f64>) -> DailySeries {
        DailySeries::from_closes("b", NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(), closes).unwrap()
    }

    fn from_ln(ln: &[f64]) -> DailySeries {
        series(ln.iter().map(|y| y.exp()).collect())
    }

    fn line(kind: BoundKind, alpha: f64, ln_anchor: f64, range: IndexRange) -> BoundLine {
        BoundLine {
            kind,
            alpha,
            ln_anchor,
            touch_indices: vec![],
            range,
        }
    }

    #[test]
    fn extrema_examples() {
        let s = series(vec![1.0, 2.0, 3.0, 2.0, 1.0]);
        assert_eq!(local_extrema(&s, s.full_range(), 1).unwrap(), (vec![], vec![2]));
        let s = series(vec![3.0, 1.0, 2.0, 1.0, 3.0]);
        assert_eq!(local_extrema(&s, s.full_range(), 1).unwrap(), (vec![1, 3], vec![2]));
        let s = series((1..=30).map(f64::from).collect());
        assert_eq!(local_extrema(&s, s.full_range(), 3).unwrap(), (vec![], vec![]));
    }

    #[test]
    fn extrema_plateau_and_errors() {
        // a flat top of equal values: each is >= all neighbours, and strictly above one
        let s = series(vec![1.0, 2.0, 2.0, 1.0, 1.5]);
        assert_eq!(local_extrema(&s, s.full_range(), 1).unwrap(), (vec![3], vec![1, 2]));
        let s = series(vec![1.0; 5]);
        assert_eq!(local_extrema(&s, s.full_range(), 2).unwrap(), (vec![], vec![]));
        assert!(matches!(
            local_extrema(&s, s.full_range(), 3),
            Err(Error::RangeTooShort { len: 5, min: 7 })
        ));
        assert!(local_extrema(&s, s.full_range(), 0).is_err());
    }

    #[test]
    fn flat_envelopes() {
        let s = from_ln(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        let sup = support_line(&s, s.full_range(), DEFAULT_TOUCH_TOL).unwrap();
        assert!(sup.alpha.abs() < 1e-15);
        assert_eq!(sup.touch_indices, vec![0, 2, 4]);

        let s = from_ln(&[1.0, 0.0, 1.0, 0.0, 1.0]);
        let res = resistance_line(&s, s.full_range(), DEFAULT_TOUCH_TOL).unwrap();
        assert!(res.alpha.abs() < 1e-15);
        assert_eq!(res.touch_indices, vec![0, 2, 4]);
        assert_eq!(res.kind, BoundKind::Resistance);
    }

    #[test]
    fn collinear_series_touches_everywhere() {
        let s = series((0..40).map(|t| 50.0 * (0.002 * t as f64).exp()).collect());
        let fit = crate::trend::fit_log_linear(&s, s.full_range()).unwrap();
        let sup = support_line(&s, s.full_range(), DEFAULT_TOUCH_TOL).unwrap();
        let res = resistance_line(&s, s.full_range(), DEFAULT_TOUCH_TOL).unwrap();
        for b in [&sup, &res] {
            assert!((b.alpha - fit.alpha).abs() < 1e-12);
            assert_eq!(b.touch_indices, (0..40).collect::<Vec<_>>());
        }
    }

    #[test]
    fn longest_hull_edge_through_known_points() {
        // lower hull: (946, 92.92) -> (3380, 41.22) is the longest edge
        let mut closes = vec![200.0; 3500];
        closes[0] = 150.0;
        closes[946] = 92.92;
        closes[3380] = 41.22;
        closes[3499] = 60.0;
        let s = series(closes);
        let sup = support_line(&s, s.full_range(), DEFAULT_TOUCH_TOL).unwrap();
        assert!((sup.alpha - (-3.339422072472864e-4)).abs() < 1e-12);
        assert!((sup.alpha - (-3.3395e-4)).abs() < 1e-7);
        assert_eq!(sup.touch_indices, vec![946, 3380]);
        assert!((sup.value_at(946.0) - 92.92).abs() < 1e-9);
    }

    #[test]
    fn tie_on_span_prefers_more_touches_then_earlier() {
        // edges 0-4 and 4-8 both span 4; the second passes through a third point
        let s = from_ln(&[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.5, 1.0, 1.0]);
        let sup = support_line(&s, s.full_range(), DEFAULT_TOUCH_TOL).unwrap();
        assert_eq!(sup.touch_indices, vec![4, 6, 8]);
        assert!((sup.alpha - 0.25).abs() < 1e-15);
        let s = from_ln(&[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        let sup = support_line(&s, s.full_range(), DEFAULT_TOUCH_TOL).unwrap();
        assert_eq!(sup.touch_indices, vec![0, 4, 8]);
        let s = from_ln(&[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.5]);
        let sup = support_line(&s, s.full_range(), DEFAULT_TOUCH_TOL).unwrap();
        assert_eq!(sup.touch_indices, vec![0, 4]);
        assert_eq!(sup.alpha, 0.0);
    }

    #[test]
    fn bound_range_errors() {
        let s = series(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            support_line(&s, IndexRange::new(0, 2), DEFAULT_TOUCH_TOL),
            Err(Error::RangeTooShort { .. })
        ));
    }

    #[test]
    fn anchored_resistance_passes_through_anchor() {
        // peak of 14160 at index 5, lower afterwards
        let closes = vec![12000.0, 12500.0, 13100.0, 13600.0, 13900.0, 14160.0, 13000.0, 12200.0, 13500.0, 11800.0];
        let s = series(closes);
        let res = resistance_through(&s, s.full_range(), 5.0, 14160.0, DEFAULT_TOUCH_TOL).unwrap();
        assert!((res.value_at(5.0) - 14160.0).abs() < 1e-8);
        assert!(res.touch_indices.contains(&5));
        assert!(res.touch_indices.len() >= 2);
        for (t, c) in s.closes().iter().enumerate() {
            assert!(c.ln() <= res.ln_value_at(t as f64) + DEFAULT_TOUCH_TOL);
        }
        // a point inside the cloud cannot anchor a resistance
        assert_eq!(
            resistance_through(&s, s.full_range(), 6.0, 13000.0, DEFAULT_TOUCH_TOL),
            Err(Error::AnchorNotOnEnvelope("resistance"))
        );
        let sup = support_through(&s, s.full_range(), 9.0, 11800.0, DEFAULT_TOUCH_TOL).unwrap();
        assert!((sup.value_at(9.0) - 11800.0).abs() < 1e-8);
    }

    #[test]
    fn squeeze_classification_and_apex() {
        let r = IndexRange::new(0, 100);
        let sup = line(BoundKind::Support, 1e-3, 0.0, r);
        let res = line(BoundKind::Resistance, -1e-3, 1.0, r);
        assert!((squeeze_apex(&sup, &res).unwrap() - 500.0).abs() < 1e-9);

        let sup = line(BoundKind::Support, 1e-4, 0.0, r);
        let res = line(BoundKind::Resistance, -1e-4, 0.1, r);
        let kind = classify_bounds(&sup, &res, DEFAULT_FLAT_EPS).unwrap();
        assert_eq!(kind.as_str(), "squeeze");
        assert!((kind.apex().unwrap() - 500.0).abs() < 1e-9);
        assert!((sup.ln_value_at(500.0) - res.ln_value_at(500.0)).abs() < 1e-12);
    }

    #[test]
    fn apex_on_shifted_range_and_parallel_lines() {
        let r = IndexRange::new(1000, 1100);
        let sup = line(BoundKind::Support, 2e-4, 5.0, r);
        let res = line(BoundKind::Resistance, -2e-4, 5.2, r);
        assert!((squeeze_apex(&sup, &res).unwrap() - 1500.0).abs() < 1e-6);
        // diverging pair meets before the range
        let sup = line(BoundKind::Support, -2e-4, 5.0, r);
        let res = line(BoundKind::Resistance, 2e-4, 5.2, r);
        assert!(squeeze_apex(&sup, &res).unwrap() < 1000.0);
        let res = line(BoundKind::Resistance, -2e-4, 5.2, r);
        assert_eq!(squeeze_apex(&sup, &res), Err(Error::ParallelLines));
    }

    #[test]
    fn channel_cases() {
        let r = IndexRange::new(0, 10);
        let kind = |s: f64, q: f64| {
            classify_bounds(
                &line(BoundKind::Support, s, 0.0, r),
                &line(BoundKind::Resistance, q, 1.0, r),
                DEFAULT_FLAT_EPS,
            )
            .unwrap()
        };
        assert_eq!(kind(0.0, 0.0), ChannelKind::HorizontalChannel);
        assert_eq!(kind(3e-4, 3e-4), ChannelKind::RisingChannel);
        assert_eq!(kind(-3e-4, -3e-4), ChannelKind::FallingChannel);
        assert_eq!(kind(-3e-4, 3e-4), ChannelKind::Diverging);
        assert_eq!(kind(0.0, 3e-4), ChannelKind::Diverging);
        let other = IndexRange::new(0, 11);
        assert_eq!(
            classify_bounds(
                &line(BoundKind::Support, 0.0, 0.0, r),
                &line(BoundKind::Resistance, 0.0, 1.0, other),
                DEFAULT_FLAT_EPS
            ),
            Err(Error::MismatchedRanges)
        );
    }

    #[test]
    fn decade_levels() {
        let channel: Vec<f64> = (0..=200).map(|k| 800.0 + k as f64).collect();
        let s = series(channel);
        let d = decade_level(&s, s.full_range()).unwrap();
        assert_eq!(d.level, 1000.0);

        let around: Vec<f64> = (0..100).map(|k| 10_000.0 * (1.0 + 0.2 * ((k as f64) * 0.3).sin())).collect();
        let s = series(around);
        assert_eq!(decade_level(&s, s.full_range()).unwrap().level, 10_000.0);

        let s = series(vec![1.0; 7]);
        assert_eq!(
            decade_level(&s, s.full_range()).unwrap(),
            DecadeLevel { level: 1.0, deviation: 0.0 }
        );
        assert!(decade_level(&s, IndexRange::new(3, 3)).is_err());
    }
}
