//! Exponential trends `close(t) = exp(ln_intercept + alpha * t)`.
//!
//! All logarithms are natural and `t` is the absolute trading-day index, so a
//! fit's `ln_intercept` is the value of `ln close` the line takes at `t = 0`
//! of the series, not at the start of the fitted range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{DailySeries, IndexRange};

/// Log-linear least-squares fit over one index range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    /// Exponent per trading day; negative for declines.
    pub alpha: f64,
    pub ln_intercept: f64,
    pub range: IndexRange,
    /// Sum of squared residuals in log space.
    pub sse: f64,
    pub n: usize,
}

impl TrendFit {
    pub fn ln_value_at(&self, t: f64) -> f64 {
        self.ln_intercept + self.alpha * t
    }

    pub fn value_at(&self, t: f64) -> f64 {
        evaluate_trend(self, t)
    }
}

/// Exponent of the exponential through two points.
pub fn two_point_alpha(t1: f64, x1: f64, t2: f64, x2: f64) -> Result<f64> {
    for x in [x1, x2] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::NonPositiveValue(x));
        }
    }
    if t1 == t2 {
        return Err(Error::DegenerateInterval);
    }
    Ok((x2.ln() - x1.ln()) / (t2 - t1))
}

/// Squared-error level below which a fit is indistinguishable from exact.
///
/// `sum_sq` is the sum of squared log values; the floor corresponds to
/// residuals of a few ulps on each of them.
pub(crate) fn roundoff_floor(sum_sq: f64) -> f64 {
    64.0 * f64::EPSILON * f64::EPSILON * sum_sq
}

/// Ordinary least squares of `ln close` against `t` over `range`.
pub fn fit_log_linear(series: &DailySeries, range: IndexRange) -> Result<TrendFit> {
    series.check_range(range, 2)?;
    let ys: Vec<f64> = series.closes()[range.lo..range.hi].iter().map(|c| c.ln()).collect();
    Ok(fit_ln_points(&ys, range))
}

/// Fits `ys[k]` observed at `t = range.lo + k`.
pub(crate) fn fit_ln_points(ys: &[f64], range: IndexRange) -> TrendFit {
    let n = ys.len();
    debug_assert!(n >= 2 && n == range.len());
    let nf = n as f64;
    // local time u = t - lo, centred at (n-1)/2; exact for integer t
    let u_mean = (nf - 1.0) / 2.0;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let (mut suu, mut suy) = (0.0, 0.0);
    for (k, y) in ys.iter().enumerate() {
        let du = k as f64 - u_mean;
        suu += du * du;
        suy += du * (y - y_mean);
    }
    let alpha = suy / suu;
    let ln_at_lo = y_mean - alpha * u_mean;
    let mut sse = 0.0;
    let mut sum_sq = 0.0;
    for (k, y) in ys.iter().enumerate() {
        let r = y - (ln_at_lo + alpha * k as f64);
        sse += r * r;
        sum_sq += y * y;
    }
    if sse <= roundoff_floor(sum_sq) {
        sse = 0.0;
    }
    TrendFit {
        alpha,
        ln_intercept: ln_at_lo - alpha * range.lo as f64,
        range,
        sse,
        n,
    }
}

/// `exp(ln_intercept + alpha * t)`; extrapolation is allowed.
pub fn evaluate_trend(fit: &TrendFit, t: f64) -> f64 {
    fit.ln_value_at(t).exp()
}

/// Values of the trend for the `horizon` trading days following its range.
pub fn project(fit: &TrendFit, horizon: usize) -> Result<Vec<(usize, f64)>> {
    project_line(fit.alpha, fit.ln_intercept, fit.range.hi, horizon)
}

pub(crate) fn project_line(
    alpha: f64,
    ln_intercept: f64,
    start: usize,
    horizon: usize,
) -> Result<Vec<(usize, f64)>> {
    if horizon < 1 {
        return Err(Error::InvalidHorizon);
    }
    Ok((start..start + horizon)
        .map(|t| (t, (ln_intercept + alpha * t as f64).exp()))
        .collect())
}
