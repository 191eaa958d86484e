//! O(1) log-linear segment costs from prefix sums.
//!
//! The sums of `ln x`, `t ln x` and `(ln x)^2` are accumulated in double-double
//! precision. The sums of `1`, `t` and `t^2` have closed forms for consecutive
//! integer `t`. Centred moments of short intervals deep into a long series
//! would otherwise lose most of their digits to cancellation.

use twofloat::TwoFloat;

use crate::error::Result;
use crate::series::{DailySeries, IndexRange};
use crate::trend::roundoff_floor;

/// Prefix sums for interval SSE queries on one series.
#[derive(Debug, Clone)]
pub struct PrefixCost {
    sum_y: Vec<TwoFloat>,
    sum_ty: Vec<TwoFloat>,
    sum_yy: Vec<TwoFloat>,
}

impl PrefixCost {
    pub fn new(series: &DailySeries) -> Self {
        Self::from_ln(&series.ln_closes())
    }

    pub(crate) fn from_ln(ys: &[f64]) -> Self {
        let n = ys.len();
        let zero = TwoFloat::from(0.0);
        let mut sum_y = Vec::with_capacity(n + 1);
        let mut sum_ty = Vec::with_capacity(n + 1);
        let mut sum_yy = Vec::with_capacity(n + 1);
        let (mut y, mut ty, mut yy) = (zero, zero, zero);
        sum_y.push(y);
        sum_ty.push(ty);
        sum_yy.push(yy);
        for (t, &v) in ys.iter().enumerate() {
            y += v;
            ty += TwoFloat::new_mul(t as f64, v);
            yy += TwoFloat::new_mul(v, v);
            sum_y.push(y);
            sum_ty.push(ty);
            sum_yy.push(yy);
        }
        Self {
            sum_y,
            sum_ty,
            sum_yy,
        }
    }

    pub fn len(&self) -> usize {
        self.sum_y.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Least-squares SSE of `ln x` against `t` on `[lo, hi)`; `hi - lo >= 2`.
    pub fn cost(&self, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo + 2 <= hi && hi <= self.len());
        let n = (hi - lo) as f64;
        let sy = self.sum_y[hi] - self.sum_y[lo];
        let sty = self.sum_ty[hi] - self.sum_ty[lo];
        let syy = self.sum_yy[hi] - self.sum_yy[lo];
        // mean of lo..hi is a half-integer, exactly representable
        let t_mean = (lo + hi - 1) as f64 / 2.0;
        // sum (t - t_mean)^2 = n (n^2 - 1) / 12, exact below 2^53
        let stt_c = n * (n * n - 1.0) / 12.0;
        let sty_c = sty - sy * t_mean;
        let syy_c = syy - sy * sy / n;
        let sse = f64::from(syy_c - sty_c * sty_c / stt_c);
        if sse <= roundoff_floor(f64::from(syy)) {
            0.0
        } else {
            sse
        }
    }
}

/// SSE of the log-linear fit on `range`, via prefix sums.
pub fn segment_cost(series: &DailySeries, range: IndexRange) -> Result<f64> {
    series.check_range(range, 2)?;
    let ys = series.ln_closes();
    Ok(PrefixCost::from_ln(&ys[..range.hi]).cost(range.lo, range.hi))
}
