//! Seeded generators for piecewise-exponential test series.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::series::DailySeries;

/// One regime: `len` rows growing at `alpha` per row in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub alpha: f64,
    pub len: usize,
}

/// Weekday dates starting at `start` (itself skipped forward to a weekday).
pub fn weekdays(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(count)
        .collect()
}

/// Continuous piecewise log-linear trend from `start_level`, plus i.i.d.
/// Gaussian noise of standard deviation `sigma` in log space.
///
/// The trend is continuous: each regime starts where the previous one ended.
pub fn regime_series(
    label: &str,
    start_level: f64,
    regimes: &[Regime],
    sigma: f64,
    seed: u64,
) -> Result<DailySeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    let mut ln_trend = start_level.ln();
    let mut closes = Vec::new();
    let mut first = true;
    for regime in regimes {
        for _ in 0..regime.len {
            if !first {
                ln_trend += regime.alpha;
            }
            first = false;
            closes.push((ln_trend + noise.sample(&mut rng)).exp());
        }
    }
    let dates = weekdays(NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(), closes.len());
    DailySeries::new(label, dates, closes)
}

/// True breakpoints (segment start rows after the first) of `regimes`.
pub fn regime_breakpoints(regimes: &[Regime]) -> Vec<usize> {
    regimes
        .iter()
        .scan(0, |start, r| {
            *start += r.len;
            Some(*start)
        })
        .take(regimes.len().saturating_sub(1))
        .collect()
}

/// The bundled three-regime fixture: 200 rows each at 3e-4, 0 and 5e-4 per
/// row, log noise 0.01.
pub const THREE_REGIMES: [Regime; 3] = [
    Regime { alpha: 3e-4, len: 200 },
    Regime { alpha: 0.0, len: 200 },
    Regime { alpha: 5e-4, len: 200 },
];
pub const THREE_REGIME_SIGMA: f64 = 0.01;
pub const THREE_REGIME_SEED: u64 = 20100530;

pub fn three_regime_fixture() -> DailySeries {
    regime_series("synthetic-3-regime", 1000.0, &THREE_REGIMES, THREE_REGIME_SIGMA, THREE_REGIME_SEED)
        .expect("fixture parameters are valid")
}
