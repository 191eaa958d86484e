//! Analysis pipeline and its JSON/text report.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{local_extrema, BoundKind, BoundLine, ChannelKind, DecadeLevel};
use crate::error::{Error, Result};
use crate::segment::{segment, Epoch, EpochClass, Penalty, SegmentationParams};
use crate::series::{DailySeries, IndexRange};
use crate::trend::TrendFit;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub meta: Meta,
    pub params: ReportParams,
    pub epochs: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub label: String,
    pub rows: usize,
    pub first_date: String,
    pub last_date: String,
    pub checksum_sha256: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    /// Resolved penalty actually used by the search.
    pub penalty: f64,
    /// `auto` or `manual`.
    pub penalty_mode: String,
    pub min_len: usize,
    pub max_segments: Option<usize>,
    pub window: usize,
    pub flat_eps: f64,
    pub touch_tol: f64,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub alpha: f64,
    pub ln_anchor: f64,
    pub touches: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub lo: usize,
    pub hi: usize,
    pub from_date: String,
    /// Date of the last row of the epoch (inclusive).
    pub to_date: String,
    pub class: EpochClass,
    pub alpha: f64,
    pub ln_intercept: f64,
    pub sse: f64,
    pub support: BoundRecord,
    pub resistance: BoundRecord,
    pub channel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apex: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_deviation: Option<f64>,
}

impl EpochRecord {
    fn from_epoch(series: &DailySeries, e: &Epoch) -> Self {
        let bound = |b: &BoundLine| BoundRecord {
            alpha: b.alpha,
            ln_anchor: b.ln_anchor,
            touches: b.touch_indices.clone(),
        };
        Self {
            lo: e.range.lo,
            hi: e.range.hi,
            from_date: series.dates()[e.range.lo].to_string(),
            to_date: series.dates()[e.range.hi - 1].to_string(),
            class: e.klass,
            alpha: e.fit.alpha,
            ln_intercept: e.fit.ln_intercept,
            sse: e.fit.sse,
            support: bound(&e.support),
            resistance: bound(&e.resistance),
            channel: e.channel.as_str().to_string(),
            apex: e.channel.apex(),
            level: e.level.map(|l| l.level),
            level_deviation: e.level.map(|l| l.deviation),
        }
    }

    pub fn range(&self) -> IndexRange {
        IndexRange::new(self.lo, self.hi)
    }

    /// Rebuilds the in-memory epoch.
    pub fn to_epoch(&self) -> Result<Epoch> {
        let range = self.range();
        let bound = |kind, b: &BoundRecord| BoundLine {
            kind,
            alpha: b.alpha,
            ln_anchor: b.ln_anchor,
            touch_indices: b.touches.clone(),
            range,
        };
        let channel = ChannelKind::from_name(&self.channel, self.apex)
            .ok_or_else(|| Error::InvalidParams(format!("unknown channel `{}`", self.channel)))?;
        Ok(Epoch {
            range,
            klass: self.class,
            fit: TrendFit {
                alpha: self.alpha,
                ln_intercept: self.ln_intercept,
                range,
                sse: self.sse,
                n: range.len(),
            },
            support: bound(BoundKind::Support, &self.support),
            resistance: bound(BoundKind::Resistance, &self.resistance),
            channel,
            level: self.level.map(|level| DecadeLevel {
                level,
                deviation: self.level_deviation.unwrap_or(0.0),
            }),
        })
    }
}

/// Everything one analysis run produces.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// The series actually segmented (after resampling).
    pub series: DailySeries,
    pub epochs: Vec<Epoch>,
    pub report: AnalysisReport,
}

pub fn sha256_hex(raw: &[u8]) -> String {
    hex::encode(Sha256::digest(raw))
}

/// Resamples, segments and annotates `series`.
pub fn analyze(
    series: &DailySeries,
    params: &SegmentationParams,
    stride: usize,
    checksum_sha256: &str,
) -> Result<Analysis> {
    params.validate()?;
    let series = series.resample(stride)?;
    let penalty = params.penalty.resolve(&series)?;
    let resolved = SegmentationParams {
        penalty: Penalty::Manual(penalty),
        ..params.clone()
    };
    let epochs = segment(&series, &resolved)?;
    let report = AnalysisReport {
        meta: Meta {
            label: series.label().to_string(),
            rows: series.len(),
            first_date: series.dates()[0].to_string(),
            last_date: series.dates()[series.len() - 1].to_string(),
            checksum_sha256: checksum_sha256.to_string(),
            version: VERSION.to_string(),
        },
        params: ReportParams {
            penalty,
            penalty_mode: match params.penalty {
                Penalty::Auto => "auto",
                Penalty::Manual(_) => "manual",
            }
            .to_string(),
            min_len: params.min_len,
            max_segments: params.max_segments,
            window: params.window,
            flat_eps: params.flat_eps,
            touch_tol: params.touch_tol,
            stride,
        },
        epochs: epochs.iter().map(|e| EpochRecord::from_epoch(&series, e)).collect(),
    };
    Ok(Analysis {
        series,
        epochs,
        report,
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize") + "\n"
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn epochs(&self) -> Result<Vec<Epoch>> {
        self.epochs.iter().map(EpochRecord::to_epoch).collect()
    }
}

/// Human-readable summary. Swing counts use the report's extremum window.
pub fn render_text(analysis: &Analysis) -> String {
    let r = &analysis.report;
    let mut out = String::new();
    let _ = writeln!(out, "series   {}", r.meta.label);
    let _ = writeln!(
        out,
        "rows     {} ({} .. {})",
        r.meta.rows, r.meta.first_date, r.meta.last_date
    );
    let _ = writeln!(out, "sha256   {}", r.meta.checksum_sha256);
    let _ = writeln!(
        out,
        "params   penalty={:.6e} ({}) min_len={} max_segments={} window={} flat_eps={:e} touch_tol={:e} stride={}",
        r.params.penalty,
        r.params.penalty_mode,
        r.params.min_len,
        r.params.max_segments.map_or("none".to_string(), |k| k.to_string()),
        r.params.window,
        r.params.flat_eps,
        r.params.touch_tol,
        r.params.stride,
    );
    let _ = writeln!(out, "epochs   {}", r.epochs.len());
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>3}  {:<10}  {:<10}  {:>6}  {:<19}  {:>12}  {:>12}  {:>12}  {:<18}  {:>5}  {:>8}",
        "#", "from", "to", "rows", "class", "alpha/day", "support", "resistance", "channel", "swing", "level"
    );
    for (k, (e, epoch)) in r.epochs.iter().zip(&analysis.epochs).enumerate() {
        let swings = local_extrema(&analysis.series, epoch.range, r.params.window)
            .map(|(lows, highs)| format!("{}/{}", lows.len(), highs.len()))
            .unwrap_or_else(|_| "-".to_string());
        let _ = writeln!(
            out,
            "{:>3}  {:<10}  {:<10}  {:>6}  {:<19}  {:>+12.5e}  {:>+12.5e}  {:>+12.5e}  {:<18}  {:>5}  {:>8}",
            k,
            e.from_date,
            e.to_date,
            e.hi - e.lo,
            e.class.as_str(),
            e.alpha,
            e.support.alpha,
            e.resistance.alpha,
            e.channel,
            swings,
            e.level.map_or("-".to_string(), |l| format!("{l}")),
        );
    }
    out
}
