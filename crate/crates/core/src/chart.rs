//! Monospace chart of a series on a log-scaled vertical axis.
//!
//! Closes are drawn with `*`, epoch boundaries with `|` and bound lines with
//! `/`, `\` and `-`. A bottom axis repeats each boundary as `|` so boundary
//! columns stay identifiable when the price trace covers them.

use crate::error::{Error, Result};
use crate::segment::Epoch;
use crate::series::DailySeries;

pub const MIN_WIDTH: usize = 40;
pub const MIN_HEIGHT: usize = 10;
/// Characters before the plot area on every plot and axis row.
pub const GUTTER: usize = 12;

const MARK: u8 = b'*';
const BOUNDARY: u8 = b'|';
const EMPTY: u8 = b' ';

struct Frame {
    n: usize,
    width: usize,
    height: usize,
    ln_top: f64,
    ln_bottom: f64,
}

impl Frame {
    fn column(&self, t: usize) -> usize {
        if self.n <= 1 {
            return 0;
        }
        // round half up, in exact integer arithmetic
        (2 * t * (self.width - 1) + (self.n - 1)) / (2 * (self.n - 1))
    }

    fn t_at(&self, col: usize) -> f64 {
        col as f64 * (self.n - 1) as f64 / (self.width - 1) as f64
    }

    fn row(&self, ln_value: f64) -> Option<usize> {
        let frac = (self.ln_top - ln_value) / (self.ln_top - self.ln_bottom);
        let r = (frac * (self.height - 1) as f64).round();
        (r >= 0.0 && r <= (self.height - 1) as f64).then_some(r as usize)
    }
}

fn fmt_value(v: f64) -> String {
    if v >= 100.0 {
        format!("{v:.0}")
    } else if v >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3e}")
    }
}

/// Renders `series` with `epochs` overlaid on a `width` x `height` plot area.
pub fn render_chart(series: &DailySeries, epochs: &[Epoch], width: usize, height: usize) -> Result<String> {
    if width < MIN_WIDTH || height < MIN_HEIGHT {
        return Err(Error::GridTooSmall { width, height });
    }
    let ys = series.ln_closes();
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (ln_top, ln_bottom) = if hi > lo { (hi, lo) } else { (hi + 1.0, lo - 1.0) };
    let frame = Frame {
        n: series.len(),
        width,
        height,
        ln_top,
        ln_bottom,
    };
    let mut grid = vec![vec![EMPTY; width]; height];

    // price trace: per column, a vertical run spanning its closes
    let mut col_rows: Vec<Option<(usize, usize)>> = vec![None; width];
    for (t, &y) in ys.iter().enumerate() {
        let c = frame.column(t);
        let r = frame.row(y).expect("closes lie inside the frame");
        col_rows[c] = Some(col_rows[c].map_or((r, r), |(a, b)| (a.min(r), b.max(r))));
    }
    for (c, span) in col_rows.iter().enumerate() {
        let (a, b) = match span {
            Some(s) => *s,
            None => {
                // fewer rows than columns: interpolate between neighbours
                let tf = frame.t_at(c);
                let t0 = tf.floor() as usize;
                let t1 = (t0 + 1).min(frame.n - 1);
                let w = tf - t0 as f64;
                let r = frame.row(ys[t0] * (1.0 - w) + ys[t1] * w).expect("inside frame");
                (r, r)
            }
        };
        for row in grid.iter_mut().take(b + 1).skip(a) {
            row[c] = MARK;
        }
    }

    // boundary columns, kept distinct and increasing
    let mut boundary_cols = Vec::new();
    for e in epochs.iter().skip(1) {
        let mut c = frame.column(e.range.lo);
        if let Some(&prev) = boundary_cols.last() {
            c = c.max(prev + 1);
        }
        boundary_cols.push(c.min(width - 1));
    }
    for &c in &boundary_cols {
        for row in grid.iter_mut() {
            if row[c] == EMPTY {
                row[c] = BOUNDARY;
            }
        }
    }

    // bound lines
    for e in epochs {
        let (c0, c1) = (frame.column(e.range.lo), frame.column(e.range.hi - 1));
        for line in [&e.support, &e.resistance] {
            #[allow(clippy::needless_range_loop)]
            for c in c0..=c1 {
                let Some(r) = frame.row(line.ln_value_at(frame.t_at(c))) else {
                    continue;
                };
                let next = frame.row(line.ln_value_at(frame.t_at(c + 1)));
                let glyph = match next {
                    Some(nr) if nr < r => b'/',
                    Some(nr) if nr > r => b'\\',
                    _ => b'-',
                };
                if grid[r][c] == EMPTY {
                    grid[r][c] = glyph;
                }
            }
        }
    }

    // y labels at the top, bottom and every decade in between
    let mut labels: Vec<Option<String>> = vec![None; height];
    labels[0] = Some(fmt_value(ln_top.exp()));
    labels[height - 1] = Some(fmt_value(ln_bottom.exp()));
    let ln10 = std::f64::consts::LN_10;
    let first_decade = (ln_bottom / ln10).ceil() as i32;
    let last_decade = (ln_top / ln10).floor() as i32;
    for k in first_decade..=last_decade {
        if let Some(r) = frame.row(k as f64 * ln10) {
            labels[r] = Some(fmt_value(10f64.powi(k)));
        }
    }

    let mut out = String::with_capacity((GUTTER + width + 1) * (height + 2));
    for (row, label) in grid.iter().zip(&labels) {
        match label {
            Some(l) => out.push_str(&format!("{l:>9} +")),
            None => out.push_str(&format!("{:>9} :", "")),
        }
        out.push(' ');
        out.push_str(std::str::from_utf8(row).expect("ascii grid"));
        out.push('\n');
    }
    let mut axis = vec![b'-'; width];
    for &c in &boundary_cols {
        axis[c] = BOUNDARY;
    }
    out.push_str(&format!("{:>9} +-", ""));
    out.push_str(std::str::from_utf8(&axis).expect("ascii axis"));
    out.push('\n');
    let first = series.dates()[0].to_string();
    let last = series.dates()[series.len() - 1].to_string();
    let pad = width.saturating_sub(first.len() + last.len());
    out.push_str(&format!("{:>GUTTER$}{first}{:pad$}{last}\n", "", ""));
    Ok(out)
}

/// Columns of the plot area that show an epoch boundary on the bottom axis.
pub fn boundary_columns(chart: &str, height: usize) -> Vec<usize> {
    chart
        .lines()
        .nth(height)
        .map(|axis| {
            axis.bytes()
                .skip(GUTTER)
                .enumerate()
                .filter(|&(_, b)| b == BOUNDARY)
                .map(|(c, _)| c)
                .collect()
        })
        .unwrap_or_default()
}
