use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use epochscope::bounds::{DEFAULT_FLAT_EPS, DEFAULT_TOUCH_TOL, DEFAULT_WINDOW};
use epochscope::report::{render_text, sha256_hex};
use epochscope::segment::DEFAULT_MIN_LEN;
use epochscope::series::parse_date;
use epochscope::{
    analyze, parse_csv, project, render_chart, two_point_alpha, Analysis, AnalysisReport,
    DailySeries, Epoch, Penalty, SegmentationParams,
};

#[derive(Parser)]
#[command(name = "epochscope", version, about = "Log-scale regime analysis of daily index closes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a series into epochs and report them.
    Analyze {
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        size: ChartSize,
    },
    /// Exponent per trading day between two points.
    Fit(FitArgs),
    /// Extend an epoch's trend or bound line forward.
    Project(ProjectArgs),
    /// Draw the series and its epochs as a log-scale text chart.
    Chart {
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        size: ChartSize,
    },
}

#[derive(Args)]
struct AnalysisArgs {
    /// CSV file with a `date,close` header.
    #[arg(long)]
    input: PathBuf,
    /// Keep every N-th row (and the last).
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Cost per extra segment, or `auto` for the BIC-style default.
    #[arg(long, default_value = "auto", value_parser = parse_penalty)]
    penalty: Penalty,
    #[arg(long, default_value_t = DEFAULT_MIN_LEN)]
    min_len: usize,
    #[arg(long)]
    max_segments: Option<usize>,
    /// Half-width of the local-extremum window.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Slopes below this magnitude per trading day count as flat.
    #[arg(long, default_value_t = DEFAULT_FLAT_EPS)]
    flat_eps: f64,
    /// Touch tolerance of bound lines in log space.
    #[arg(long, default_value_t = DEFAULT_TOUCH_TOL)]
    touch_tol: f64,
}

#[derive(Args)]
struct ChartSize {
    #[arg(long, default_value_t = 100)]
    width: usize,
    #[arg(long, default_value_t = 24)]
    height: usize,
}

#[derive(Args)]
struct FitArgs {
    /// Series used to resolve dates and missing values.
    #[arg(long)]
    input: Option<PathBuf>,
    /// First trading-day counter.
    #[arg(long, conflicts_with = "from", required_unless_present = "from")]
    t1: Option<f64>,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    x1: Option<f64>,
    #[arg(long, conflicts_with = "to", required_unless_present = "to")]
    t2: Option<f64>,
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    x2: Option<f64>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Run a fresh analysis of this CSV.
    #[arg(long, required_unless_present = "report", conflicts_with = "report")]
    input: Option<PathBuf>,
    /// Use a JSON report written by `analyze`.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value = "auto", value_parser = parse_penalty)]
    penalty: Penalty,
    #[arg(long, default_value_t = DEFAULT_MIN_LEN)]
    min_len: usize,
    #[arg(long)]
    max_segments: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, default_value_t = DEFAULT_FLAT_EPS)]
    flat_eps: f64,
    #[arg(long, default_value_t = DEFAULT_TOUCH_TOL)]
    touch_tol: f64,
    /// 0-based epoch number, or `last`.
    #[arg(long, default_value = "last")]
    epoch: String,
    #[arg(long, value_enum, default_value_t = Line::Trend)]
    line: Line,
    #[arg(long)]
    horizon: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
    Chart,
}

#[derive(Clone, Copy, ValueEnum)]
enum Line {
    Trend,
    Support,
    Resistance,
}

fn parse_penalty(s: &str) -> Result<Penalty, String> {
    if s == "auto" {
        return Ok(Penalty::Auto);
    }
    s.parse::<f64>()
        .map(Penalty::Manual)
        .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
}

enum Failure {
    Io(String),
    Invalid(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
        }
    }
}

impl From<epochscope::Error> for Failure {
    fn from(e: epochscope::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_series(path: &Path) -> Result<(DailySeries, String), Failure> {
    let raw = read_file(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let series = parse_csv(&raw)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?
        .with_label(label);
    Ok((series, sha256_hex(&raw)))
}

impl AnalysisArgs {
    fn params(&self) -> SegmentationParams {
        SegmentationParams {
            penalty: self.penalty,
            min_len: self.min_len,
            max_segments: self.max_segments,
            window: self.window,
            flat_eps: self.flat_eps,
            touch_tol: self.touch_tol,
        }
    }

    fn run(&self) -> Result<Analysis, Failure> {
        let (series, checksum) = load_series(&self.input)?;
        Ok(analyze(&series, &self.params(), self.stride, &checksum)?)
    }
}

fn styled(chart: &str, height: usize) -> String {
    let color_allowed = std::env::var_os("EPOCHSCOPE_NO_COLOR").is_none();
    if !color_allowed || !std::io::stdout().is_terminal() {
        return chart.to_string();
    }
    let mut out = String::with_capacity(chart.len() * 2);
    for (i, line) in chart.lines().enumerate() {
        if i >= height {
            out.push_str(line);
        } else {
            let (gutter, plot) = line.split_at(epochscope::chart::GUTTER.min(line.len()));
            out.push_str(gutter);
            for ch in plot.chars() {
                let code = match ch {
                    '*' => "36",
                    '|' => "33",
                    '/' | '\\' | '-' => "35",
                    _ => "",
                };
                if code.is_empty() {
                    out.push(ch);
                } else {
                    out.push_str(&format!("\x1b[{code}m{ch}\x1b[0m"));
                }
            }
        }
        out.push('\n');
    }
    out
}

fn cmd_analyze(args: &AnalysisArgs, format: Format, size: &ChartSize) -> Result<String, Failure> {
    let analysis = args.run()?;
    Ok(match format {
        Format::Json => analysis.report.to_json(),
        Format::Text => render_text(&analysis),
        Format::Chart => styled(
            &render_chart(&analysis.series, &analysis.epochs, size.width, size.height)?,
            size.height,
        ),
    })
}

fn cmd_fit(args: &FitArgs) -> Result<String, Failure> {
    let series = args.input.as_deref().map(load_series).transpose()?.map(|(s, _)| s);
    let resolve = |t: Option<f64>, date: &Option<String>, x: Option<f64>, which: &str| -> Result<(f64, f64), Failure> {
        let index = match (t, date) {
            (Some(t), _) => t,
            (None, Some(d)) => {
                let s = series
                    .as_ref()
                    .ok_or_else(|| Failure::Invalid(format!("--{which} needs --input to resolve a date")))?;
                let date = parse_date(d).ok_or_else(|| Failure::Invalid(format!("invalid date `{d}`")))?;
                s.index_of_date(date)? as f64
            }
            (None, None) => return Err(Failure::Invalid(format!("missing time for point {which}"))),
        };
        let value = match x {
            Some(x) => x,
            None => {
                let s = series
                    .as_ref()
                    .ok_or_else(|| Failure::Invalid(format!("no value for point {which}: pass --x or --input")))?;
                let i = index as usize;
                if index < 0.0 || index.fract() != 0.0 || i >= s.len() {
                    return Err(Failure::Invalid(format!(
                        "index {index} is not a row of the series (0..{})",
                        s.len()
                    )));
                }
                s.closes()[i]
            }
        };
        Ok((index, value))
    };
    let (t1, x1) = resolve(args.t1, &args.from, args.x1, "1")?;
    let (t2, x2) = resolve(args.t2, &args.to, args.x2, "2")?;
    let alpha = two_point_alpha(t1, x1, t2, x2)?;
    Ok(format!("{alpha:+.5e}\n"))
}

fn select_epoch<'a>(epochs: &'a [Epoch], selector: &str) -> Result<&'a Epoch, Failure> {
    let unknown = || Failure::Invalid(format!("unknown epoch `{selector}` ({} epochs)", epochs.len()));
    if selector == "last" {
        return epochs.last().ok_or_else(unknown);
    }
    let k: usize = selector.parse().map_err(|_| unknown())?;
    epochs.get(k).ok_or_else(unknown)
}

fn cmd_project(args: &ProjectArgs) -> Result<String, Failure> {
    let (epochs, series) = match (&args.report, &args.input) {
        (Some(path), _) => {
            let text = String::from_utf8(read_file(path)?)
                .map_err(|_| Failure::Invalid(format!("{}: report is not UTF-8", path.display())))?;
            let report = AnalysisReport::from_json(&text)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            (report.epochs()?, None)
        }
        (None, Some(input)) => {
            let analysis = AnalysisArgs {
                input: input.clone(),
                stride: args.stride,
                penalty: args.penalty,
                min_len: args.min_len,
                max_segments: args.max_segments,
                window: args.window,
                flat_eps: args.flat_eps,
                touch_tol: args.touch_tol,
            }
            .run()?;
            (analysis.epochs, Some(analysis.series))
        }
        (None, None) => return Err(Failure::Invalid("pass --input or --report".into())),
    };
    let epoch = select_epoch(&epochs, &args.epoch)?;
    let rows = match args.line {
        Line::Trend => project(&epoch.fit, args.horizon)?,
        Line::Support => epoch.support.project(args.horizon)?,
        Line::Resistance => epoch.resistance.project(args.horizon)?,
    };
    let mut out = String::from("index\tdate\tvalue\n");
    for (t, v) in rows {
        let date = series
            .as_ref()
            .and_then(|s| s.dates().get(t))
            .map_or_else(|| "-".to_string(), |d| d.to_string());
        out.push_str(&format!("{t}\t{date}\t{v:.6}\n"));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze {
            analysis,
            format,
            size,
        } => cmd_analyze(analysis, *format, size),
        Command::Fit(args) => cmd_fit(args),
        Command::Project(args) => cmd_project(args),
        Command::Chart { analysis, size } => cmd_analyze(analysis, Format::Chart, size),
    };
    match result {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let (Failure::Io(msg) | Failure::Invalid(msg)) = &failure;
            eprintln!("epochscope: {msg}");
            ExitCode::from(failure.code())
        }
    }
}
