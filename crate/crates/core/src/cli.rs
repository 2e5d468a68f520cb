//! Command-line front end. Machine-readable output goes to stdout (or
//! `--output`), diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 statistical
//! degeneracy (for example a constant series).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ingest::{
    self, parse_cases_csv, parse_manifest, parse_trends_csv, CaseColumnMap, SymptomManifest,
    TrendsOptions, DEFAULT_CENSORED_VALUE,
};
use crate::report::{self, format_p, format_rho, Format};
use crate::series::{align_pair, DailySeries, MissingPolicy, WeeklyMode};
use crate::stats::{
    self, correlate, lag_scan, rolling_correlation, Alternative, CorrelationOptions,
    CorrelationResult, PValueMethod, StatsError,
};
use crate::surveillance::{
    evaluate_study, prepare_study, summarize_cases, StudyConfig, Thresholds,
};
use crate::synth::{self, generate_study_fixture, StudyFixtureSpec, SymptomTarget};

pub const SEED_ENV: &str = "TRENDSURV_SEED";
pub const DEFAULT_SEED: u64 = 20200302;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "trendsurv",
    version,
    about = "Correlate search-trend volumes of symptom keywords with epidemic case counts",
    after_help = "\
Examples:
  trendsurv synth --out-dir fixture --reference-set
  trendsurv study --manifest fixture/manifest.json --trends-dir fixture/trends \\
      --cases fixture/cases.csv --format markdown
  trendsurv lag-scan signal.csv fixture/cases.csv --max-lag 14"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Daily and weekly correlation of every manifest symptom with cases
    Study(StudyArgs),
    /// Correlate two series files
    Correlate(PairArgs),
    /// Correlation across day offsets between two series
    LagScan(LagArgs),
    /// Sliding-window correlation between two series
    Rolling(RollingArgs),
    /// Peak day and monthly totals of a case file
    SummarizeCases(SummarizeArgs),
    /// Generate a synthetic study fixture
    Synth(SynthArgs),
    /// Parse inputs without running any statistics
    Validate(ValidateArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PMethodArg {
    T,
    Exact,
    Mc,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Markdown,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Markdown => Format::Markdown,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MissingArg {
    Error,
    Zero,
    Linear,
}

impl From<MissingArg> for MissingPolicy {
    fn from(m: MissingArg) -> Self {
        match m {
            MissingArg::Error => MissingPolicy::Error,
            MissingArg::Zero => MissingPolicy::Zero,
            MissingArg::Linear => MissingPolicy::Linear,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum WeeklyArg {
    Mean,
    Sum,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CurveArg {
    Unimodal,
    Bimodal,
    Flat,
}

#[derive(Args, Debug)]
struct StatArgs {
    /// p-value method
    #[arg(long, value_enum, default_value = "t")]
    p_method: PMethodArg,
    /// Monte Carlo permutations (with --p-method mc)
    #[arg(long, default_value_t = 100_000)]
    mc_iters: u64,
    /// Random seed for Monte Carlo p-values
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// One-sided test for positive association
    #[arg(long)]
    one_sided: bool,
}

impl StatArgs {
    fn options(&self) -> CorrelationOptions {
        let method = match self.p_method {
            PMethodArg::T => PValueMethod::TApprox,
            PMethodArg::Exact => PValueMethod::ExactPerm,
            PMethodArg::Mc => PValueMethod::McPerm {
                iterations: self.mc_iters,
                seed: self.seed,
            },
        };
        CorrelationOptions {
            method,
            alternative: if self.one_sided {
                Alternative::Greater
            } else {
                Alternative::TwoSided
            },
        }
    }
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Treatment of dates absent from an input file
    #[arg(long, value_enum, default_value = "error")]
    missing: MissingArg,
    /// Value substituted for `<1` trend cells
    #[arg(long, default_value_t = DEFAULT_CENSORED_VALUE)]
    censored_value: f64,
    /// Date column of case / series CSVs
    #[arg(long, default_value = "date")]
    date_col: String,
    /// Value column of case / series CSVs
    #[arg(long, default_value = "cases")]
    value_col: String,
    /// chrono date pattern of case / series CSVs
    #[arg(long, default_value = ingest::TRENDS_DATE_FORMAT)]
    date_format: String,
}

impl InputArgs {
    fn trends(&self) -> TrendsOptions {
        TrendsOptions {
            censored_value: self.censored_value,
            missing: self.missing.into(),
        }
    }

    fn columns(&self) -> CaseColumnMap {
        CaseColumnMap {
            date_column: self.date_col.clone(),
            value_column: self.value_col.clone(),
            date_format: self.date_format.clone(),
        }
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Write to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory of trend exports (*.csv)
    #[arg(long)]
    trends_dir: PathBuf,
    #[arg(long)]
    cases: PathBuf,
    /// Study period, inclusive
    #[arg(long, num_args = 2, value_names = ["START", "END"])]
    period: Option<Vec<NaiveDate>>,
    /// Weekly aggregation of search volumes
    #[arg(long, value_enum, default_value = "mean")]
    weekly_rsv: WeeklyArg,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    high: f64,
    #[arg(long, default_value_t = 0.3)]
    moderate: f64,
    /// Scan daily lags up to this many days and report the best one
    #[arg(long, default_value_t = 0)]
    max_lag: u32,
    #[arg(long, default_value_t = stats::DEFAULT_MIN_OVERLAP)]
    min_overlap: usize,
    /// Also write long-format plot data, one file per symptom
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    #[command(flatten)]
    stat: StatArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SeriesFiles {
    /// First series (trend export or dated CSV)
    a: PathBuf,
    /// Second series
    b: PathBuf,
    /// Query column to use when a trend export holds several
    #[arg(long)]
    column: Option<String>,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[command(flatten)]
    files: SeriesFiles,
    #[command(flatten)]
    stat: StatArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct LagArgs {
    #[command(flatten)]
    files: SeriesFiles,
    #[arg(long, default_value_t = 14)]
    max_lag: u32,
    #[arg(long, default_value_t = stats::DEFAULT_MIN_OVERLAP)]
    min_overlap: usize,
    #[command(flatten)]
    stat: StatArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RollingArgs {
    #[command(flatten)]
    files: SeriesFiles,
    #[arg(long, default_value_t = 28)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    cases: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Ten symptoms from the bundled Arabic manifest, ordered strongest
    /// (Loss of Smell) to weakest (Cough)
    #[arg(long, conflicts_with = "target")]
    reference_set: bool,
    /// Symptom target as ID:RHO[:LAG]; repeatable
    #[arg(long, value_parser = parse_target)]
    target: Vec<SymptomTarget>,
    #[arg(long, default_value_t = 244)]
    days: usize,
    #[arg(long, default_value = "2020-03-02")]
    start: NaiveDate,
    #[arg(long, value_enum, default_value = "bimodal")]
    curve: CurveArg,
    /// Extra latent noise on the search signals
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Log-scale jitter of daily case counts
    #[arg(long, default_value_t = 0.5)]
    case_jitter: f64,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    trends_dir: Option<PathBuf>,
    #[arg(long)]
    cases: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
}

fn parse_target(s: &str) -> Result<SymptomTarget, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err("expected ID:RHO[:LAG]".into());
    }
    let rho: f64 = parts[1].parse().map_err(|_| format!("bad rho `{}`", parts[1]))?;
    let lag: i64 = match parts.get(2) {
        Some(l) => l.parse().map_err(|_| format!("bad lag `{l}`"))?,
        None => 0,
    };
    Ok(SymptomTarget::new(parts[0], rho, lag))
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        let code = match e {
            StatsError::TooFewIterations { .. }
            | StatsError::WindowTooSmall { .. }
            | StatsError::ZeroStep => EXIT_USAGE,
            _ => EXIT_DEGENERATE,
        };
        Self {
            code,
            message: format!("{} ({})", e, e.kind()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn require_path(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::usage(format!("no such path: {}", path.display())))
    }
}

fn read_manifest(path: &Path) -> CliResult<SymptomManifest> {
    let f = File::open(path)?;
    parse_manifest(f).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn read_cases(path: &Path, input: &InputArgs) -> CliResult<DailySeries> {
    let f = File::open(path)?;
    parse_cases_csv(f, &input.columns(), input.missing.into())
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn read_trends_dir(dir: &Path, input: &InputArgs) -> CliResult<Vec<DailySeries>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::data(format!("{}: no .csv files", dir.display())));
    }
    let mut out = Vec::new();
    for path in files {
        let f = File::open(&path)?;
        let series = parse_trends_csv(f, &input.trends())
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        out.extend(series);
    }
    Ok(out)
}

fn looks_like_trends(text: &str) -> bool {
    text.lines()
        .take(5)
        .any(|l| l.trim_start_matches('\u{feff}').split(',').next().map(str::trim) == Some("Day"))
}

/// Load one series from either a trend export or a dated CSV.
fn read_series(path: &Path, column: Option<&str>, input: &InputArgs) -> CliResult<DailySeries> {
    let text = fs::read_to_string(path)?;
    let ctx = |e: ingest::IngestError| CliError::data(format!("{}: {e}", path.display()));
    if looks_like_trends(&text) {
        let mut cols = parse_trends_csv(text.as_bytes(), &input.trends()).map_err(ctx)?;
        match column {
            Some(name) => cols
                .into_iter()
                .find(|s| s.label() == name)
                .ok_or_else(|| CliError::data(format!("{}: no column `{name}`", path.display()))),
            None if cols.len() == 1 => Ok(cols.remove(0)),
            None => Err(CliError::usage(format!(
                "{} has {} query columns; pick one with --column",
                path.display(),
                cols.len()
            ))),
        }
    } else {
        parse_cases_csv(text.as_bytes(), &input.columns(), input.missing.into()).map_err(ctx)
    }
}

fn read_pair(files: &SeriesFiles, input: &InputArgs) -> CliResult<(DailySeries, DailySeries)> {
    require_path(&files.a)?;
    require_path(&files.b)?;
    let a = read_series(&files.a, files.column.as_deref(), input)?;
    let b = read_series(&files.b, files.column.as_deref(), input)?;
    Ok((a, b))
}

fn write_output(bytes: &[u8], output: &OutputArgs, stdout: &mut dyn Write) -> CliResult<()> {
    match &output.output {
        Some(path) => fs::write(path, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

const RESULT_HEADER: [&str; 6] = ["rho", "p_value", "n", "method", "lag_days", "degenerate"];

fn result_cells(r: &CorrelationResult) -> [String; 6] {
    [
        format_rho(r.rho),
        format_p(r.p_value),
        r.n.to_string(),
        serde_json::to_value(r.method)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        r.lag_days.to_string(),
        r.degenerate.to_string(),
    ]
}

/// Render a list of (leading cells, result-or-error) rows as csv/markdown.
fn render_rows(
    format: Format,
    lead: &[&str],
    rows: &[(Vec<String>, Result<CorrelationResult, StatsError>)],
) -> Vec<u8> {
    let header: Vec<&str> = lead.iter().copied().chain(RESULT_HEADER).collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(cells, r)| {
            let tail = match r {
                Ok(r) => result_cells(r).to_vec(),
                Err(e) => {
                    let mut t = vec!["NA".to_string(); RESULT_HEADER.len()];
                    t[3] = format!("error:{}", e.kind());
                    t
                }
            };
            cells.iter().cloned().chain(tail).collect()
        })
        .collect();
    match format {
        Format::Markdown => {
            let mut out = format!("| {} |\n", header.join(" | "));
            out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for row in body {
                out.push_str(&format!("| {} |\n", row.join(" | ")));
            }
            out.into_bytes()
        }
        _ => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(&header).expect("in-memory write");
            for row in body {
                w.write_record(&row).expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
    }
}

fn run_study_cmd(args: StudyArgs, stdout: &mut dyn Write) -> CliResult<()> {
    for p in [&args.manifest, &args.trends_dir, &args.cases] {
        require_path(p)?;
    }
    let opts = args.stat.options();
    let mut config = StudyConfig {
        p_method: opts.method,
        alternative: opts.alternative,
        weekly_mode: match args.weekly_rsv {
            WeeklyArg::Mean => WeeklyMode::Mean,
            WeeklyArg::Sum => WeeklyMode::Sum,
        },
        thresholds: Thresholds {
            high: args.high,
            moderate: args.moderate,
            alpha: args.alpha,
        },
        max_lag: args.max_lag,
        min_overlap: args.min_overlap,
        ..Default::default()
    };
    if let Some(period) = &args.period {
        config.start = period[0];
        config.end = period[1];
    }
    config
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;

    let manifest = read_manifest(&args.manifest)?;
    let trends = read_trends_dir(&args.trends_dir, &args.input)?;
    let cases = read_cases(&args.cases, &args.input)?;
    let prepared = prepare_study(&manifest, &trends, &cases, &config).map_err(CliError::data)?;
    let report = evaluate_study(&prepared, &config);
    if let Some(dir) = &args.plot_dir {
        report::write_plot_panels(&prepared, dir).map_err(CliError::data)?;
    }
    for row in report.all_rows() {
        for (label, o) in [("daily", &row.daily), ("weekly", &row.weekly)] {
            if let Err(e) = o {
                eprintln!("warning: {} {label}: {e}", row.id);
            }
        }
    }
    write_output(
        &report::render_table(&report, args.output.format.into()),
        &args.output,
        stdout,
    )
}

fn run_correlate(args: PairArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (a, b) = read_pair(&args.files, &args.input)?;
    let pair = align_pair(&a, &b).map_err(CliError::data)?;
    let result = correlate(&pair, &args.stat.options())?;
    let format: Format = args.output.format.into();
    let bytes = match format {
        Format::Json => json_bytes(&result),
        f => render_rows(f, &[], &[(vec![], Ok(result))]),
    };
    write_output(&bytes, &args.output, stdout)
}

fn run_lag_scan(args: LagArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (a, b) = read_pair(&args.files, &args.input)?;
    let scan = lag_scan(&a, &b, args.max_lag, args.min_overlap, &args.stat.options())?;
    let format: Format = args.output.format.into();
    let bytes = match format {
        Format::Json => json_bytes(&scan),
        f => {
            let rows: Vec<_> = scan
                .entries
                .iter()
                .map(|e| {
                    (
                        vec![
                            e.lag.to_string(),
                            e.overlap.to_string(),
                            (e.lag == scan.best_lag).to_string(),
                        ],
                        e.result.clone(),
                    )
                })
                .collect();
            render_rows(f, &["lag", "overlap", "best"], &rows)
        }
    };
    write_output(&bytes, &args.output, stdout)
}

fn run_rolling(args: RollingArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (a, b) = read_pair(&args.files, &args.input)?;
    let pair = align_pair(&a, &b).map_err(CliError::data)?;
    let windows = rolling_correlation(&pair, args.window, args.step)?;
    let format: Format = args.output.format.into();
    let bytes = match format {
        Format::Json => json_bytes(&windows),
        f => {
            let rows: Vec<_> = windows
                .iter()
                .map(|w| (vec![w.start.format("%Y-%m-%d").to_string()], w.result.clone()))
                .collect();
            render_rows(f, &["window_start"], &rows)
        }
    };
    write_output(&bytes, &args.output, stdout)
}

fn run_summarize(args: SummarizeArgs, stdout: &mut dyn Write) -> CliResult<()> {
    require_path(&args.cases)?;
    let cases = read_cases(&args.cases, &args.input)?;
    let summary = summarize_cases(&cases);
    let format: Format = args.output.format.into();
    let bytes = match format {
        Format::Json => json_bytes(&summary),
        Format::Csv => {
            let mut out = format!(
                "kind,period,value\npeak,{},{}\n",
                summary.peak_date.format("%Y-%m-%d"),
                summary.peak_value
            );
            for m in &summary.monthly {
                out.push_str(&format!("month,{:04}-{:02},{}\n", m.year, m.month, m.total));
            }
            out.into_bytes()
        }
        Format::Markdown => {
            let mut out = format!(
                "Peak: {} on {}\n\n| Month | Total |\n|---|---:|\n",
                summary.peak_value,
                summary.peak_date.format("%Y-%m-%d")
            );
            for m in &summary.monthly {
                out.push_str(&format!("| {:04}-{:02} | {} |\n", m.year, m.month, m.total));
            }
            out.into_bytes()
        }
    };
    write_output(&bytes, &args.output, stdout)
}

fn run_synth(args: SynthArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let targets = if args.reference_set {
        synth::reference_targets()
    } else if args.target.is_empty() {
        return Err(CliError::usage("give --reference-set or at least one --target"));
    } else {
        args.target
    };
    let spec = StudyFixtureSpec {
        start: args.start,
        n_days: args.days,
        case_curve: match args.curve {
            CurveArg::Unimodal => synth::CaseCurve::UnimodalPeak,
            CurveArg::Bimodal => synth::CaseCurve::Bimodal,
            CurveArg::Flat => synth::CaseCurve::Flat,
        },
        case_jitter: args.case_jitter,
        noise_scale: args.noise,
        seed: args.seed,
    };
    let fixture = generate_study_fixture(&targets, &spec).map_err(CliError::usage)?;
    fixture.write_to(&args.out_dir)?;
    writeln!(
        stdout,
        "{}",
        args.out_dir.join(synth::MANIFEST_FILE).display()
    )?;
    Ok(())
}

fn run_validate(args: ValidateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if args.manifest.is_none() && args.trends_dir.is_none() && args.cases.is_none() {
        return Err(CliError::usage("nothing to validate"));
    }
    if let Some(p) = &args.manifest {
        require_path(p)?;
        let m = read_manifest(p)?;
        writeln!(
            stdout,
            "manifest: {} entries, {} variants",
            m.entries.len(),
            m.variant_count()
        )?;
    }
    if let Some(p) = &args.trends_dir {
        require_path(p)?;
        let series = read_trends_dir(p, &args.input)?;
        writeln!(stdout, "trends: {} series", series.len())?;
    }
    if let Some(p) = &args.cases {
        require_path(p)?;
        let c = read_cases(p, &args.input)?;
        writeln!(
            stdout,
            "cases: {} days, {} .. {}",
            c.len(),
            c.start().format("%Y-%m-%d"),
            c.end().format("%Y-%m-%d")
        )?;
    }
    Ok(())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Study(a) => run_study_cmd(a, stdout),
        Command::Correlate(a) => run_correlate(a, stdout),
        Command::LagScan(a) => run_lag_scan(a, stdout),
        Command::Rolling(a) => run_rolling(a, stdout),
        Command::SummarizeCases(a) => run_summarize(a, stdout),
        Command::Synth(a) => run_synth(a, stdout),
        Command::Validate(a) => run_validate(a, stdout),
    }
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
