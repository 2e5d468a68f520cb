//! Table and plot-data rendering for study reports.
//!
//! Numbers are formatted once (rho to 3 decimals, p to 3 significant
//! digits) and shared by every format, so renders of one report agree
//! numerically and are byte-stable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::series::DailySeries;
use crate::stats::{CorrelationResult, PMethodKind};
use crate::surveillance::{Classification, Outcome, PreparedStudy, StudyConfig, StudyReport, StudyRow, SymptomSignal};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("signal and case series cover different dates")]
    RangeMismatch,
    #[error("write failed: {0}")]
    IoFailure(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderTarget {
    pub format: Format,
    pub destination: Destination,
}

pub fn format_rho(rho: f64) -> String {
    let s = format!("{rho:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn format_p(p: f64) -> String {
    format!("{p:.2e}")
}

const NA: &str = "NA";
pub const TABLE_COLUMNS: [&str; 8] = [
    "symptom",
    "daily_r",
    "daily_p",
    "weekly_r",
    "weekly_p",
    "class_daily",
    "class_weekly",
    "total_rsv",
];

fn cells(o: &Outcome) -> (String, String) {
    match o {
        Ok(r) => (format_rho(r.rho), format_p(r.p_value)),
        Err(_) => (NA.into(), NA.into()),
    }
}

fn class_cell(class: Option<Classification>, o: &Outcome) -> String {
    match (class, o) {
        (Some(c), _) => c.as_str().into(),
        (None, Err(e)) => format!("error:{}", e.kind()),
        (None, Ok(_)) => NA.into(),
    }
}

fn table_row(row: &StudyRow) -> [String; 8] {
    let (dr, dp) = cells(&row.daily);
    let (wr, wp) = cells(&row.weekly);
    [
        row.display_name.clone(),
        dr,
        dp,
        wr,
        wp,
        class_cell(row.class_daily, &row.daily),
        class_cell(row.class_weekly, &row.weekly),
        row.total_rsv.to_string(),
    ]
}

#[derive(Serialize)]
struct RawValues {
    rho: f64,
    p_value: f64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum JsonCell {
    Value {
        r: f64,
        p: f64,
        n: usize,
        method: PMethodKind,
        lag_days: i64,
        degenerate: bool,
        raw: RawValues,
    },
    Error {
        error: &'static str,
        message: String,
    },
}

impl JsonCell {
    fn from_outcome(o: &Outcome) -> Self {
        match o {
            Ok(r) => Self::value(r),
            Err(e) => Self::Error {
                error: e.kind(),
                message: e.to_string(),
            },
        }
    }

    fn value(r: &CorrelationResult) -> Self {
        Self::Value {
            r: format_rho(r.rho).parse().expect("formatted float"),
            p: format_p(r.p_value).parse().expect("formatted float"),
            n: r.n,
            method: r.method,
            lag_days: r.lag_days,
            degenerate: r.degenerate,
            raw: RawValues {
                rho: r.rho,
                p_value: r.p_value,
            },
        }
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    id: &'a str,
    symptom: &'a str,
    daily: JsonCell,
    weekly: JsonCell,
    class_daily: Option<Classification>,
    class_weekly: Option<Classification>,
    total_rsv: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    n_daily: usize,
    n_weekly: usize,
    config: &'a StudyConfig,
    rows: Vec<JsonRow<'a>>,
}

fn render_csv(report: &StudyReport) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(TABLE_COLUMNS).expect("in-memory write");
    for row in report.all_rows() {
        w.write_record(table_row(row)).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn render_json(report: &StudyReport) -> Vec<u8> {
    let doc = JsonReport {
        n_daily: report.n_daily,
        n_weekly: report.n_weekly,
        config: &report.config,
        rows: report
            .all_rows()
            .map(|r| JsonRow {
                id: &r.id,
                symptom: &r.display_name,
                daily: JsonCell::from_outcome(&r.daily),
                weekly: JsonCell::from_outcome(&r.weekly),
                class_daily: r.class_daily,
                class_weekly: r.class_weekly,
                total_rsv: r.total_rsv,
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("report serializes");
    out.push(b'\n');
    out
}

fn render_markdown(report: &StudyReport) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(
        "| Symptom | Daily r | Daily p | Weekly r | Weekly p | Class (daily) | Class (weekly) | Total RSV |\n",
    );
    out.push_str("|---|---:|---:|---:|---:|---|---|---:|\n");
    for row in report.all_rows() {
        let cells = table_row(row).map(|c| c.replace('|', "\\|"));
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    out.push_str(&format!(
        "\nn_daily = {}, n_weekly = {}\n",
        report.n_daily, report.n_weekly
    ));
    out.into_bytes()
}

/// Render the per-symptom correlation table.
pub fn render_table(report: &StudyReport, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => render_csv(report),
        Format::Json => render_json(report),
        Format::Markdown => render_markdown(report),
    }
}

pub fn emit(bytes: &[u8], destination: &Destination) -> Result<(), ReportError> {
    match destination {
        Destination::Stdout => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Destination::File(path) => fs::write(path, bytes)?,
    }
    Ok(())
}

pub fn render_table_to(report: &StudyReport, target: &RenderTarget) -> Result<(), ReportError> {
    emit(&render_table(report, target.format), &target.destination)
}

/// Long-format `date,series,value` rows: the signal, then the cases.
pub fn render_plot_data(signal: &SymptomSignal, cases: &DailySeries) -> Result<Vec<u8>, ReportError> {
    if !signal.daily.same_range(cases) {
        return Err(ReportError::RangeMismatch);
    }
    let mut out = String::from("date,series,value\n");
    for (label, series) in [(signal.symptom_id.as_str(), &signal.daily), ("cases", cases)] {
        for (date, v) in series.iter() {
            out.push_str(&format!("{},{},{}\n", date.format("%Y-%m-%d"), label, v));
        }
    }
    Ok(out.into_bytes())
}

/// One `panel_<id>.csv` per symptom plus the all-symptoms composite.
pub fn write_plot_panels(prepared: &PreparedStudy, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir)?;
    prepared
        .panels()
        .map(|signal| {
            let path = dir.join(format!("panel_{}.csv", signal.symptom_id));
            fs::write(&path, render_plot_data(signal, &prepared.cases)?)?;
            Ok(path)
        })
        .collect()
}
