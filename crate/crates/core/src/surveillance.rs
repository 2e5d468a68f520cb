//! The end-to-end study: keyword variants are summed into per-symptom
//! signals, the signals into an all-symptoms composite, and each signal is
//! rank-correlated with cases at daily and weekly resolution.

use std::collections::HashMap;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::SymptomManifest;
use crate::series::{resample_weekly, AlignedPair, DailySeries, SeriesError, WeeklyMode};
use crate::stats::{
    correlate, lag_scan, CorrelationOptions, CorrelationResult, PValueMethod, StatsError,
    Alternative, DEFAULT_MIN_OVERLAP,
};

pub const ALL_SYMPTOMS_ID: &str = "all_symptoms";
pub const ALL_SYMPTOMS_NAME: &str = "All Symptoms";

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),
    #[error("no input series")]
    EmptyInput,
    #[error("series ranges differ")]
    RangeMismatch,
    #[error("symptom `{symptom}`: no trend series for variant `{variant}`")]
    MissingVariant { symptom: String, variant: String },
    #[error("two trend series share the label `{0}`")]
    DuplicateSeries(String),
    #[error("symptom `{symptom}`: {source}")]
    Symptom {
        symptom: String,
        #[source]
        source: Box<StudyError>,
    },
    #[error("`{label}` does not cover the study period: {source}")]
    Coverage {
        label: String,
        #[source]
        source: SeriesError,
    },
}

impl StudyError {
    fn for_symptom(self, id: &str) -> Self {
        match self {
            Self::MissingVariant { .. } | Self::Symptom { .. } => self,
            other => Self::Symptom {
                symptom: id.to_string(),
                source: Box::new(other),
            },
        }
    }
}

/// Per-symptom search signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymptomSignal {
    pub symptom_id: String,
    pub daily: DailySeries,
    pub total_rsv: f64,
}

/// Element-wise sum of a symptom's variant series.
pub fn aggregate_symptom(
    symptom_id: &str,
    variants: &[&DailySeries],
) -> Result<SymptomSignal, StudyError> {
    let (first, rest) = variants.split_first().ok_or(StudyError::EmptyInput)?;
    if rest.iter().any(|v| !v.same_range(first)) {
        return Err(StudyError::RangeMismatch);
    }
    let mut values = first.values().to_vec();
    for v in rest {
        for (acc, x) in values.iter_mut().zip(v.values()) {
            *acc += x;
        }
    }
    let daily = DailySeries::new(symptom_id, first.start(), values)
        .expect("sum of valid series is valid");
    Ok(SymptomSignal {
        symptom_id: symptom_id.to_string(),
        total_rsv: daily.sum(),
        daily,
    })
}

/// Element-wise sum of symptom signals, labelled `all_symptoms`.
pub fn composite_all_symptoms(signals: &[&SymptomSignal]) -> Result<SymptomSignal, StudyError> {
    let series: Vec<&DailySeries> = signals.iter().map(|s| &s.daily).collect();
    aggregate_symptom(ALL_SYMPTOMS_ID, &series)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NotSignificant,
    WeakSignificant,
    ModerateSignificant,
    HighSignificant,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::NotSignificant => "not_significant",
            Self::WeakSignificant => "weak_significant",
            Self::ModerateSignificant => "moderate_significant",
            Self::HighSignificant => "high_significant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub high: f64,
    pub moderate: f64,
    pub alpha: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            high: 0.5,
            moderate: 0.3,
            alpha: 0.05,
        }
    }
}

/// Significance first, then strength band by |r|.
pub fn classify(r: f64, p: f64, t: &Thresholds) -> Classification {
    if !(p < t.alpha) {
        return Classification::NotSignificant;
    }
    let strength = r.abs();
    if strength > t.high {
        Classification::HighSignificant
    } else if strength >= t.moderate {
        Classification::ModerateSignificant
    } else {
        Classification::WeakSignificant
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub p_method: PValueMethod,
    #[serde(default)]
    pub alternative: Alternative,
    pub weekly_mode: WeeklyMode,
    pub thresholds: Thresholds,
    pub max_lag: u32,
    pub min_overlap: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2020, 3, 2).unwrap(),
            end: NaiveDate::from_ymd_opt(2020, 10, 31).unwrap(),
            p_method: PValueMethod::TApprox,
            alternative: Alternative::TwoSided,
            weekly_mode: WeeklyMode::Mean,
            thresholds: Thresholds::default(),
            max_lag: 0,
            min_overlap: DEFAULT_MIN_OVERLAP,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        let t = &self.thresholds;
        let bad = |msg: &str| Err(StudyError::InvalidConfig(msg.to_string()));
        if self.start >= self.end {
            return bad("period start must precede end");
        }
        if !(0.0 < t.moderate && t.moderate < t.high && t.high <= 1.0) {
            return bad("thresholds must satisfy 0 < moderate < high <= 1");
        }
        if !(0.0 < t.alpha && t.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn period_days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    fn options(&self, stream: u64) -> CorrelationOptions {
        CorrelationOptions {
            method: self.p_method.for_stream(stream),
            alternative: self.alternative,
        }
    }
}

pub type Outcome = Result<CorrelationResult, StatsError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub id: String,
    pub display_name: String,
    pub daily: Outcome,
    pub weekly: Outcome,
    pub class_daily: Option<Classification>,
    pub class_weekly: Option<Classification>,
    pub total_rsv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    /// One row per manifest entry, in manifest order.
    pub rows: Vec<StudyRow>,
    pub all_symptoms: StudyRow,
    pub n_daily: usize,
    pub n_weekly: usize,
    pub config: StudyConfig,
}

impl StudyReport {
    /// Symptom rows followed by the all-symptoms row.
    pub fn all_rows(&self) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().chain(std::iter::once(&self.all_symptoms))
    }
}

/// Signals and cases restricted to the study period.
#[derive(Debug, Clone)]
pub struct PreparedStudy {
    /// `(display name, signal)` per manifest entry, in manifest order.
    pub signals: Vec<(String, SymptomSignal)>,
    pub composite: SymptomSignal,
    pub cases: DailySeries,
}

impl PreparedStudy {
    pub fn panels(&self) -> impl Iterator<Item = &SymptomSignal> {
        self.signals
            .iter()
            .map(|(_, s)| s)
            .chain(std::iter::once(&self.composite))
    }
}

/// Look up every manifest variant among `trends` (matched by label), clip to
/// the period and build the symptom signals.
pub fn prepare_study(
    manifest: &SymptomManifest,
    trends: &[DailySeries],
    cases: &DailySeries,
    config: &StudyConfig,
) -> Result<PreparedStudy, StudyError> {
    config.validate()?;
    let mut by_label: HashMap<&str, &DailySeries> = HashMap::new();
    for s in trends {
        if by_label.insert(s.label(), s).is_some() {
            return Err(StudyError::DuplicateSeries(s.label().to_string()));
        }
    }
    let clip = |s: &DailySeries| {
        s.slice(config.start, config.end)
            .map_err(|source| StudyError::Coverage {
                label: s.label().to_string(),
                source,
            })
    };

    let signals = manifest
        .entries
        .iter()
        .map(|entry| {
            let clipped = entry
                .variants
                .iter()
                .map(|v| {
                    let s = by_label.get(v.as_str()).ok_or_else(|| StudyError::MissingVariant {
                        symptom: entry.id.clone(),
                        variant: v.clone(),
                    })?;
                    clip(s)
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.for_symptom(&entry.id))?;
            let refs: Vec<&DailySeries> = clipped.iter().collect();
            let signal =
                aggregate_symptom(&entry.id, &refs).map_err(|e| e.for_symptom(&entry.id))?;
            Ok((entry.display_name.clone(), signal))
        })
        .collect::<Result<Vec<_>, StudyError>>()?;

    let refs: Vec<&SymptomSignal> = signals.iter().map(|(_, s)| s).collect();
    let composite = composite_all_symptoms(&refs)?;
    Ok(PreparedStudy {
        signals,
        composite,
        cases: clip(cases)?,
    })
}

fn weekly_outcome(signal: &DailySeries, cases: &DailySeries, config: &StudyConfig, stream: u64) -> Outcome {
    let to_stats = |e: SeriesError| match e {
        SeriesError::TooShort { len, min } => StatsError::TooFewSamples { n: len, min },
        _ => StatsError::TooFewSamples { n: 0, min: 3 },
    };
    let ws = resample_weekly(signal, config.weekly_mode).map_err(to_stats)?;
    let wc = resample_weekly(cases, WeeklyMode::Sum).map_err(to_stats)?;
    let pair = AlignedPair::from_weekly(&ws, &wc).map_err(to_stats)?;
    correlate(&pair, &config.options(stream))
}

fn daily_outcome(signal: &DailySeries, cases: &DailySeries, config: &StudyConfig, stream: u64) -> Outcome {
    let opts = config.options(stream);
    if config.max_lag > 0 {
        return lag_scan(signal, cases, config.max_lag, config.min_overlap, &opts).map(|r| r.best);
    }
    let pair = AlignedPair::from_values(signal.start(), signal.values().to_vec(), cases.values().to_vec())
        .map_err(|_| StatsError::TooFewSamples {
            n: signal.len(),
            min: 3,
        })?;
    correlate(&pair, &opts)
}

fn evaluate_row(
    id: &str,
    display_name: &str,
    signal: &SymptomSignal,
    cases: &DailySeries,
    config: &StudyConfig,
    index: u64,
) -> StudyRow {
    let daily = daily_outcome(&signal.daily, cases, config, 2 * index);
    let weekly = weekly_outcome(&signal.daily, cases, config, 2 * index + 1);
    let class = |o: &Outcome| {
        o.as_ref()
            .ok()
            .map(|r| classify(r.rho, r.p_value, &config.thresholds))
    };
    StudyRow {
        id: id.to_string(),
        display_name: display_name.to_string(),
        class_daily: class(&daily),
        class_weekly: class(&weekly),
        daily,
        weekly,
        total_rsv: signal.total_rsv,
    }
}

/// Correlate every prepared signal with cases.
pub fn evaluate_study(prepared: &PreparedStudy, config: &StudyConfig) -> StudyReport {
    let rows: Vec<StudyRow> = prepared
        .signals
        .par_iter()
        .enumerate()
        .map(|(i, (name, signal))| {
            evaluate_row(&signal.symptom_id, name, signal, &prepared.cases, config, i as u64)
        })
        .collect();
    let all_symptoms = evaluate_row(
        ALL_SYMPTOMS_ID,
        ALL_SYMPTOMS_NAME,
        &prepared.composite,
        &prepared.cases,
        config,
        rows.len() as u64,
    );
    let n_daily = config.period_days();
    StudyReport {
        rows,
        all_symptoms,
        n_daily,
        n_weekly: n_daily / 7,
        config: config.clone(),
    }
}

/// Daily and weekly correlations of every symptom signal (and the
/// all-symptoms composite) against cases over the configured period.
pub fn run_study(
    manifest: &SymptomManifest,
    trends: &[DailySeries],
    cases: &DailySeries,
    config: &StudyConfig,
) -> Result<StudyReport, StudyError> {
    let prepared = prepare_study(manifest, trends, cases, config)?;
    Ok(evaluate_study(&prepared, config))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthTotal {
    pub year: i32,
    pub month: u32,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub peak_date: NaiveDate,
    pub peak_value: f64,
    pub monthly: Vec<MonthTotal>,
}

impl CaseSummary {
    pub fn month(&self, year: i32, month: u32) -> Option<f64> {
        self.monthly
            .iter()
            .find(|m| m.year == year && m.month == month)
            .map(|m| m.total)
    }
}

/// Peak day (earliest on ties) and calendar-month totals.
pub fn summarize_cases(cases: &DailySeries) -> CaseSummary {
    let (mut peak_date, mut peak_value) = (cases.start(), cases.values()[0]);
    let mut monthly: Vec<MonthTotal> = Vec::new();
    for (date, v) in cases.iter() {
        if v > peak_value {
            peak_value = v;
            peak_date = date;
        }
        match monthly.last_mut() {
            Some(m) if m.year == date.year() && m.month == date.month() => m.total += v,
            _ => monthly.push(MonthTotal {
                year: date.year(),
                month: date.month(),
                total: v,
            }),
        }
    }
    CaseSummary {
        peak_date,
        peak_value,
        monthly,
    }
}
