//! Date-indexed daily series, pairwise alignment, gap filling and weekly
//! resampling.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum number of paired observations accepted by [`AlignedPair`].
pub const MIN_PAIR_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series `{0}` is empty")]
    Empty(String),
    #[error("date ranges do not overlap")]
    DisjointRanges,
    #[error("series too short: {len} points, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("gap in dates: no value between {after} and {before}")]
    GapFound { after: NaiveDate, before: NaiveDate },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("dates not sorted: {next} follows {prev}")]
    UnsortedDates { prev: NaiveDate, next: NaiveDate },
    #[error("series lengths or start dates differ")]
    RangeMismatch,
    #[error("non-finite or negative value {value} on {date}")]
    InvalidValue { date: NaiveDate, value: f64 },
}

/// How `fill_missing` treats calendar days absent from the raw input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    #[default]
    Error,
    Zero,
    Linear,
}

impl std::str::FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(Self::Error),
            "zero" => Ok(Self::Zero),
            "linear" => Ok(Self::Linear),
            other => Err(format!("unknown missing-data policy `{other}`")),
        }
    }
}

/// A contiguous run of daily values starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    start: NaiveDate,
    values: Vec<f64>,
    label: String,
}

impl DailySeries {
    pub fn new(
        label: impl Into<String>,
        start: NaiveDate,
        values: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        let label = label.into();
        if values.is_empty() {
            return Err(SeriesError::Empty(label));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(SeriesError::InvalidValue {
                    date: start + Duration::days(i as i64),
                    value: v,
                });
            }
        }
        Ok(Self {
            start,
            values,
            label,
        })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    /// Last covered date (inclusive).
    pub fn end(&self) -> NaiveDate {
        self.start + Duration::days(self.values.len() as i64 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start + Duration::days(index as i64)
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        let offset = (date - self.start).num_days();
        if offset < 0 {
            return None;
        }
        self.values.get(offset as usize).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.date_at(i), v))
    }

    /// Restrict to `[from, to]` (inclusive). Errors unless the series covers
    /// the whole window.
    pub fn slice(&self, from: NaiveDate, to: NaiveDate) -> Result<Self, SeriesError> {
        if from > to || from < self.start || to > self.end() {
            return Err(SeriesError::RangeMismatch);
        }
        let lo = (from - self.start).num_days() as usize;
        let hi = (to - self.start).num_days() as usize;
        Ok(Self {
            start: from,
            values: self.values[lo..=hi].to_vec(),
            label: self.label.clone(),
        })
    }

    /// Same values relabelled to begin `days` later (negative moves earlier).
    pub fn shifted(&self, days: i64) -> Self {
        Self {
            start: self.start + Duration::days(days),
            values: self.values.clone(),
            label: self.label.clone(),
        }
    }

    /// Multiply every value by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            start: self.start,
            values: self.values.iter().map(|v| v * factor).collect(),
            label: self.label.clone(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn same_range(&self, other: &DailySeries) -> bool {
        self.start == other.start && self.len() == other.len()
    }
}

/// Weekly aggregation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeeklyMode {
    Sum,
    Mean,
}

impl std::str::FromStr for WeeklyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(Self::Sum),
            "mean" => Ok(Self::Mean),
            other => Err(format!("unknown weekly mode `{other}`")),
        }
    }
}

/// Consecutive 7-day block aggregates anchored at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklySeries {
    pub start: NaiveDate,
    pub values: Vec<f64>,
    pub mode: WeeklyMode,
    pub label: String,
}

/// Two value vectors covering the same dates, ready for correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    start: NaiveDate,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl AlignedPair {
    /// Build directly from equal-length value vectors.
    pub fn from_values(start: NaiveDate, x: Vec<f64>, y: Vec<f64>) -> Result<Self, SeriesError> {
        if x.len() != y.len() {
            return Err(SeriesError::RangeMismatch);
        }
        if x.len() < MIN_PAIR_LEN {
            return Err(SeriesError::TooShort {
                len: x.len(),
                min: MIN_PAIR_LEN,
            });
        }
        Ok(Self { start, x, y })
    }

    pub fn from_weekly(a: &WeeklySeries, b: &WeeklySeries) -> Result<Self, SeriesError> {
        if a.start != b.start {
            return Err(SeriesError::RangeMismatch);
        }
        Self::from_values(a.start, a.values.clone(), b.values.clone())
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Contiguous sub-pair `[offset, offset + len)`; dates step by one unit.
    pub fn window(&self, offset: usize, len: usize) -> Result<Self, SeriesError> {
        if offset + len > self.n() {
            return Err(SeriesError::RangeMismatch);
        }
        Self::from_values(
            self.start + Duration::days(offset as i64),
            self.x[offset..offset + len].to_vec(),
            self.y[offset..offset + len].to_vec(),
        )
    }

    pub fn to_series(&self) -> Result<(DailySeries, DailySeries), SeriesError> {
        Ok((
            DailySeries::new("x", self.start, self.x.clone())?,
            DailySeries::new("y", self.start, self.y.clone())?,
        ))
    }
}

/// Restrict `a` and `b` to the intersection of their date ranges.
pub fn align_pair(a: &DailySeries, b: &DailySeries) -> Result<AlignedPair, SeriesError> {
    let start = a.start().max(b.start());
    let end = a.end().min(b.end());
    if start > end {
        return Err(SeriesError::DisjointRanges);
    }
    let n = (end - start).num_days() as usize + 1;
    if n < MIN_PAIR_LEN {
        return Err(SeriesError::TooShort {
            len: n,
            min: MIN_PAIR_LEN,
        });
    }
    let ax = (start - a.start()).num_days() as usize;
    let bx = (start - b.start()).num_days() as usize;
    Ok(AlignedPair {
        start,
        x: a.values()[ax..ax + n].to_vec(),
        y: b.values()[bx..bx + n].to_vec(),
    })
}

/// Build a contiguous daily series from sparse `(date, value)` observations.
pub fn fill_missing(
    label: impl Into<String>,
    raw: &[(NaiveDate, f64)],
    policy: MissingPolicy,
) -> Result<DailySeries, SeriesError> {
    let label = label.into();
    let Some(&(first, _)) = raw.first() else {
        return Err(SeriesError::Empty(label));
    };
    for w in raw.windows(2) {
        let (prev, next) = (w[0].0, w[1].0);
        if next == prev {
            return Err(SeriesError::DuplicateDate(next));
        }
        if next < prev {
            return Err(SeriesError::UnsortedDates { prev, next });
        }
    }

    let mut values = Vec::with_capacity(raw.len());
    values.push(raw[0].1);
    for w in raw.windows(2) {
        let ((d0, v0), (d1, v1)) = (w[0], w[1]);
        let gap = (d1 - d0).num_days();
        if gap > 1 {
            match policy {
                MissingPolicy::Error => {
                    return Err(SeriesError::GapFound {
                        after: d0,
                        before: d1,
                    })
                }
                MissingPolicy::Zero => values.extend(std::iter::repeat_n(0.0, gap as usize - 1)),
                MissingPolicy::Linear => {
                    let step = (v1 - v0) / gap as f64;
                    values.extend((1..gap).map(|k| v0 + step * k as f64));
                }
            }
        }
        values.push(v1);
    }
    DailySeries::new(label, first, values)
}

/// Aggregate consecutive 7-day blocks starting at the series start date.
/// A trailing partial block is dropped.
pub fn resample_weekly(s: &DailySeries, mode: WeeklyMode) -> Result<WeeklySeries, SeriesError> {
    if s.len() < 7 {
        return Err(SeriesError::TooShort {
            len: s.len(),
            min: 7,
        });
    }
    let values = s
        .values()
        .chunks_exact(7)
        .map(|block| {
            let total: f64 = block.iter().sum();
            match mode {
                WeeklyMode::Sum => total,
                WeeklyMode::Mean => total / 7.0,
            }
        })
        .collect();
    Ok(WeeklySeries {
        start: s.start(),
        values,
        mode,
        label: s.label().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, m, day).unwrap()
    }

    fn ones(start: NaiveDate, n: usize) -> DailySeries {
        DailySeries::new("s", start, vec![1.0; n]).unwrap()
    }

    #[test]
    fn align_intersects_ranges() {
        let a = DailySeries::new("a", d(3, 1), (1..=10).map(f64::from).collect()).unwrap();
        let b = DailySeries::new("b", d(3, 5), (1..=16).map(f64::from).collect()).unwrap();
        let p = align_pair(&a, &b).unwrap();
        assert_eq!(p.start(), d(3, 5));
        assert_eq!(p.n(), 6);
        assert_eq!(p.x(), &[5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        assert_eq!(p.y(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn align_identical_is_identity() {
        let a = DailySeries::new("a", d(3, 1), vec![3.0, 1.0, 2.0, 5.0]).unwrap();
        let p = align_pair(&a, &a).unwrap();
        assert_eq!(p.x(), a.values());
        assert_eq!(p.y(), a.values());
        assert_eq!(p.start(), a.start());
    }

    #[test]
    fn align_disjoint_and_short() {
        let jan = ones(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), 31);
        let mar = ones(d(3, 1), 31);
        assert_eq!(align_pair(&jan, &mar), Err(SeriesError::DisjointRanges));
        let tail = ones(d(1, 30), 10);
        assert!(matches!(
            align_pair(&jan, &tail),
            Err(SeriesError::TooShort { len: 2, .. })
        ));
    }

    #[test]
    fn fill_dense_and_gaps() {
        let dense = [(d(3, 1), 2.0), (d(3, 2), 4.0), (d(3, 3), 6.0)];
        assert_eq!(
            fill_missing("s", &dense, MissingPolicy::Error).unwrap().values(),
            &[2.0, 4.0, 6.0]
        );
        let sparse = [(d(3, 1), 2.0), (d(3, 3), 6.0)];
        assert_eq!(
            fill_missing("s", &sparse, MissingPolicy::Linear)
                .unwrap()
                .values(),
            &[2.0, 4.0, 6.0]
        );
        assert_eq!(
            fill_missing("s", &sparse, MissingPolicy::Zero)
                .unwrap()
                .values(),
            &[2.0, 0.0, 6.0]
        );
        assert!(matches!(
            fill_missing("s", &sparse, MissingPolicy::Error),
            Err(SeriesError::GapFound { .. })
        ));
    }

    #[test]
    fn fill_rejects_bad_order() {
        let dup = [(d(3, 1), 1.0), (d(3, 1), 2.0)];
        assert_eq!(
            fill_missing("s", &dup, MissingPolicy::Zero),
            Err(SeriesError::DuplicateDate(d(3, 1)))
        );
        let unsorted = [(d(3, 2), 1.0), (d(3, 1), 2.0)];
        assert!(matches!(
            fill_missing("s", &unsorted, MissingPolicy::Zero),
            Err(SeriesError::UnsortedDates { .. })
        ));
    }

    #[test]
    fn weekly_blocks() {
        let w = resample_weekly(&ones(d(3, 2), 14), WeeklyMode::Sum).unwrap();
        assert_eq!(w.values, vec![7.0, 7.0]);
        let w = resample_weekly(&ones(d(3, 2), 16), WeeklyMode::Sum).unwrap();
        assert_eq!(w.values, vec![7.0, 7.0]);
        let s = DailySeries::new("s", d(3, 2), (1..=7).map(f64::from).collect()).unwrap();
        assert_eq!(
            resample_weekly(&s, WeeklyMode::Mean).unwrap().values,
            vec![4.0]
        );
        assert!(matches!(
            resample_weekly(&ones(d(3, 2), 6), WeeklyMode::Sum),
            Err(SeriesError::TooShort { .. })
        ));
    }

    #[test]
    fn slice_and_lookup() {
        let s = DailySeries::new("s", d(3, 1), (0..10).map(f64::from).collect()).unwrap();
        let t = s.slice(d(3, 3), d(3, 5)).unwrap();
        assert_eq!(t.values(), &[2.0, 3.0, 4.0]);
        assert_eq!(s.get(d(3, 10)), Some(9.0));
        assert_eq!(s.get(d(3, 11)), None);
        assert!(s.slice(d(2, 28), d(3, 5)).is_err());
    }

    #[test]
    fn rejects_negative_values() {
        assert!(DailySeries::new("s", d(3, 1), vec![1.0, -1.0]).is_err());
        assert!(DailySeries::new("s", d(3, 1), vec![]).is_err());
    }

    fn series_strategy() -> impl Strategy<Value = DailySeries> {
        (0i64..60, prop::collection::vec(0u32..100, 1..80)).prop_map(|(off, v)| {
            DailySeries::new(
                "p",
                d(3, 1) + Duration::days(off),
                v.into_iter().map(f64::from).collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn align_is_idempotent(a in series_strategy(), b in series_strategy()) {
            if let Ok(p) = align_pair(&a, &b) {
                let (x, y) = p.to_series().unwrap();
                let q = align_pair(&x, &y).unwrap();
                prop_assert_eq!(p, q);
            }
        }

        #[test]
        fn weekly_length_and_mode_ratio(s in series_strategy()) {
            prop_assume!(s.len() >= 7);
            let sum = resample_weekly(&s, WeeklyMode::Sum).unwrap();
            let mean = resample_weekly(&s, WeeklyMode::Mean).unwrap();
            prop_assert_eq!(sum.values.len(), s.len() / 7);
            for (a, b) in sum.values.iter().zip(&mean.values) {
                prop_assert!((a - 7.0 * b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }

        #[test]
        fn linear_fill_keeps_known_points(
            steps in prop::collection::vec((1i64..5, 0u32..100), 1..30)
        ) {
            let mut date = d(3, 1);
            let mut raw = Vec::new();
            for (gap, v) in steps {
                date += Duration::days(gap);
                raw.push((date, f64::from(v)));
            }
            let s = fill_missing("s", &raw, MissingPolicy::Linear).unwrap();
            for (dt, v) in raw {
                prop_assert_eq!(s.get(dt), Some(v));
            }
        }
    }
}
