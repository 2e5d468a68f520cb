//! Parsers for search-trend exports, case-report CSVs and symptom keyword
//! manifests.

use std::collections::HashSet;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{fill_missing, DailySeries, MissingPolicy, SeriesError};

/// Value substituted for `<1` cells by default: the midpoint of [0, 1).
pub const DEFAULT_CENSORED_VALUE: f64 = 0.5;
pub const TRENDS_DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}, column `{column}`: non-numeric cell `{cell}`")]
    NonNumericCell {
        line: u64,
        column: String,
        cell: String,
    },
    #[error("line {line}, column `{column}`: value {value} outside [0, 100]")]
    ValueOutOfRange { line: u64, column: String, value: f64 },
    #[error("line {line}: cannot parse date `{cell}`")]
    UnparsableDate { line: u64, cell: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: negative count {value}")]
    NegativeCount { line: u64, value: f64 },
    #[error("duplicate manifest id `{0}`")]
    DuplicateId(String),
    #[error("manifest entry `{0}` has no variants")]
    EmptyVariants(String),
    #[error("manifest entry `{id}` repeats variant `{variant}`")]
    DuplicateVariant { id: String, variant: String },
    #[error("malformed manifest: {0}")]
    MalformedDocument(String),
    #[error("invalid censored value {0}; must lie in [0, 1]")]
    InvalidCensoredValue(f64),
    #[error("`{label}`: {source}")]
    Series {
        label: String,
        #[source]
        source: SeriesError,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendsOptions {
    pub censored_value: f64,
    pub missing: MissingPolicy,
}

impl Default for TrendsOptions {
    fn default() -> Self {
        Self {
            censored_value: DEFAULT_CENSORED_VALUE,
            missing: MissingPolicy::Error,
        }
    }
}

/// Strip the `: (<geo>)` suffix trend exports append to query headers.
pub fn strip_geo_suffix(header: &str) -> &str {
    let header = header.trim();
    if header.ends_with(')') {
        if let Some(pos) = header.rfind(": (") {
            return header[..pos].trim_end();
        }
    }
    header
}

fn first_cell(line: &str) -> &str {
    line.split(',').next().unwrap_or("").trim().trim_matches('"')
}

/// Parse a trends export: an optional preamble (e.g. `Category: ...`)
/// terminated by a blank line, a `Day,<query>: (<geo>),...` header and one
/// row per day. Returns one series per query column, in header order.
pub fn parse_trends_csv<R: Read>(
    mut reader: R,
    opts: &TrendsOptions,
) -> Result<Vec<DailySeries>, IngestError> {
    if !(0.0..=1.0).contains(&opts.censored_value) {
        return Err(IngestError::InvalidCensoredValue(opts.censored_value));
    }
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);

    let lines: Vec<&str> = text.lines().collect();
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| IngestError::MalformedHeader("empty file".into()))?;
    let header_idx = if first_cell(lines[first]) == "Day" {
        first
    } else {
        let blank = lines[first..]
            .iter()
            .position(|l| l.trim().is_empty())
            .map(|p| p + first)
            .ok_or_else(|| IngestError::MalformedHeader("no `Day` header row".into()))?;
        lines[blank..]
            .iter()
            .position(|l| !l.trim().is_empty())
            .map(|p| p + blank)
            .ok_or_else(|| IngestError::MalformedHeader("no header after preamble".into()))?
    };
    // line numbers reported 1-based relative to the whole file
    let line_base = header_idx as u64;
    let body = lines[header_idx..].join("\n");

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("Day") {
        return Err(IngestError::MalformedHeader(format!(
            "first column must be `Day`, found `{}`",
            headers.get(0).unwrap_or("")
        )));
    }
    if headers.len() < 2 {
        return Err(IngestError::MalformedHeader("no query columns".into()));
    }
    let labels: Vec<String> = headers
        .iter()
        .skip(1)
        .map(|h| strip_geo_suffix(h).to_string())
        .collect();

    let mut columns: Vec<Vec<(NaiveDate, f64)>> = vec![Vec::new(); labels.len()];
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = line_base + row_idx as u64 + 2;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let date_cell = record.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, TRENDS_DATE_FORMAT).map_err(|_| {
            IngestError::UnparsableDate {
                line,
                cell: date_cell.to_string(),
            }
        })?;
        for (col, label) in labels.iter().enumerate() {
            let cell = record.get(col + 1).unwrap_or("");
            let value = parse_rsv_cell(cell, opts.censored_value).ok_or_else(|| {
                IngestError::NonNumericCell {
                    line,
                    column: label.clone(),
                    cell: cell.to_string(),
                }
            })?;
            if !(0.0..=100.0).contains(&value) {
                return Err(IngestError::ValueOutOfRange {
                    line,
                    column: label.clone(),
                    value,
                });
            }
            columns[col].push((date, value));
        }
    }

    labels
        .into_iter()
        .zip(columns)
        .map(|(label, raw)| {
            fill_missing(label.clone(), &raw, opts.missing)
                .map_err(|source| IngestError::Series { label, source })
        })
        .collect()
}

fn parse_rsv_cell(cell: &str, censored: f64) -> Option<f64> {
    if cell == "<1" {
        return Some(censored);
    }
    let v: f64 = cell.parse().ok()?;
    v.is_finite().then_some(v)
}

/// Column names and date pattern of a case-report CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseColumnMap {
    pub date_column: String,
    pub value_column: String,
    pub date_format: String,
}

impl Default for CaseColumnMap {
    fn default() -> Self {
        Self {
            date_column: "date".into(),
            value_column: "cases".into(),
            date_format: TRENDS_DATE_FORMAT.into(),
        }
    }
}

/// Parse daily new confirmed cases from a CSV with a header row.
pub fn parse_cases_csv<R: Read>(
    reader: R,
    map: &CaseColumnMap,
    policy: MissingPolicy,
) -> Result<DailySeries, IngestError> {
    if map.date_column.is_empty() || map.value_column.is_empty() {
        return Err(IngestError::MalformedHeader("empty column name in map".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let date_col = find(&map.date_column)?;
    let value_col = find(&map.value_column)?;

    let mut raw = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i as u64 + 2;
        let date_cell = record.get(date_col).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, &map.date_format).map_err(|_| {
            IngestError::UnparsableDate {
                line,
                cell: date_cell.to_string(),
            }
        })?;
        let cell = record.get(value_col).unwrap_or("");
        let value: f64 = cell
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| IngestError::NonNumericCell {
                line,
                column: map.value_column.clone(),
                cell: cell.to_string(),
            })?;
        if value < 0.0 {
            return Err(IngestError::NegativeCount { line, value });
        }
        raw.push((date, value));
    }
    fill_missing(map.value_column.clone(), &raw, policy).map_err(|source| IngestError::Series {
        label: map.value_column.clone(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub display_name: String,
    pub language: String,
    pub variants: Vec<String>,
}

/// Named keyword groups: symptom id to query-string variants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymptomManifest {
    pub entries: Vec<ManifestEntry>,
}

impl SymptomManifest {
    pub fn variant_count(&self) -> usize {
        self.entries.iter().map(|e| e.variants.len()).sum()
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let mut ids = HashSet::new();
        for e in &self.entries {
            if !is_slug(&e.id) {
                return Err(IngestError::MalformedDocument(format!(
                    "id `{}` is not an ascii slug",
                    e.id
                )));
            }
            if e.language.trim().is_empty() {
                return Err(IngestError::MalformedDocument(format!(
                    "entry `{}` has an empty language tag",
                    e.id
                )));
            }
            if !ids.insert(e.id.as_str()) {
                return Err(IngestError::DuplicateId(e.id.clone()));
            }
            if e.variants.is_empty() {
                return Err(IngestError::EmptyVariants(e.id.clone()));
            }
            let mut seen = HashSet::new();
            for v in &e.variants {
                if !seen.insert(v.as_str()) {
                    return Err(IngestError::DuplicateVariant {
                        id: e.id.clone(),
                        variant: v.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

fn is_slug(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

/// Parse and validate a JSON manifest.
pub fn parse_manifest<R: Read>(reader: R) -> Result<SymptomManifest, IngestError> {
    let manifest: SymptomManifest = serde_json::from_reader(reader)
        .map_err(|e| IngestError::MalformedDocument(e.to_string()))?;
    manifest.validate()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPORT: &str = "Category: All categories\n\nDay,fever: (Saudi Arabia),cough: (Saudi Arabia)\n2020-03-02,57,<1\n2020-03-03,<1,100\n";

    #[test]
    fn trends_with_preamble() {
        let out = parse_trends_csv(EXPORT.as_bytes(), &TrendsOptions::default()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].label(), "fever");
        assert_eq!(out[0].values(), &[57.0, 0.5]);
        assert_eq!(out[1].values(), &[0.5, 100.0]);
        assert_eq!(out[0].start(), NaiveDate::from_ymd_opt(2020, 3, 2).unwrap());
    }

    #[test]
    fn trends_without_preamble_and_crlf() {
        let text = "Day,حمى: (Saudi Arabia)\r\n2020-03-02,57\r\n2020-03-03,<1\r\n";
        let opts = TrendsOptions {
            censored_value: 0.0,
            ..Default::default()
        };
        let out = parse_trends_csv(text.as_bytes(), &opts).unwrap();
        assert_eq!(out[0].label(), "حمى");
        assert_eq!(out[0].values(), &[57.0, 0.0]);
    }

    #[test]
    fn trends_errors() {
        let no_day = "Category: All\n\nDate,fever: (SA)\n2020-03-02,5\n";
        assert!(matches!(
            parse_trends_csv(no_day.as_bytes(), &TrendsOptions::default()),
            Err(IngestError::MalformedHeader(_))
        ));
        let big = "Day,fever: (SA)\n2020-03-02,135\n";
        assert!(matches!(
            parse_trends_csv(big.as_bytes(), &TrendsOptions::default()),
            Err(IngestError::ValueOutOfRange { value, .. }) if value == 135.0
        ));
        let text = "Day,fever: (SA)\n2020-03-02,abc\n";
        assert!(matches!(
            parse_trends_csv(text.as_bytes(), &TrendsOptions::default()),
            Err(IngestError::NonNumericCell { line: 2, .. })
        ));
        let gap = "Day,fever: (SA)\n2020-03-02,1\n2020-03-04,3\n";
        assert!(matches!(
            parse_trends_csv(gap.as_bytes(), &TrendsOptions::default()),
            Err(IngestError::Series {
                source: SeriesError::GapFound { .. },
                ..
            })
        ));
        let filled = parse_trends_csv(
            gap.as_bytes(),
            &TrendsOptions {
                missing: MissingPolicy::Linear,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(filled[0].values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn geo_suffix() {
        assert_eq!(strip_geo_suffix("fever: (Saudi Arabia)"), "fever");
        assert_eq!(strip_geo_suffix("fever"), "fever");
        assert_eq!(strip_geo_suffix("a: b: (Worldwide)"), "a: b");
    }

    #[test]
    fn cases_basic() {
        let text = "date,cases\n2020-03-02,1\n2020-03-03,0\n";
        let s = parse_cases_csv(text.as_bytes(), &CaseColumnMap::default(), MissingPolicy::Error)
            .unwrap();
        assert_eq!(s.values(), &[1.0, 0.0]);
    }

    #[test]
    fn cases_custom_columns() {
        let text = "region,day,new\nall,02/03/2020,4\nall,03/03/2020,9\n";
        let map = CaseColumnMap {
            date_column: "day".into(),
            value_column: "new".into(),
            date_format: "%d/%m/%Y".into(),
        };
        let s = parse_cases_csv(text.as_bytes(), &map, MissingPolicy::Error).unwrap();
        assert_eq!(s.values(), &[4.0, 9.0]);
        assert_eq!(s.start(), NaiveDate::from_ymd_opt(2020, 3, 2).unwrap());
    }

    #[test]
    fn cases_errors() {
        let neg = "date,cases\n2020-03-02,-4\n";
        assert!(matches!(
            parse_cases_csv(neg.as_bytes(), &CaseColumnMap::default(), MissingPolicy::Error),
            Err(IngestError::NegativeCount { value, .. }) if value == -4.0
        ));
        let missing = "date,deaths\n2020-03-02,4\n";
        assert!(matches!(
            parse_cases_csv(missing.as_bytes(), &CaseColumnMap::default(), MissingPolicy::Error),
            Err(IngestError::MissingColumn(c)) if c == "cases"
        ));
        let bad_date = "date,cases\nMarch 2,4\n";
        assert!(matches!(
            parse_cases_csv(bad_date.as_bytes(), &CaseColumnMap::default(), MissingPolicy::Error),
            Err(IngestError::UnparsableDate { .. })
        ));
    }

    fn entry(id: &str, variants: &[&str]) -> ManifestEntry {
        ManifestEntry {
            id: id.into(),
            display_name: id.into(),
            language: "ar".into(),
            variants: variants.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn manifest_validation() {
        let dup = SymptomManifest {
            entries: vec![entry("fever", &["a"]), entry("fever", &["b"])],
        };
        assert!(matches!(
            parse_manifest(dup.to_json().as_bytes()),
            Err(IngestError::DuplicateId(id)) if id == "fever"
        ));
        let empty = r#"{"entries":[{"id":"fever","display_name":"Fever","language":"ar","variants":[]}]}"#;
        assert!(matches!(
            parse_manifest(empty.as_bytes()),
            Err(IngestError::EmptyVariants(_))
        ));
        let repeat = SymptomManifest {
            entries: vec![entry("fever", &["a", "a"])],
        };
        assert!(matches!(
            parse_manifest(repeat.to_json().as_bytes()),
            Err(IngestError::DuplicateVariant { .. })
        ));
        assert!(matches!(
            parse_manifest("{\"entries\": 3}".as_bytes()),
            Err(IngestError::MalformedDocument(_))
        ));
    }
}
