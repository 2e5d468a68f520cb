use std::fs;

use chrono::NaiveDate;

use trendsurv::ingest::{parse_cases_csv, parse_trends_csv, CaseColumnMap, TrendsOptions};
use trendsurv::report::{render_table, write_plot_panels, Format};
use trendsurv::series::{DailySeries, MissingPolicy, WeeklyMode};
use trendsurv::stats::{PValueMethod, StatsError};
use trendsurv::surveillance::{
    classify, evaluate_study, prepare_study, run_study, summarize_cases, Classification,
    StudyConfig, StudyError, StudyReport, Thresholds,
};
use trendsurv::synth::{generate_study_fixture, reference_targets, StudyFixture, StudyFixtureSpec};

fn fixture(seed: u64) -> StudyFixture {
    let spec = StudyFixtureSpec {
        seed,
        ..Default::default()
    };
    generate_study_fixture(&reference_targets(), &spec).unwrap()
}

fn inputs(fx: &StudyFixture) -> (Vec<DailySeries>, DailySeries) {
    let mut trends = Vec::new();
    for (_, body) in &fx.trend_files {
        trends.extend(parse_trends_csv(body.as_bytes(), &TrendsOptions::default()).unwrap());
    }
    let cases =
        parse_cases_csv(fx.case_csv.as_bytes(), &CaseColumnMap::default(), MissingPolicy::Error)
            .unwrap();
    (trends, cases)
}

fn study(fx: &StudyFixture, config: &StudyConfig) -> StudyReport {
    let (trends, cases) = inputs(fx);
    run_study(&fx.manifest, &trends, &cases, config).unwrap()
}

#[test]
fn report_shape() {
    let fx = fixture(1);
    let r = study(&fx, &StudyConfig::default());
    assert_eq!(r.rows.len(), 10);
    assert_eq!(r.n_daily, 244);
    assert_eq!(r.n_weekly, 34);
    assert_eq!(r.all_symptoms.id, "all_symptoms");
    for row in r.all_rows() {
        let d = row.daily.as_ref().unwrap();
        assert_eq!(d.n, 244);
        assert_eq!(row.weekly.as_ref().unwrap().n, 34);
        assert!(row.class_daily.is_some());
    }
    let sum: f64 = r.rows.iter().map(|row| row.total_rsv).sum();
    assert_eq!(r.all_symptoms.total_rsv, sum);
}

#[test]
fn csv_and_json_agree() {
    let fx = fixture(2);
    let r = study(&fx, &StudyConfig::default());
    let csv = String::from_utf8(render_table(&r, Format::Csv)).unwrap();
    let json: serde_json::Value =
        serde_json::from_slice(&render_table(&r, Format::Json)).unwrap();
    let rows = json["rows"].as_array().unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let records: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(rows) {
        assert_eq!(&rec[0], row["symptom"].as_str().unwrap());
        let daily_r: f64 = rec[1].parse().unwrap();
        let daily_p: f64 = rec[2].parse().unwrap();
        let weekly_r: f64 = rec[3].parse().unwrap();
        assert_eq!(daily_r, row["daily"]["r"].as_f64().unwrap());
        assert_eq!(daily_p, row["daily"]["p"].as_f64().unwrap());
        assert_eq!(weekly_r, row["weekly"]["r"].as_f64().unwrap());
        assert_eq!(&rec[5], row["class_daily"].as_str().unwrap());
    }
}

#[test]
fn plot_panels_cover_every_symptom() {
    let fx = fixture(3);
    let (trends, cases) = inputs(&fx);
    let config = StudyConfig::default();
    let prepared = prepare_study(&fx.manifest, &trends, &cases, &config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_plot_panels(&prepared, dir.path()).unwrap();
    assert_eq!(files.len(), 11);
    let body = fs::read_to_string(dir.path().join("panel_all_symptoms.csv")).unwrap();
    assert_eq!(body.lines().count(), 1 + 2 * 244);
}

#[test]
fn thread_count_does_not_change_report() {
    let fx = fixture(4);
    let (trends, cases) = inputs(&fx);
    let config = StudyConfig {
        p_method: PValueMethod::McPerm {
            iterations: 2000,
            seed: 11,
        },
        max_lag: 7,
        ..Default::default()
    };
    let prepared = prepare_study(&fx.manifest, &trends, &cases, &config).unwrap();
    let parallel = evaluate_study(&prepared, &config);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| evaluate_study(&prepared, &config));
    assert_eq!(parallel, single);
    assert_eq!(
        render_table(&parallel, Format::Json),
        render_table(&single, Format::Json)
    );
}

#[test]
fn weekly_mode_leaves_rho_unchanged() {
    let fx = fixture(5);
    let mean = study(&fx, &StudyConfig::default());
    let sum = study(
        &fx,
        &StudyConfig {
            weekly_mode: WeeklyMode::Sum,
            ..Default::default()
        },
    );
    for (a, b) in mean.all_rows().zip(sum.all_rows()) {
        assert_eq!(a.weekly, b.weekly);
    }
}

#[test]
fn constant_cases_mark_rows_without_aborting() {
    let fx = fixture(6);
    let (trends, cases) = inputs(&fx);
    let flat = DailySeries::new("cases", cases.start(), vec![7.0; cases.len()]).unwrap();
    let r = run_study(&fx.manifest, &trends, &flat, &StudyConfig::default()).unwrap();
    for row in r.all_rows() {
        assert_eq!(row.daily, Err(StatsError::ZeroVariance));
        assert_eq!(row.class_daily, None);
    }
    let csv = String::from_utf8(render_table(&r, Format::Csv)).unwrap();
    assert!(csv.contains("error:zero_variance"));
}

#[test]
fn missing_variant_is_an_error() {
    let fx = fixture(7);
    let (mut trends, cases) = inputs(&fx);
    let gone = trends.pop().unwrap();
    let err = run_study(&fx.manifest, &trends, &cases, &StudyConfig::default()).unwrap_err();
    assert!(
        matches!(&err, StudyError::MissingVariant { variant, .. } if variant == gone.label()),
        "{err}"
    );
}

#[test]
fn period_outside_inputs_is_an_error() {
    let fx = fixture(8);
    let config = StudyConfig {
        end: NaiveDate::from_ymd_opt(2020, 12, 31).unwrap(),
        ..Default::default()
    };
    let (trends, cases) = inputs(&fx);
    assert!(run_study(&fx.manifest, &trends, &cases, &config).is_err());
}

#[test]
fn classify_boundaries() {
    let t = Thresholds::default();
    assert_eq!(classify(0.9, 0.05, &t), Classification::NotSignificant);
    assert_eq!(classify(0.5, 0.01, &t), Classification::ModerateSignificant);
    assert_eq!(classify(0.501, 0.01, &t), Classification::HighSignificant);
    assert_eq!(classify(-0.3, 0.01, &t), Classification::ModerateSignificant);
    assert_eq!(classify(0.29, 0.01, &t), Classification::WeakSignificant);
}

#[test]
fn case_summary_months() {
    let start = NaiveDate::from_ymd_opt(2020, 5, 30).unwrap();
    let s = DailySeries::new("cases", start, vec![1.0, 2.0, 9.0, 9.0, 4.0]).unwrap();
    let sum = summarize_cases(&s);
    assert_eq!(sum.peak_date, NaiveDate::from_ymd_opt(2020, 6, 1).unwrap());
    assert_eq!(sum.peak_value, 9.0);
    assert_eq!(sum.month(2020, 5), Some(3.0));
    assert_eq!(sum.month(2020, 6), Some(22.0));
    assert_eq!(sum.month(2020, 7), None);
}
