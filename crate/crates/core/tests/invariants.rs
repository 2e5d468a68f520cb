use chrono::{Duration, NaiveDate};
use proptest::prelude::*;

use trendsurv::series::{align_pair, resample_weekly, AlignedPair, DailySeries, WeeklyMode};
use trendsurv::stats::{
    correlate, lag_scan, p_value_t, spearman_rho, CorrelationOptions, PValueMethod,
};

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 3, 2).unwrap()
}

fn pair(x: Vec<f64>, y: Vec<f64>) -> AlignedPair {
    AlignedPair::from_values(start(), x, y).unwrap()
}

fn rsv_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (5usize..80).prop_flat_map(|n| {
        (
            prop::collection::vec((0u32..=100).prop_map(f64::from), n),
            prop::collection::vec((0u32..=100).prop_map(f64::from), n),
        )
    })
}

fn varies(v: &[f64]) -> bool {
    v.iter().any(|&a| a != v[0])
}

proptest! {
    #[test]
    fn monotone_transforms_keep_rho((x, y) in rsv_pair()) {
        prop_assume!(varies(&x) && varies(&y));
        let base = spearman_rho(&pair(x.clone(), y.clone())).unwrap();
        let tx: Vec<f64> = x.iter().map(|v| (1.0 + v).ln()).collect();
        let ty: Vec<f64> = y.iter().map(|v| v * v * v + 2.0 * v).collect();
        prop_assert_eq!(spearman_rho(&pair(tx, ty)).unwrap(), base);
    }

    #[test]
    fn rho_is_symmetric((x, y) in rsv_pair()) {
        prop_assume!(varies(&x) && varies(&y));
        let a = spearman_rho(&pair(x.clone(), y.clone())).unwrap();
        let b = spearman_rho(&pair(y, x)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reversal_flips_sign((x, y) in rsv_pair()) {
        prop_assume!(varies(&x) && varies(&y));
        let a = spearman_rho(&pair(x.clone(), y.clone())).unwrap();
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let b = spearman_rho(&pair(x, neg)).unwrap();
        prop_assert_eq!(a, -b);
    }

    #[test]
    fn rho_is_bounded((x, y) in rsv_pair()) {
        prop_assume!(varies(&x) && varies(&y));
        let r = spearman_rho(&pair(x, y)).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn t_pvalue_falls_with_abs_rho(a in 0.0f64..0.99, b in 0.0f64..0.99, n in 4usize..500) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p_lo = p_value_t(lo, n).unwrap();
        let p_hi = p_value_t(hi, n).unwrap();
        prop_assert!(p_hi <= p_lo);
        prop_assert!((0.0..=1.0).contains(&p_hi));
        prop_assert_eq!(p_value_t(-hi, n).unwrap(), p_hi);
    }

    #[test]
    fn weekly_mode_does_not_change_rho((x, y) in (14usize..120).prop_flat_map(|n| (
        prop::collection::vec((0u32..=100).prop_map(f64::from), n),
        prop::collection::vec((0u32..=5000).prop_map(f64::from), n),
    ))) {
        let sx = DailySeries::new("x", start(), x).unwrap();
        let sy = DailySeries::new("y", start(), y).unwrap();
        let cases = resample_weekly(&sy, WeeklyMode::Sum).unwrap();
        let by_mode = |m| {
            let w = resample_weekly(&sx, m).unwrap();
            AlignedPair::from_weekly(&w, &cases).ok().map(|p| spearman_rho(&p))
        };
        prop_assert_eq!(by_mode(WeeklyMode::Sum), by_mode(WeeklyMode::Mean));
    }

    #[test]
    fn positive_scaling_keeps_result((x, y) in rsv_pair(), k in 1u32..50) {
        prop_assume!(varies(&x) && varies(&y));
        let k = f64::from(k);
        let opts = CorrelationOptions::default();
        let a = correlate(&pair(x.clone(), y.clone()), &opts).unwrap();
        let sx: Vec<f64> = x.iter().map(|v| v * k).collect();
        let b = correlate(&pair(sx, y), &opts).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn lag_scan_is_deterministic_across_thread_counts() {
    let n = 120;
    let x: Vec<f64> = (0..n).map(|i| ((i * 37) % 101) as f64).collect();
    let sx = DailySeries::new("x", start(), x).unwrap();
    let sy = sx.shifted(4).with_label("y");
    let opts = CorrelationOptions {
        method: PValueMethod::McPerm { iterations: 2000, seed: 9 },
        ..Default::default()
    };
    let parallel = lag_scan(&sx, &sy, 10, 10, &opts).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| lag_scan(&sx, &sy, 10, 10, &opts).unwrap());
    assert_eq!(parallel, single);
    assert_eq!(parallel.best_lag, 4);
    assert_eq!(sy.start(), sx.start() + Duration::days(4));
}

#[test]
fn align_is_the_intersection() {
    let a = DailySeries::new("a", start(), (0..10).map(f64::from).collect()).unwrap();
    let b = a.shifted(3);
    let p = align_pair(&a, &b).unwrap();
    assert_eq!(p.n(), 7);
    assert_eq!(p.start(), start() + Duration::days(3));
}
