use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::series::{align_pair, DailySeries, MIN_PAIR_LEN};

use super::{correlate, CorrelationOptions, CorrelationResult, StatsError};

pub const DEFAULT_MIN_OVERLAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagEntry {
    pub lag: i64,
    pub overlap: usize,
    pub result: Result<CorrelationResult, StatsError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagScanResult {
    /// Lags with enough overlap, ascending. Entries whose correlation is
    /// undefined carry the error instead of a value.
    pub entries: Vec<LagEntry>,
    pub best_lag: i64,
    pub best: CorrelationResult,
    pub min_overlap: usize,
}

/// Correlate `x[t]` against `y[t + lag]` for every lag in
/// `-max_lag..=max_lag`. Positive lags mean `x` leads `y`.
///
/// The best lag maximizes rho; ties go to the smallest |lag|, then to the
/// negative side.
pub fn lag_scan(
    x: &DailySeries,
    y: &DailySeries,
    max_lag: u32,
    min_overlap: usize,
    opts: &CorrelationOptions,
) -> Result<LagScanResult, StatsError> {
    let min_overlap = min_overlap.max(MIN_PAIR_LEN);
    let max_lag = i64::from(max_lag);
    let lags: Vec<i64> = (-max_lag..=max_lag).collect();

    let entries: Vec<LagEntry> = lags
        .par_iter()
        .filter_map(|&lag| {
            // moving y back by `lag` days pairs x(d) with y(d + lag)
            let pair = align_pair(x, &y.shifted(-lag)).ok()?;
            if pair.n() < min_overlap {
                return None;
            }
            let lag_opts = CorrelationOptions {
                method: opts.method.for_stream(lag as u64),
                ..*opts
            };
            let result = correlate(&pair, &lag_opts).map(|mut r| {
                r.lag_days = lag;
                r
            });
            Some(LagEntry {
                lag,
                overlap: pair.n(),
                result,
            })
        })
        .collect();

    let best = entries
        .iter()
        .filter_map(|e| e.result.as_ref().ok().map(|r| (e.lag, r)))
        .reduce(|a, b| if better(b, a) { b } else { a })
        .map(|(lag, r)| (lag, *r));

    match best {
        Some((best_lag, best)) => Ok(LagScanResult {
            entries,
            best_lag,
            best,
            min_overlap,
        }),
        None => Err(StatsError::NoValidLag { min_overlap }),
    }
}

fn better(cand: (i64, &CorrelationResult), cur: (i64, &CorrelationResult)) -> bool {
    if cand.1.rho != cur.1.rho {
        return cand.1.rho > cur.1.rho;
    }
    let (a, b) = (cand.0.abs(), cur.0.abs());
    if a != b {
        return a < b;
    }
    cand.0 < cur.0
}
