use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::series::AlignedPair;

use super::{correlate, CorrelationOptions, CorrelationResult, StatsError};

pub const MIN_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingEntry {
    pub start: NaiveDate,
    /// `Err` marks a gap, e.g. a window where one side is flat.
    pub result: Result<CorrelationResult, StatsError>,
}

/// Spearman rho with a t-approximation p-value over sliding windows.
pub fn rolling_correlation(
    pair: &AlignedPair,
    window: usize,
    step: usize,
) -> Result<Vec<RollingEntry>, StatsError> {
    if step == 0 {
        return Err(StatsError::ZeroStep);
    }
    if window < MIN_WINDOW {
        return Err(StatsError::WindowTooSmall {
            window,
            min: MIN_WINDOW,
        });
    }
    let n = pair.n();
    if window > n {
        return Err(StatsError::WindowTooLarge { window, n });
    }
    let opts = CorrelationOptions::default();
    let offsets: Vec<usize> = (0..=n - window).step_by(step).collect();
    Ok(offsets
        .par_iter()
        .map(|&offset| {
            let w = pair
                .window(offset, window)
                .expect("window bounds checked above");
            RollingEntry {
                start: w.start(),
                result: correlate(&w, &opts),
            }
        })
        .collect())
}
