use crate::series::AlignedPair;

use super::StatsError;

/// Ranks with ties replaced by the mean of the positions they occupy.
/// Ranks are 1-based, so they always sum to n(n+1)/2.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) hold rank (i+1 + j) / 2
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Midranks shifted to mean zero. For midranks the mean is exactly
/// (n+1)/2, so centred values stay multiples of one half.
pub(crate) fn centred_ranks(values: &[f64]) -> Vec<f64> {
    let mean = (values.len() + 1) as f64 / 2.0;
    midranks(values).into_iter().map(|r| r - mean).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Spearman rank correlation: Pearson correlation of the two midrank vectors.
pub fn spearman_rho(pair: &AlignedPair) -> Result<f64, StatsError> {
    spearman_slices(pair.x(), pair.y())
}

pub(crate) fn spearman_slices(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    debug_assert_eq!(x.len(), y.len());
    let cx = centred_ranks(x);
    let cy = centred_ranks(y);
    let sxx = dot(&cx, &cx);
    let syy = dot(&cy, &cy);
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let rho = dot(&cx, &cy) / (sxx * syy).sqrt();
    Ok(rho.clamp(-1.0, 1.0))
}
