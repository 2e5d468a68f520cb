use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::series::AlignedPair;

use super::rank::{centred_ranks, dot};
use super::special::t_two_sided;
use super::StatsError;

/// Largest n for which the full permutation distribution is enumerated.
pub const EXACT_MAX_N: usize = 9;
/// Smallest accepted Monte Carlo iteration count.
pub const MC_MIN_ITERATIONS: u64 = 1000;

/// Two-sided p-value of Spearman's rho under the t approximation with
/// n - 2 degrees of freedom.
pub fn p_value_t(rho: f64, n: usize) -> Result<f64, StatsError> {
    if n < 4 {
        return Err(StatsError::TooFewSamples { n, min: 4 });
    }
    if !rho.is_finite() || rho.abs() > 1.0 {
        return Err(StatsError::InvalidRho { rho });
    }
    if rho.abs() == 1.0 {
        return Err(StatsError::DegenerateRho);
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    Ok(t_two_sided(t, df))
}

/// Permutation statistic setup shared by the exact and Monte Carlo tests.
/// The y-rank variance is invariant under permutation, so |rho| can be
/// compared through the raw cross product.
struct PermSetup {
    cx: Vec<f64>,
    cy: Vec<f64>,
    threshold: f64,
}

impl PermSetup {
    fn new(pair: &AlignedPair) -> Result<Self, StatsError> {
        let cx = centred_ranks(pair.x());
        let cy = centred_ranks(pair.y());
        let sxx = dot(&cx, &cx);
        let syy = dot(&cy, &cy);
        if sxx == 0.0 || syy == 0.0 {
            return Err(StatsError::ZeroVariance);
        }
        let observed = dot(&cx, &cy).abs();
        // centred midranks are multiples of 1/2, so cross products are exact;
        // the slack only guards against reordering of the summation
        let threshold = observed - 1e-12 * (sxx * syy).sqrt();
        Ok(Self { cx, cy, threshold })
    }

    fn at_least_as_extreme(&self, ys: &[f64]) -> bool {
        dot(&self.cx, ys).abs() >= self.threshold
    }
}

/// Exact two-sided permutation p-value: the share of all n! re-pairings
/// whose |rho| reaches the observed |rho| (the observed pairing included).
pub fn p_value_exact(pair: &AlignedPair) -> Result<f64, StatsError> {
    let n = pair.n();
    if n > EXACT_MAX_N {
        return Err(StatsError::TooLarge { n, max: EXACT_MAX_N });
    }
    let setup = PermSetup::new(pair)?;
    let mut ys = setup.cy.clone();
    let mut hits: u64 = u64::from(setup.at_least_as_extreme(&ys));
    let mut total: u64 = 1;

    // Heap's algorithm, iterative form
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                ys.swap(0, i);
            } else {
                ys.swap(c[i], i);
            }
            total += 1;
            hits += u64::from(setup.at_least_as_extreme(&ys));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Monte Carlo permutation p-value with the add-one estimator
/// (1 + hits) / (iterations + 1). Deterministic for a given seed.
pub fn p_value_mc(pair: &AlignedPair, iterations: u64, seed: u64) -> Result<f64, StatsError> {
    if iterations < MC_MIN_ITERATIONS {
        return Err(StatsError::TooFewIterations {
            iterations,
            min: MC_MIN_ITERATIONS,
        });
    }
    let setup = PermSetup::new(pair)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ys = setup.cy.clone();
    let mut hits: u64 = 0;
    for _ in 0..iterations {
        ys.shuffle(&mut rng);
        hits += u64::from(setup.at_least_as_extreme(&ys));
    }
    Ok((1 + hits) as f64 / (iterations + 1) as f64)
}
