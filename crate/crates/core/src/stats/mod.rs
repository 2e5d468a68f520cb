//! Rank statistics: midranks, Spearman's rho, three p-value routes, lag
//! scanning and rolling-window correlation.

mod lag;
mod pvalue;
mod rank;
mod rolling;
pub mod special;

pub use lag::{lag_scan, LagEntry, LagScanResult, DEFAULT_MIN_OVERLAP};
pub use pvalue::{p_value_exact, p_value_mc, p_value_t, EXACT_MAX_N, MC_MIN_ITERATIONS};
pub use rank::{midranks, spearman_rho};
pub use rolling::{rolling_correlation, RollingEntry, MIN_WINDOW};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::AlignedPair;

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatsError {
    #[error("zero variance: one side is constant")]
    ZeroVariance,
    #[error("|rho| = 1, t statistic is unbounded")]
    DegenerateRho,
    #[error("rho {rho} outside [-1, 1]")]
    InvalidRho { rho: f64 },
    #[error("too few samples: n = {n}, need at least {min}")]
    TooFewSamples { n: usize, min: usize },
    #[error("exact permutation test limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("Monte Carlo needs at least {min} iterations, got {iterations}")]
    TooFewIterations { iterations: u64, min: u64 },
    #[error("no lag reaches the minimum overlap of {min_overlap} days with a defined correlation")]
    NoValidLag { min_overlap: usize },
    #[error("window {window} exceeds series length {n}")]
    WindowTooLarge { window: usize, n: usize },
    #[error("window {window} below minimum {min}")]
    WindowTooSmall { window: usize, min: usize },
    #[error("step must be positive")]
    ZeroStep,
}

impl StatsError {
    /// Stable snake_case identifier, used in rendered reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ZeroVariance => "zero_variance",
            Self::DegenerateRho => "degenerate_rho",
            Self::InvalidRho { .. } => "invalid_rho",
            Self::TooFewSamples { .. } => "too_few_samples",
            Self::TooLarge { .. } => "too_large",
            Self::TooFewIterations { .. } => "too_few_iterations",
            Self::NoValidLag { .. } => "no_valid_lag",
            Self::WindowTooLarge { .. } => "window_too_large",
            Self::WindowTooSmall { .. } => "window_too_small",
            Self::ZeroStep => "zero_step",
        }
    }
}

/// Which procedure produced a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethodKind {
    TApprox,
    ExactPerm,
    McPerm,
}

/// p-value procedure together with its parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PValueMethod {
    #[default]
    TApprox,
    ExactPerm,
    McPerm { iterations: u64, seed: u64 },
}

impl PValueMethod {
    pub fn kind(&self) -> PMethodKind {
        match self {
            Self::TApprox => PMethodKind::TApprox,
            Self::ExactPerm => PMethodKind::ExactPerm,
            Self::McPerm { .. } => PMethodKind::McPerm,
        }
    }

    /// Same method with the Monte Carlo seed re-derived for `stream`, so
    /// independent evaluations get independent but reproducible draws.
    pub fn for_stream(&self, stream: u64) -> Self {
        match *self {
            Self::McPerm { iterations, seed } => Self::McPerm {
                iterations,
                seed: derive_seed(seed, stream),
            },
            other => other,
        }
    }
}

/// splitmix64 finalizer over (seed, stream).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// One-sided test for positive association.
    Greater,
}

impl Alternative {
    fn apply(self, rho: f64, two_sided: f64) -> f64 {
        match self {
            Self::TwoSided => two_sided,
            Self::Greater if rho > 0.0 => two_sided / 2.0,
            Self::Greater => 1.0 - two_sided / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorrelationOptions {
    pub method: PValueMethod,
    pub alternative: Alternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: PMethodKind,
    pub lag_days: i64,
    /// Set when |rho| = 1 under the t approximation; p is then reported as 0.
    pub degenerate: bool,
}

/// Spearman's rho plus a p-value by the requested method.
pub fn correlate(
    pair: &AlignedPair,
    opts: &CorrelationOptions,
) -> Result<CorrelationResult, StatsError> {
    let rho = spearman_rho(pair)?;
    let n = pair.n();
    let (two_sided, degenerate) = match opts.method {
        PValueMethod::TApprox => match p_value_t(rho, n) {
            Ok(p) => (p, false),
            Err(StatsError::DegenerateRho) => (0.0, true),
            Err(e) => return Err(e),
        },
        PValueMethod::ExactPerm => (p_value_exact(pair)?, false),
        PValueMethod::McPerm { iterations, seed } => (p_value_mc(pair, iterations, seed)?, false),
    };
    let p_value = opts.alternative.apply(rho, two_sided).clamp(0.0, 1.0);
    Ok(CorrelationResult {
        rho,
        p_value,
        n,
        method: opts.method.kind(),
        lag_days: 0,
        degenerate,
    })
}
