//! Reference implementations used as test oracles. Deliberately naive.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rank of each value by counting: 1 + #smaller + (#equal - 1) / 2.
pub fn rank_table(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let smaller = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Textbook Pearson correlation. None when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&rank_table(x), &rank_table(y))
}

/// Every permutation of 0..n, by recursive insertion.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Exact two-sided permutation p-value by full enumeration.
pub fn exact_p_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let observed = spearman_oracle(x, y)?.abs();
    let perms = permutations(x.len());
    let hits = perms
        .iter()
        .filter(|p| {
            let yp: Vec<f64> = p.iter().map(|&i| y[i]).collect();
            spearman_oracle(x, &yp).unwrap().abs() >= observed - 1e-9
        })
        .count();
    Some(hits as f64 / perms.len() as f64)
}

/// A sample of length n where roughly `tie_share` of entries repeat an
/// earlier value.
pub fn tied_sample(rng: &mut ChaCha8Rng, n: usize, tie_share: f64) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 && rng.random_bool(tie_share) {
            let j = rng.random_range(0..i);
            v.push(v[j]);
        } else {
            v.push(rng.random_range(0.0..100.0));
        }
    }
    v
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two-sided Student t tail by Simpson quadrature of the density.
pub fn t_tail_quadrature(t: f64, df: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let c = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
    let f = |u: f64| c * (1.0 + u * u / df).powf(-(df + 1.0) / 2.0);
    let a = t.abs();
    let steps = 20_000;
    let h = a / steps as f64;
    let mut s = f(0.0) + f(a);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(k as f64 * h);
    }
    let central = s * h / 3.0;
    1.0 - 2.0 * central
}
