//! Synthetic fixtures with a known rank-correlation structure.
//!
//! Cases follow a deterministic epidemic-shaped curve with multiplicative
//! day-to-day jitter. Search signals are drawn from a Gaussian copula
//! conditioned on the normal scores of the case ranks: for a target Spearman
//! rho_s the latent Pearson parameter is 2 sin(pi rho_s / 6). The latent noise
//! is orthogonalized against the case scores so the sample latent correlation
//! hits the parameter exactly; what remains is rank and rounding error.

use std::fs;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::ingest::{ManifestEntry, SymptomManifest};
use crate::series::DailySeries;
use crate::stats::midranks;

pub const DEFAULT_START: (i32, u32, u32) = (2020, 3, 2);
pub const SYNTH_GEO: &str = "Synthetic";
const CASE_PEAK: f64 = 5000.0;
const CASE_BASELINE: f64 = 40.0;
/// Latent spread between keyword variants of one symptom.
const VARIANT_SPREAD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseCurve {
    UnimodalPeak,
    Bimodal,
    Flat,
}

impl CaseCurve {
    /// Expected daily cases at relative position `u` in [0, 1).
    fn intensity(self, u: f64) -> f64 {
        let bump = |centre: f64, width: f64| (-0.5 * ((u - centre) / width).powi(2)).exp();
        match self {
            Self::UnimodalPeak => CASE_BASELINE + CASE_PEAK * bump(0.4, 0.12),
            Self::Bimodal => {
                CASE_BASELINE + CASE_PEAK * bump(0.38, 0.07) + 0.85 * CASE_PEAK * bump(0.5, 0.06)
            }
            Self::Flat => CASE_BASELINE,
        }
    }
}

impl std::str::FromStr for CaseCurve {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unimodal-peak" | "unimodal" => Ok(Self::UnimodalPeak),
            "bimodal" => Ok(Self::Bimodal),
            "flat" => Ok(Self::Flat),
            other => Err(format!("unknown case curve `{other}`")),
        }
    }
}

/// Additive RSV bump over `duration` days starting `start` days in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediaBurst {
    pub start: usize,
    pub duration: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub start: NaiveDate,
    pub n_days: usize,
    pub target_spearman: f64,
    /// Positive: the search signal leads cases by this many days.
    pub lag_days: i64,
    pub case_curve: CaseCurve,
    /// Standard deviation of extra latent noise on the search signal.
    pub noise_scale: f64,
    /// Log-scale standard deviation of multiplicative case jitter.
    pub case_jitter: f64,
    pub media_burst: Option<MediaBurst>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let (y, m, d) = DEFAULT_START;
        Self {
            start: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
            n_days: 244,
            target_spearman: 0.7,
            lag_days: 0,
            case_curve: CaseCurve::UnimodalPeak,
            noise_scale: 0.0,
            case_jitter: 0.5,
            media_burst: None,
            seed: 20200302,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_days < 14 {
            return Err(format!("n_days must be at least 14, got {}", self.n_days));
        }
        if !(self.target_spearman.abs() <= 1.0) {
            return Err(format!(
                "target Spearman {} outside [-1, 1]",
                self.target_spearman
            ));
        }
        if !(self.noise_scale >= 0.0) || !(self.case_jitter >= 0.0) {
            return Err("noise scales must be non-negative".into());
        }
        Ok(())
    }
}

/// Latent Pearson parameter of a bivariate normal whose Spearman rho is
/// `spearman`.
pub fn copula_pearson(spearman: f64) -> f64 {
    2.0 * (std::f64::consts::PI * spearman / 6.0).sin()
}

/// Latent noise level that brings a perfectly coupled signal down to the
/// given Spearman rho.
pub fn noise_for_spearman(spearman: f64) -> f64 {
    let r = copula_pearson(spearman);
    (1.0 / (r * r) - 1.0).sqrt()
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Normal scores Φ⁻¹((midrank − ½) / n).
fn normal_scores(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let dist = std_normal();
    midranks(values)
        .into_iter()
        .map(|r| dist.inverse_cdf((r - 0.5) / n))
        .collect()
}

fn centred(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Map latent values onto the RSV scale: integers with the maximum at 100.
fn to_rsv(latent: &[f64]) -> Vec<f64> {
    let dist = std_normal();
    let probs: Vec<f64> = latent.iter().map(|&z| dist.cdf(z)).collect();
    let max = probs.iter().cloned().fold(f64::MIN, f64::max);
    probs.iter().map(|p| (100.0 * p / max).round()).collect()
}

fn apply_burst(rsv: &mut [f64], burst: &Option<MediaBurst>) {
    if let Some(b) = burst {
        let end = (b.start + b.duration).min(rsv.len());
        for v in rsv.iter_mut().take(end).skip(b.start) {
            *v = (*v + b.amplitude).round().clamp(0.0, 100.0);
        }
    }
}

/// One search signal tied to the case curve.
#[derive(Debug, Clone, Copy)]
struct Link {
    target: f64,
    lag: i64,
    noise: f64,
    variants: usize,
}

impl Link {
    fn comonotone(&self) -> bool {
        self.target.abs() == 1.0 && self.noise == 0.0
    }
}

struct Coupled {
    cases: Vec<f64>,
    /// Per link, per variant RSV values.
    signals: Vec<Vec<Vec<f64>>>,
}

fn generate_coupled(
    n: usize,
    curve: CaseCurve,
    jitter: f64,
    links: &[Link],
    seed: u64,
) -> Coupled {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pad = links.iter().map(|l| l.lag.unsigned_abs() as usize).max().unwrap_or(0);
    let m = n + 2 * pad;

    let mut cases_ext: Vec<f64> = (0..m)
        .map(|i| {
            let base = curve.intensity((i as f64 + 0.5) / m as f64);
            let eta: f64 = rng.sample(StandardNormal);
            (base * (jitter * eta - 0.5 * jitter * jitter).exp()).round()
        })
        .collect();
    let scores = normal_scores(&cases_ext);

    let mut signals = Vec::with_capacity(links.len());
    let mut comonotone_groups: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    for link in links {
        let idx: Vec<usize> = (0..n).map(|t| (pad as i64 + t as i64 + link.lag) as usize).collect();
        let z = centred(&idx.iter().map(|&i| scores[i]).collect::<Vec<_>>());
        let zz = dot(&z, &z);
        let rho = copula_pearson(link.target);

        let eps = normals(&mut rng, n);
        let noise = normals(&mut rng, n);
        let latent: Vec<f64> = if zz == 0.0 {
            // flat cases: nothing to couple to
            eps.clone()
        } else {
            let e = centred(&eps);
            let beta = dot(&e, &z) / zz;
            let mut resid: Vec<f64> = e.iter().zip(&z).map(|(a, b)| a - beta * b).collect();
            let rr = dot(&resid, &resid);
            let scale = if rr > 0.0 { (zz / rr).sqrt() } else { 0.0 };
            resid.iter_mut().for_each(|r| *r *= scale);
            let sd = (zz / n as f64).sqrt();
            z.iter()
                .zip(&resid)
                .zip(&noise)
                .map(|((zi, ri), ni)| {
                    (rho * zi + (1.0 - rho * rho).max(0.0).sqrt() * ri) / sd + link.noise * ni
                })
                .collect()
        };

        let mut variants = Vec::with_capacity(link.variants);
        for _ in 0..link.variants.max(1) {
            let delta = normals(&mut rng, n);
            let spread = if link.comonotone() { 0.0 } else { VARIANT_SPREAD };
            let v: Vec<f64> = latent.iter().zip(&delta).map(|(l, d)| l + spread * d).collect();
            variants.push(to_rsv(&v));
        }
        if link.comonotone() && zz > 0.0 && comonotone_groups.is_none() {
            comonotone_groups = Some((idx, variants[0].clone(), link.target));
        }
        signals.push(variants);
    }

    if let Some((idx, rsv, sign)) = comonotone_groups {
        quantize_to_groups(&mut cases_ext, &idx, &rsv, sign);
    }
    Coupled {
        cases: cases_ext[pad..pad + n].to_vec(),
        signals,
    }
}

/// Make the cases at `idx` constant within each RSV tie group and strictly
/// ordered across groups, so the pair is exactly (anti-)comonotone.
fn quantize_to_groups(cases: &mut [f64], idx: &[usize], rsv: &[f64], sign: f64) {
    let mut levels: Vec<f64> = rsv.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if sign < 0.0 {
        levels.reverse();
    }
    let mut prev: Option<f64> = None;
    for level in levels {
        let mut members: Vec<f64> = idx
            .iter()
            .zip(rsv)
            .filter(|(_, &r)| r == level)
            .map(|(&i, _)| cases[i])
            .collect();
        members.sort_by(f64::total_cmp);
        let mut value = members[(members.len() - 1) / 2];
        if let Some(p) = prev {
            value = value.max(p + 1.0);
        }
        for (&i, &r) in idx.iter().zip(rsv) {
            if r == level {
                cases[i] = value;
            }
        }
        prev = Some(value);
    }
}

/// A (search signal, cases) pair with the requested rank coupling.
pub fn generate_pair(spec: &SynthSpec) -> Result<(DailySeries, DailySeries), String> {
    spec.validate()?;
    let link = Link {
        target: spec.target_spearman,
        lag: spec.lag_days,
        noise: spec.noise_scale,
        variants: 1,
    };
    let mut out = generate_coupled(
        spec.n_days,
        spec.case_curve,
        spec.case_jitter,
        &[link],
        spec.seed,
    );
    let mut rsv = out.signals.remove(0).remove(0);
    apply_burst(&mut rsv, &spec.media_burst);
    let signal = DailySeries::new("signal", spec.start, rsv).map_err(|e| e.to_string())?;
    let cases = DailySeries::new("cases", spec.start, out.cases).map_err(|e| e.to_string())?;
    Ok((signal, cases))
}

/// Requested coupling for one symptom of a synthetic study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymptomTarget {
    pub id: String,
    pub display_name: String,
    pub variants: Vec<String>,
    pub target: f64,
    pub lag: i64,
}

impl SymptomTarget {
    pub fn new(id: &str, target: f64, lag: i64) -> Self {
        Self {
            id: id.to_string(),
            display_name: id.to_string(),
            variants: vec![id.to_string()],
            target,
            lag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyFixtureSpec {
    pub start: NaiveDate,
    pub n_days: usize,
    pub case_curve: CaseCurve,
    pub case_jitter: f64,
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for StudyFixtureSpec {
    fn default() -> Self {
        let base = SynthSpec::default();
        Self {
            start: base.start,
            n_days: base.n_days,
            case_curve: CaseCurve::Bimodal,
            case_jitter: base.case_jitter,
            noise_scale: 0.0,
            seed: base.seed,
        }
    }
}

/// Generated study inputs, in the ingest file formats.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyFixture {
    pub manifest: SymptomManifest,
    /// `(file name, contents)`: one jointly-scaled export per symptom.
    pub trend_files: Vec<(String, String)>,
    pub case_csv: String,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRENDS_DIR: &str = "trends";
pub const CASES_FILE: &str = "cases.csv";

impl StudyFixture {
    /// Write `manifest.json`, `cases.csv` and `trends/*.csv` under `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        let trends = dir.join(TRENDS_DIR);
        fs::create_dir_all(&trends)?;
        fs::write(dir.join(MANIFEST_FILE), self.manifest.to_json())?;
        fs::write(dir.join(CASES_FILE), &self.case_csv)?;
        for (name, body) in &self.trend_files {
            fs::write(trends.join(name), body)?;
        }
        Ok(())
    }
}

fn trends_export(start: NaiveDate, labels: &[String], columns: &[Vec<f64>]) -> String {
    let mut out = String::from("Category: All categories\n\nDay");
    for l in labels {
        out.push_str(&format!(",{l}: ({SYNTH_GEO})"));
    }
    out.push('\n');
    for t in 0..columns[0].len() {
        out.push_str(&(start + Duration::days(t as i64)).format("%Y-%m-%d").to_string());
        for c in columns {
            out.push_str(&format!(",{}", c[t] as i64));
        }
        out.push('\n');
    }
    out
}

/// Manifest, per-symptom trend exports and a case file embedding the
/// requested per-symptom correlations and lags.
pub fn generate_study_fixture(
    targets: &[SymptomTarget],
    spec: &StudyFixtureSpec,
) -> Result<StudyFixture, String> {
    if targets.is_empty() {
        return Err("at least one symptom target required".into());
    }
    if spec.n_days < 14 {
        return Err(format!("n_days must be at least 14, got {}", spec.n_days));
    }
    if let Some(t) = targets.iter().find(|t| !(t.target.abs() <= 1.0)) {
        return Err(format!("target for `{}` outside [-1, 1]", t.id));
    }
    let links: Vec<Link> = targets
        .iter()
        .map(|t| Link {
            target: t.target,
            lag: t.lag,
            noise: spec.noise_scale,
            variants: t.variants.len().max(1),
        })
        .collect();
    let coupled = generate_coupled(spec.n_days, spec.case_curve, spec.case_jitter, &links, spec.seed);

    let manifest = SymptomManifest {
        entries: targets
            .iter()
            .map(|t| ManifestEntry {
                id: t.id.clone(),
                display_name: t.display_name.clone(),
                language: "ar".into(),
                variants: t.variants.clone(),
            })
            .collect(),
    };
    manifest.validate().map_err(|e| e.to_string())?;

    let trend_files = targets
        .iter()
        .zip(&coupled.signals)
        .map(|(t, cols)| {
            (
                format!("trends_{}.csv", t.id),
                trends_export(spec.start, &t.variants, cols),
            )
        })
        .collect();

    let mut case_csv = String::from("date,cases\n");
    for (t, v) in coupled.cases.iter().enumerate() {
        let date = spec.start + Duration::days(t as i64);
        case_csv.push_str(&format!("{},{}\n", date.format("%Y-%m-%d"), *v as i64));
    }
    Ok(StudyFixture {
        manifest,
        trend_files,
        case_csv,
    })
}

/// Ten symptoms with the keyword groups of the bundled Arabic manifest and
/// targets ordered like the weekly study results: Loss of Smell strongest,
/// Cough weakest.
pub fn reference_targets() -> Vec<SymptomTarget> {
    let manifest: SymptomManifest =
        serde_json::from_str(include_str!("../data/symptoms_sa_ar.json")).expect("bundled manifest");
    let target_of = |id: &str| match id {
        "loss_of_smell" => 0.9,
        "loss_of_taste" => 0.8,
        "diarrhea" => 0.7,
        "shortness_of_breath" => 0.6,
        "headache" => 0.5,
        "fatigue" => 0.4,
        "fever" => 0.3,
        "runny_nose" => 0.2,
        "sore_throat" => 0.1,
        _ => 0.0,
    };
    manifest
        .entries
        .into_iter()
        .map(|e| SymptomTarget {
            target: target_of(&e.id),
            lag: 0,
            id: e.id,
            display_name: e.display_name,
            variants: e.variants,
        })
        .collect()
}

/// The bundled ten-symptom Arabic keyword manifest (26 variants).
pub fn bundled_manifest() -> SymptomManifest {
    serde_json::from_str(include_str!("../data/symptoms_sa_ar.json")).expect("bundled manifest")
}
