//! Multinomial block bootstrap over precomputed block maxima.
//!
//! Maxima are extracted once and compressed per resampling block. A replicate
//! only draws multinomial block counts and re-weights the compressed sample,
//! so no maximum is ever recomputed.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{circmax, runs_weighted, sliding_maxima, disjoint_maxima, CompressedBlocks};
use crate::error::{Error, Result};
use crate::fit::{default_truncation, fit_frechet, fit_gev, return_level_from_gev, weighted_mean, WeightedSample};
use crate::numerics::NeumaierSum;
use crate::rng::{domain, stream};

/// How bootstrap samples are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ResampleMethod {
    /// Whole disjoint block maxima (circmax with `k = 1`).
    Disjoint,
    /// Circular maxima resampled in blocks of `k·r`.
    Circular { k: usize },
    /// Vanilla sliding maxima cut into blocks of `k·r` and resampled.
    /// Known to underestimate the sliding estimator's variance.
    NaiveSliding { k: usize },
}

impl ResampleMethod {
    pub fn k(&self) -> usize {
        match *self {
            ResampleMethod::Disjoint => 1,
            ResampleMethod::Circular { k } | ResampleMethod::NaiveSliding { k } => k,
        }
    }
}

/// Which point estimate an interval is centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Anchor {
    Disjoint,
    Sliding,
    Circular,
}

/// Scalar statistic evaluated on a (weighted) block-maxima sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "kebab-case")]
pub enum Estimator {
    Mean,
    /// Shape α of the Fréchet pseudo-MLE.
    FrechetShape,
    /// Scale σ of the Fréchet pseudo-MLE.
    FrechetScale,
    /// Shape γ of the GEV pseudo-MLE.
    GevShape,
    /// GEV plug-in return level for period `T`.
    ReturnLevel { period: f64 },
}

impl Estimator {
    /// Evaluates the statistic; `c_trunc` is used by Fréchet fits only.
    pub fn evaluate(&self, s: &WeightedSample, c_trunc: f64) -> Result<f64> {
        match *self {
            Estimator::Mean => weighted_mean(s),
            Estimator::FrechetShape => Ok(fit_frechet(s, c_trunc)?.params.shape),
            Estimator::FrechetScale => Ok(fit_frechet(s, c_trunc)?.params.scale),
            Estimator::GevShape => Ok(fit_gev(s)?.params.shape),
            Estimator::ReturnLevel { period } => {
                return_level_from_gev(&fit_gev(s)?.params, period)
            }
        }
    }

    fn uses_truncation(&self) -> bool {
        matches!(self, Estimator::FrechetShape | Estimator::FrechetScale)
    }

    fn validate(&self) -> Result<()> {
        if let Estimator::ReturnLevel { period } = *self {
            if !(period > 1.0) {
                return Err(Error::invalid(format!("return period must exceed 1, got {period}")));
            }
        }
        Ok(())
    }
}

/// Which regression formula feeds an automatic size correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionTarget {
    /// 100-block return level: `2.48 - 0.01 m + 0.68 γ`.
    Rl100,
    /// Mean of the block maximum: `1.222 - 0.001 m + 0.251 γ`.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "correction", rename_all = "kebab-case")]
pub enum Correction {
    None,
    Factor { factor: f64 },
    Auto { target: CorrectionTarget },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub method: ResampleMethod,
    pub r: usize,
    pub replicates: usize,
    /// Confidence level `1 - α`.
    pub level: f64,
    pub seed: u64,
    pub estimator: Estimator,
    pub correction: Correction,
    /// Fréchet truncation constant; `None` uses `1e-6 · median`.
    pub c_trunc: Option<f64>,
    /// Must be set to run [`ResampleMethod::NaiveSliding`].
    pub allow_inconsistent: bool,
}

pub const MIN_REPLICATES: usize = 20;

impl BootstrapSpec {
    pub fn new(method: ResampleMethod, r: usize, replicates: usize, level: f64, seed: u64, estimator: Estimator) -> Self {
        Self {
            method,
            r,
            replicates,
            level,
            seed,
            estimator,
            correction: Correction::None,
            c_trunc: None,
            allow_inconsistent: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::invalid("block size r must be at least 1"));
        }
        if self.method.k() == 0 {
            return Err(Error::invalid("circmax parameter k must be at least 1"));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::invalid(format!(
                "at least {MIN_REPLICATES} bootstrap replicates are required, got {}",
                self.replicates
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if let Correction::Factor { factor } = self.correction {
            if !(factor >= 1.0 && factor.is_finite()) {
                return Err(Error::invalid(format!("correction factor must be >= 1, got {factor}")));
            }
        }
        if let ResampleMethod::NaiveSliding { .. } = self.method {
            if !self.allow_inconsistent {
                return Err(Error::invalid(
                    "the naive sliding bootstrap is inconsistent (it underestimates the variance); \
                     enable it explicitly to run it for comparison",
                ));
            }
        }
        self.estimator.validate()
    }
}

/// Successful replicate estimates and the number of failed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootReplicates {
    /// The estimator on the un-resampled base sample.
    pub original: f64,
    pub estimates: Vec<f64>,
    pub failures: usize,
    /// Number of resampling blocks `m(k)`.
    pub blocks: usize,
}

impl BootReplicates {
    /// Bootstrap errors `θ* - θ̂`.
    pub fn errors(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e - self.original).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub anchor: Anchor,
}

impl IntervalEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Multinomial(m; 1/m, …, 1/m) block counts.
pub fn resample_weights<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<u32> {
    let mut w = vec![0u32; m];
    for _ in 0..m {
        w[rng.gen_range(0..m)] += 1;
    }
    w
}

/// The compressed resampling base for a method.
pub fn resampling_base(x: &[f64], r: usize, method: ResampleMethod) -> Result<CompressedBlocks> {
    match method {
        ResampleMethod::Disjoint => CompressedBlocks::from_values(&circmax(x, r, 1)?.values, r, false),
        ResampleMethod::Circular { k } => {
            CompressedBlocks::from_values(&circmax(x, r, k)?.values, k * r, false)
        }
        ResampleMethod::NaiveSliding { k } => {
            let kr = k.checked_mul(r).ok_or_else(|| Error::invalid("k·r overflows"))?;
            if x.len() < kr {
                return Err(Error::invalid(format!(
                    "series of length {} is shorter than k·r = {kr}",
                    x.len()
                )));
            }
            // restrict to whole kr-blocks of data; the final block of sliding
            // maxima is r - 1 entries short
            let used = x.len() / kr * kr;
            CompressedBlocks::from_values(&sliding_maxima(&x[..used], r)?.values, kr, true)
        }
    }
}

fn truncation_for(spec: &BootstrapSpec, s: &WeightedSample) -> Result<f64> {
    match spec.c_trunc {
        Some(c) => Ok(c),
        None if spec.estimator.uses_truncation() => default_truncation(s),
        None => Ok(1.0),
    }
}

/// Runs the bootstrap; deterministic in `(x, spec)` for any thread count.
pub fn bootstrap_replicates(x: &[f64], spec: &BootstrapSpec) -> Result<BootReplicates> {
    spec.validate()?;
    let base = resampling_base(x, spec.r, spec.method)?;
    replicates_from_base(&base, spec)
}

/// Replicates with a caller-supplied replicate weight generator, mainly for
/// tests that force particular resamples.
pub fn replicates_with<W>(base: &CompressedBlocks, spec: &BootstrapSpec, draw: W) -> Result<BootReplicates>
where
    W: Fn(usize) -> Vec<u32> + Sync,
{
    let unit = base.unit_weighted();
    if unit.distinct_values() < 2 {
        let v = unit.items().first().map_or(f64::NAN, |p| p.0);
        return Err(Error::AllTied(v));
    }
    let c_trunc = truncation_for(spec, &unit)?;
    let original = spec.estimator.evaluate(&unit, c_trunc)?;
    let results: Vec<Result<f64>> = (0..spec.replicates)
        .into_par_iter()
        .map(|b| spec.estimator.evaluate(&base.weighted(&draw(b)), c_trunc))
        .collect();
    let mut estimates = Vec::with_capacity(results.len());
    let mut failures = 0;
    let mut last = String::new();
    for r in results {
        match r {
            Ok(v) if v.is_finite() => estimates.push(v),
            Ok(v) => {
                failures += 1;
                last = format!("non-finite estimate {v}");
            }
            Err(e) => {
                failures += 1;
                last = e.to_string();
            }
        }
    }
    if failures * 20 > spec.replicates {
        return Err(Error::TooManyFailures {
            failures,
            total: spec.replicates,
            last,
        });
    }
    Ok(BootReplicates {
        original,
        estimates,
        failures,
        blocks: base.num_blocks(),
    })
}

fn replicates_from_base(base: &CompressedBlocks, spec: &BootstrapSpec) -> Result<BootReplicates> {
    let m = base.num_blocks();
    replicates_with(base, spec, |b| {
        let mut rng = stream(spec.seed, domain::BOOTSTRAP, b as u64);
        resample_weights(m, &mut rng)
    })
}

/// 1-based order-statistic index `max(1, ⌊q·B⌋)`.
fn order_index(q: f64, count: usize) -> usize {
    // the small offset keeps e.g. 0.95·20 from flooring to 18
    (((q * count as f64) + 1e-9).floor() as usize).clamp(1, count)
}

/// Basic bootstrap interval
/// `[anchor - c·e_(⌊(1-α/2)B⌋), anchor - c·e_(⌊(α/2)B⌋)]` from bootstrap errors.
pub fn basic_ci(anchor_estimate: f64, errors: &[f64], level: f64, factor: f64, anchor: Anchor) -> Result<IntervalEstimate> {
    if errors.len() < MIN_REPLICATES {
        return Err(Error::invalid(format!(
            "at least {MIN_REPLICATES} bootstrap errors are required, got {}",
            errors.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("level must lie in (0, 1), got {level}")));
    }
    if !(factor >= 1.0 && factor.is_finite()) {
        return Err(Error::invalid(format!("correction factor must be >= 1, got {factor}")));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let hi = sorted[order_index(1.0 - alpha / 2.0, sorted.len()) - 1];
    let lo = sorted[order_index(alpha / 2.0, sorted.len()) - 1];
    Ok(IntervalEstimate {
        point: anchor_estimate,
        lower: anchor_estimate - factor * hi,
        upper: anchor_estimate - factor * lo,
        level,
        anchor,
    })
}

/// Size-correction factor `c(m, γ)`, clamped below at 1.
pub fn correction_factor(target: CorrectionTarget, m: usize, shape: f64) -> f64 {
    let m = m as f64;
    let raw = match target {
        CorrectionTarget::Rl100 => 2.48 - 0.01 * m + 0.68 * shape,
        CorrectionTarget::Mean => 1.222 - 0.001 * m + 0.251 * shape,
    };
    raw.max(1.0)
}

/// Whether `(m, γ̂)` lies where the correction formulas were calibrated.
pub fn correction_in_calibrated_range(m: usize, shape: f64) -> bool {
    (40..=100).contains(&m) && (-0.2..=0.2).contains(&shape)
}

/// Unbiased sample variance of the replicate estimates.
pub fn bootstrap_variance(reps: &BootReplicates) -> Result<f64> {
    sample_variance(&reps.estimates)
}

pub fn sample_variance(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::invalid("variance needs at least 2 values"));
    }
    let n = x.len() as f64;
    let mean = x.iter().copied().collect::<NeumaierSum>().value() / n;
    let ss = x.iter().map(|v| (v - mean).powi(2)).collect::<NeumaierSum>().value();
    Ok(ss / (n - 1.0))
}

/// The sample an anchor's point estimate is computed from.
pub fn anchor_sample(x: &[f64], r: usize, k: usize, anchor: Anchor) -> Result<WeightedSample> {
    match anchor {
        Anchor::Disjoint => WeightedSample::from_values(&disjoint_maxima(x, r)?.values),
        Anchor::Sliding => Ok(runs_weighted(&sliding_maxima(x, r)?.values)),
        Anchor::Circular => Ok(CompressedBlocks::from_values(&circmax(x, r, k)?.values, k * r, false)?
            .unit_weighted()),
    }
}

/// A bootstrap interval with everything needed to report it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiReport {
    pub interval: IntervalEstimate,
    pub replicates: BootReplicates,
    pub factor: f64,
    /// Shape estimate used for an automatic correction, if any.
    pub shape_estimate: Option<f64>,
    /// Effective sample size `⌊n/r⌋`.
    pub m: usize,
    pub warnings: Vec<String>,
}

/// Basic bootstrap interval anchored at `anchor`, with errors from `spec.method`.
pub fn bootstrap_ci(x: &[f64], spec: &BootstrapSpec, anchor: Anchor) -> Result<CiReport> {
    spec.validate()?;
    let base = resampling_base(x, spec.r, spec.method)?;
    let replicates = replicates_from_base(&base, spec)?;
    let anchor_s = anchor_sample(x, spec.r, spec.method.k(), anchor)?;
    let c_trunc = truncation_for(spec, &base.unit_weighted())?;
    let point = spec.estimator.evaluate(&anchor_s, c_trunc)?;
    let m = x.len() / spec.r;
    let mut warnings = Vec::new();
    let (factor, shape_estimate) = match spec.correction {
        Correction::None => (1.0, None),
        Correction::Factor { factor } => (factor, None),
        Correction::Auto { target } => {
            let shape = fit_gev(&anchor_s)?.params.shape;
            if !correction_in_calibrated_range(m, shape) {
                warnings.push(format!(
                    "correction factor extrapolated outside m in [40, 100], shape in [-0.2, 0.2] \
                     (m = {m}, shape = {shape:.4})"
                ));
            }
            (correction_factor(target, m, shape), Some(shape))
        }
    };
    if let ResampleMethod::NaiveSliding { .. } = spec.method {
        warnings.push("naive sliding bootstrap is inconsistent; intervals are too narrow".into());
    }
    let interval = basic_ci(point, &replicates.errors(), spec.level, factor, anchor)?;
    Ok(CiReport {
        interval,
        replicates,
        factor,
        shape_estimate,
        m,
        warnings,
    })
}

/// Interval anchored at the sliding estimator with circular bootstrap errors.
pub fn sliding_circular_ci(x: &[f64], spec: &BootstrapSpec) -> Result<CiReport> {
    match spec.method {
        ResampleMethod::Circular { k } if k >= 2 => bootstrap_ci(x, spec, Anchor::Sliding),
        _ => Err(Error::invalid("sliding-circular intervals need the circular method with k >= 2")),
    }
}
