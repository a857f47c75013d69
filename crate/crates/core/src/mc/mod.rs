//! Monte Carlo harness: MSE, bias, variance, coverage and interval width of
//! block-maxima estimators over a grid of effective sample sizes.

pub mod asymptotic;
pub mod spec;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boot::{anchor_sample, bootstrap_ci, Anchor, BootstrapSpec, Correction, Estimator, ResampleMethod};
use crate::error::{Error, Result};
use crate::fit::default_truncation;
use crate::numerics::NeumaierSum;
use crate::rng::{derive_seed, domain};
use crate::sim::Model;

pub use asymptotic::{asy_cov_frechet_sliding, asy_var_mean, i_integral, m_matrix, AsyMethod};
pub use spec::parse_experiment_spec;

/// The quantity being estimated, with its ground truth from the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum Target {
    Mean,
    ReturnLevel { period: f64 },
    FrechetShape,
}

impl Target {
    pub fn estimator(&self) -> Estimator {
        match *self {
            Target::Mean => Estimator::Mean,
            Target::ReturnLevel { period } => Estimator::ReturnLevel { period },
            Target::FrechetShape => Estimator::FrechetShape,
        }
    }

    pub fn truth(&self, model: &Model, r: usize) -> Result<f64> {
        match *self {
            Target::Mean => model.true_block_mean(r),
            Target::ReturnLevel { period } => model.true_return_level(period, r),
            Target::FrechetShape => model
                .frechet_shape()
                .ok_or_else(|| Error::invalid("the Fréchet shape target needs a heavy-tailed model")),
        }
    }
}

/// Estimation method compared in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Disjoint,
    /// Sliding estimate; intervals use circular bootstrap errors.
    Sliding,
    Circular { k: usize },
}

impl Method {
    pub fn label(&self) -> String {
        match *self {
            Method::Disjoint => "disjoint".into(),
            Method::Sliding => "sliding".into(),
            Method::Circular { k } => format!("circular-k{k}"),
        }
    }

    fn anchor(&self) -> Anchor {
        match self {
            Method::Disjoint => Anchor::Disjoint,
            Method::Sliding => Anchor::Sliding,
            Method::Circular { .. } => Anchor::Circular,
        }
    }

    fn resample(&self, k: usize) -> ResampleMethod {
        match *self {
            Method::Disjoint => ResampleMethod::Disjoint,
            Method::Sliding => ResampleMethod::Circular { k },
            Method::Circular { k } => ResampleMethod::Circular { k },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: Model,
    pub target: Target,
    pub r: usize,
    pub m_grid: Vec<usize>,
    pub methods: Vec<Method>,
    /// Outer Monte Carlo replications `N`.
    pub replications: usize,
    /// Bootstrap replicates `B`; 0 skips intervals.
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
    /// Circmax parameter used by the sliding method's bootstrap.
    pub k: usize,
    pub correction: Correction,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.r == 0 {
            return Err(Error::invalid("block size r must be at least 1"));
        }
        if self.m_grid.is_empty() || self.methods.is_empty() {
            return Err(Error::invalid("m grid and method list must be non-empty"));
        }
        if self.m_grid.contains(&0) {
            return Err(Error::invalid("effective sample sizes must be positive"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("at least one replication is required"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        for m in &self.methods {
            if let Method::Circular { k: 0 } = m {
                return Err(Error::invalid("circular k must be at least 1"));
            }
        }
        if self.replicates > 0 {
            // checked again per cell, but fail before any simulation
            BootstrapSpec {
                correction: self.correction,
                ..BootstrapSpec::new(ResampleMethod::Circular { k: self.k }, self.r, self.replicates, self.level, 0, self.target.estimator())
            }
            .validate()?;
        }
        self.target.truth(&self.model, self.r).map(|_| ())
    }
}

/// Aggregated metrics of one (method, m) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub m: usize,
    pub truth: f64,
    pub mse: f64,
    pub variance: f64,
    pub bias_sq: f64,
    /// NaN when no intervals were built.
    pub coverage: f64,
    pub avg_width: f64,
    /// Relative to the disjoint method at the same `m`; NaN without one.
    pub rel_mse: f64,
    pub rel_width: f64,
    pub replications: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

pub const CSV_HEADER: &str = "method,m,mse,variance,bias_sq,coverage,avg_width,rel_mse,rel_width";

impl MetricsTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let cells = [r.mse, r.variance, r.bias_sq, r.coverage, r.avg_width, r.rel_mse, r.rel_width]
                .map(crate::io::format_f64);
            out.push_str(&format!("{},{},{}\n", r.method, r.m, cells.join(",")));
        }
        out
    }
}

/// Result of a single replication of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Outcome {
    estimate: f64,
    interval: Option<(f64, f64)>,
}

/// Seed of the simulated series family for sample size `m`; shared by all
/// methods so they are compared on the same data.
fn series_seed(seed: u64, m: usize) -> u64 {
    derive_seed(seed ^ domain::SERIES, m as u64)
}

fn bootstrap_seed(seed: u64, m: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(seed ^ domain::BOOTSTRAP, m as u64), rep as u64)
}

/// Point estimate of a method on one series.
pub fn point_estimate(x: &[f64], r: usize, method: Method, estimator: Estimator, c_trunc: Option<f64>) -> Result<f64> {
    let k = match method {
        Method::Circular { k } => k,
        _ => 1,
    };
    let s = anchor_sample(x, r, k, method.anchor())?;
    let c = match c_trunc {
        Some(c) => c,
        None if matches!(estimator, Estimator::FrechetShape | Estimator::FrechetScale) => default_truncation(&s)?,
        None => 1.0,
    };
    estimator.evaluate(&s, c)
}

fn replicate(spec: &ExperimentSpec, method: Method, m: usize, rep: usize) -> Result<Outcome> {
    let x = spec.model.simulate_indexed(m * spec.r, series_seed(spec.seed, m), rep as u64)?;
    let estimator = spec.target.estimator();
    if spec.replicates == 0 {
        let estimate = point_estimate(&x, spec.r, method, estimator, None)?;
        return Ok(Outcome { estimate, interval: None });
    }
    let boot = BootstrapSpec {
        correction: spec.correction,
        ..BootstrapSpec::new(method.resample(spec.k), spec.r, spec.replicates, spec.level, bootstrap_seed(spec.seed, m, rep), estimator)
    };
    let rep = bootstrap_ci(&x, &boot, method.anchor())?;
    Ok(Outcome {
        estimate: rep.interval.point,
        interval: Some((rep.interval.lower, rep.interval.upper)),
    })
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.collect::<NeumaierSum>().value() / n as f64
}

fn aggregate(method: Method, m: usize, truth: f64, outcomes: &[Outcome], failures: usize) -> MetricsRow {
    let n = outcomes.len();
    let avg = mean(outcomes.iter().map(|o| o.estimate), n);
    let variance = mean(outcomes.iter().map(|o| (o.estimate - avg).powi(2)), n);
    let bias_sq = (avg - truth).powi(2);
    let mse = mean(outcomes.iter().map(|o| (o.estimate - truth).powi(2)), n);
    let intervals: Vec<(f64, f64)> = outcomes.iter().filter_map(|o| o.interval).collect();
    let (coverage, avg_width) = if intervals.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let k = intervals.len();
        (
            intervals.iter().filter(|(lo, hi)| *lo <= truth && truth <= *hi).count() as f64 / k as f64,
            mean(intervals.iter().map(|(lo, hi)| hi - lo), k),
        )
    };
    MetricsRow {
        method: method.label(),
        m,
        truth,
        mse,
        variance,
        bias_sq,
        coverage,
        avg_width,
        rel_mse: f64::NAN,
        rel_width: f64::NAN,
        replications: n,
        failures,
    }
}

/// Runs one (method, m) cell.
pub fn run_cell(spec: &ExperimentSpec, method: Method, m: usize) -> Result<MetricsRow> {
    let truth = spec.target.truth(&spec.model, spec.r)?;
    let results: Vec<Result<Outcome>> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| replicate(spec, method, m, rep))
        .collect();
    let mut outcomes = Vec::with_capacity(results.len());
    let mut failures = 0;
    let mut last = None;
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            // caller errors are not a matter of bad luck in one replication
            Err(e) if !e.is_statistical() => return Err(e),
            Err(e) => {
                failures += 1;
                last = Some(e);
            }
        }
    }
    if failures * 20 > spec.replications || outcomes.is_empty() {
        return Err(Error::TooManyFailures {
            failures,
            total: spec.replications,
            last: last.map(|e| e.to_string()).unwrap_or_default(),
        });
    }
    Ok(aggregate(method, m, truth, &outcomes, failures))
}

/// Runs every (method, m) cell; deterministic in the spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<MetricsTable> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &m in &spec.m_grid {
        let first = rows.len();
        for &method in &spec.methods {
            rows.push(run_cell(spec, method, m)?);
        }
        if let Some(d) = rows[first..].iter().find(|r| r.method == "disjoint").cloned() {
            for row in &mut rows[first..] {
                row.rel_mse = row.mse / d.mse;
                row.rel_width = row.avg_width / d.avg_width;
            }
        }
    }
    Ok(MetricsTable { rows })
}

/// Variance of an estimator over `reps` independent series, used as the
/// reference value for bootstrap variance estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Presimulation {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub replications: usize,
}

pub fn presimulate_variance(
    model: &Model,
    estimator: Estimator,
    method: Method,
    r: usize,
    m: usize,
    replications: usize,
    seed: u64,
) -> Result<Presimulation> {
    if replications < 2 {
        return Err(Error::invalid("presimulation needs at least 2 replications"));
    }
    let family = derive_seed(seed ^ domain::PRESIM, m as u64);
    let estimates = (0..replications)
        .into_par_iter()
        .map(|i| {
            let x = model.simulate_indexed(m * r, family, i as u64)?;
            point_estimate(&x, r, method, estimator, None)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = estimates.len();
    Ok(Presimulation {
        mean: mean(estimates.iter().copied(), n),
        variance: crate::boot::sample_variance(&estimates)?,
        replications: n,
    })
}
