//! Moving-window block-maxima analysis.
//!
//! Each window covers `window_blocks` blocks of `r` observations and
//! advances by `step_blocks` blocks. Within a window the usual point
//! estimate and basic bootstrap interval are computed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boot::{bootstrap_ci, Anchor, BootstrapSpec, Correction, Estimator, ResampleMethod};
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMethod {
    /// Disjoint estimate with disjoint bootstrap errors.
    Disjoint,
    /// Sliding estimate with circular bootstrap errors.
    SlidingCircular,
}

impl ScanMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ScanMethod::Disjoint => "disjoint",
            ScanMethod::SlidingCircular => "sliding-circular",
        }
    }
}

pub fn estimator_label(e: &Estimator) -> String {
    match e {
        Estimator::Mean => "mean".into(),
        Estimator::FrechetShape => "frechet-shape".into(),
        Estimator::FrechetScale => "frechet-scale".into(),
        Estimator::GevShape => "gev-shape".into(),
        Estimator::ReturnLevel { period } => format!("rl{period}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScanSpec {
    pub window_blocks: usize,
    pub r: usize,
    pub step_blocks: usize,
    pub targets: Vec<Estimator>,
    pub methods: Vec<ScanMethod>,
    pub k: usize,
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
    pub correction: Correction,
    /// Width of the trailing moving average applied to output curves.
    pub smoothing: usize,
}

impl WindowScanSpec {
    pub fn new(window_blocks: usize, r: usize) -> Self {
        Self {
            window_blocks,
            r,
            step_blocks: 1,
            targets: vec![Estimator::ReturnLevel { period: 100.0 }],
            methods: vec![ScanMethod::Disjoint, ScanMethod::SlidingCircular],
            k: 2,
            replicates: 200,
            level: 0.95,
            seed: 0,
            correction: Correction::None,
            smoothing: 2,
        }
    }

    /// Window start offsets (in observations) for a series of length `n`.
    pub fn window_starts(&self, n: usize) -> Result<Vec<usize>> {
        if self.r == 0 || self.window_blocks == 0 || self.step_blocks == 0 || self.smoothing == 0 {
            return Err(Error::invalid("r, window, step and smoothing widths must be positive"));
        }
        let total_blocks = n / self.r;
        if self.window_blocks > total_blocks {
            return Err(Error::invalid(format!(
                "a window of {} blocks of {} needs {} observations, only {n} available",
                self.window_blocks,
                self.r,
                self.window_blocks * self.r
            )));
        }
        Ok((0..=total_blocks - self.window_blocks)
            .step_by(self.step_blocks)
            .map(|b| b * self.r)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// One past the last observation of the window.
    pub window_end_index: usize,
    pub target: String,
    pub method: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub smoothed_estimate: f64,
    pub smoothed_lower: f64,
    pub smoothed_upper: f64,
    pub smoothed_width: f64,
}

pub const SCAN_HEADER: &str = "window_end_index,target,method,estimate,lower,upper,width,\
smoothed_estimate,smoothed_lower,smoothed_upper,smoothed_width";

/// Trailing moving average; the first `width - 1` entries are NaN.
pub fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            if width == 0 || i + 1 < width {
                f64::NAN
            } else {
                x[i + 1 - width..=i].iter().sum::<f64>() / width as f64
            }
        })
        .collect()
}

pub fn window_scan(x: &[f64], spec: &WindowScanSpec) -> Result<Vec<ScanRow>> {
    let starts = spec.window_starts(x.len())?;
    let len = spec.window_blocks * spec.r;
    let mut rows = Vec::new();
    for target in &spec.targets {
        for &method in &spec.methods {
            let (resample, anchor) = match method {
                ScanMethod::Disjoint => (ResampleMethod::Disjoint, Anchor::Disjoint),
                ScanMethod::SlidingCircular => (ResampleMethod::Circular { k: spec.k }, Anchor::Sliding),
            };
            let intervals = starts
                .par_iter()
                .enumerate()
                .map(|(w, &s)| {
                    let boot = BootstrapSpec {
                        correction: spec.correction,
                        ..BootstrapSpec::new(resample, spec.r, spec.replicates, spec.level, derive_seed(spec.seed, w as u64), *target)
                    };
                    bootstrap_ci(&x[s..s + len], &boot, anchor).map(|rep| rep.interval)
                })
                .collect::<Result<Vec<_>>>()?;
            let column = |f: fn(&crate::boot::IntervalEstimate) -> f64| {
                moving_average(&intervals.iter().map(f).collect::<Vec<_>>(), spec.smoothing)
            };
            let se = column(|i| i.point);
            let sl = column(|i| i.lower);
            let su = column(|i| i.upper);
            let sw = column(|i| i.width());
            for (j, (iv, &s)) in intervals.iter().zip(&starts).enumerate() {
                rows.push(ScanRow {
                    window_end_index: s + len,
                    target: estimator_label(target),
                    method: method.label().into(),
                    estimate: iv.point,
                    lower: iv.lower,
                    upper: iv.upper,
                    width: iv.width(),
                    smoothed_estimate: se[j],
                    smoothed_lower: sl[j],
                    smoothed_upper: su[j],
                    smoothed_width: sw[j],
                });
            }
        }
    }
    Ok(rows)
}

pub fn scan_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for r in rows {
        let nums = [
            r.estimate,
            r.lower,
            r.upper,
            r.width,
            r.smoothed_estimate,
            r.smoothed_lower,
            r.smoothed_upper,
            r.smoothed_width,
        ]
        .map(format_f64);
        out.push_str(&format!("{},{},{},{}\n", r.window_end_index, r.target, r.method, nums.join(",")));
    }
    out
}
