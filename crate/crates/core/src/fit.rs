//! Weighted pseudo-maximum-likelihood fits and plug-in functionals.
//!
//! Block-maxima samples are handled as weighted samples: a compressed circmax
//! block contributes each distinct value with its multiplicity, and bootstrap
//! resampling multiplies those multiplicities by the block's draw count.

use serde::{Deserialize, Serialize};

use crate::dist::{frechet_loglik_unchecked, gev_loglik, FrechetParams, GevParams, GUMBEL_THRESHOLD};
use crate::error::{Error, Result};
use crate::numerics::{brent, sum, NelderMead, NeumaierSum};

/// `(value, weight)` pairs with non-negative weights and positive total weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    items: Vec<(f64, f64)>,
}

impl WeightedSample {
    pub fn new(items: Vec<(f64, f64)>) -> Result<Self> {
        for &(v, w) in &items {
            if !v.is_finite() {
                return Err(Error::invalid(format!("sample value {v} is not finite")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("weight {w} is negative or not finite")));
            }
        }
        let s = Self { items };
        if !(s.total_weight() > 0.0) {
            return Err(Error::invalid("total weight must be positive"));
        }
        Ok(s)
    }

    /// Unit weights.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| (v, 1.0)).collect())
    }

    pub(crate) fn from_items_unchecked(items: Vec<(f64, f64)>) -> Self {
        Self { items }
    }

    pub fn items(&self) -> &[(f64, f64)] {
        &self.items
    }

    fn active(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.items.iter().copied().filter(|&(_, w)| w > 0.0)
    }

    pub fn total_weight(&self) -> f64 {
        sum(self.items.iter().map(|&(_, w)| w))
    }

    /// Number of distinct values carrying positive weight.
    pub fn distinct_values(&self) -> usize {
        let mut v: Vec<f64> = self.active().map(|(x, _)| x).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    }

    /// Weighted median (lower median for even splits).
    pub fn median(&self) -> f64 {
        let mut v: Vec<(f64, f64)> = self.active().collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let half = 0.5 * sum(v.iter().map(|p| p.1));
        let mut acc = 0.0;
        for &(x, w) in &v {
            acc += w;
            if acc >= half {
                return x;
            }
        }
        v.last().map_or(f64::NAN, |p| p.0)
    }

    fn mean_and_sd(&self) -> (f64, f64) {
        let total = self.total_weight();
        let mean = sum(self.active().map(|(x, w)| w * x)) / total;
        let var = sum(self.active().map(|(x, w)| w * (x - mean).powi(2))) / total;
        (mean, var.sqrt())
    }
}

/// Outcome of a likelihood maximisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult<P> {
    pub params: P,
    /// Weighted log-likelihood at `params`.
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Weighted mean `Σ w x / Σ w`.
pub fn weighted_mean(s: &WeightedSample) -> Result<f64> {
    let total = s.total_weight();
    if !(total > 0.0) {
        return Err(Error::invalid("total weight must be positive"));
    }
    Ok(sum(s.active().map(|(x, w)| w * x)) / total)
}

/// The truncation constant used when none is given: `1e-6 · median`.
pub fn default_truncation(s: &WeightedSample) -> Result<f64> {
    let med = s.median();
    if !(med > 0.0) {
        return Err(Error::invalid(format!(
            "default truncation needs a positive median, got {med}; pass one explicitly"
        )));
    }
    Ok(1e-6 * med)
}

const FRECHET_SHAPE_MIN: f64 = 1e-4;
const FRECHET_SHAPE_MAX: f64 = 1e4;

/// Fréchet pseudo-MLE of `Σ w ℓ_θ(x ∨ c_trunc)` by profiling out the scale.
///
/// For fixed shape α the scale solves `σ^α = Σw / Σ w y^{-α}`; the shape is
/// the root of the profile score
/// `1/α + Σ w y^{-α} log y / Σ w y^{-α} - Σ w log y / Σ w`,
/// which is strictly decreasing in α.
pub fn fit_frechet(s: &WeightedSample, c_trunc: f64) -> Result<FitResult<FrechetParams>> {
    if !(c_trunc > 0.0 && c_trunc.is_finite()) {
        return Err(Error::invalid(format!(
            "truncation constant must be positive, got {c_trunc}"
        )));
    }
    let pts: Vec<(f64, f64)> = s.active().map(|(x, w)| (x.max(c_trunc).ln(), w)).collect();
    let total = sum(pts.iter().map(|p| p.1));
    let log_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let log_max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if log_min == log_max {
        return Err(Error::AllTied(log_min.exp()));
    }
    let mean_log = sum(pts.iter().map(|&(l, w)| w * l)) / total;

    let mut evaluations = 0usize;
    let mut score = |alpha: f64| {
        evaluations += 1;
        let mut num = NeumaierSum::new();
        let mut den = NeumaierSum::new();
        for &(l, w) in &pts {
            let e = w * (-alpha * (l - log_min)).exp();
            num.add(e * (l - log_min));
            den.add(e);
        }
        1.0 / alpha + num.value() / den.value() - (mean_log - log_min)
    };

    let (mut lo, mut hi) = (0.5, 2.0);
    while score(lo) <= 0.0 {
        hi = lo;
        lo *= 0.5;
        if lo < FRECHET_SHAPE_MIN {
            return Err(Error::NoConvergence(format!(
                "Fréchet shape below {FRECHET_SHAPE_MIN}"
            )));
        }
    }
    while score(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > FRECHET_SHAPE_MAX {
            return Err(Error::NoConvergence(format!(
                "Fréchet shape above {FRECHET_SHAPE_MAX}"
            )));
        }
    }
    let alpha = brent(&mut score, lo, hi, 1e-14 * hi, 500)?;

    let den = sum(pts.iter().map(|&(l, w)| w * (-alpha * (l - log_min)).exp()));
    let log_scale = log_min + (total.ln() - den.ln()) / alpha;
    let scale = log_scale.exp();
    let params = FrechetParams::new(alpha, scale)?;
    let loglik = sum(
        pts.iter()
            .map(|&(l, w)| w * frechet_loglik_unchecked(alpha, scale, l.exp())),
    );
    Ok(FitResult {
        params,
        loglik,
        converged: true,
        iterations: evaluations,
    })
}

/// Options for [`fit_gev_with`].
#[derive(Debug, Clone, Copy)]
pub struct GevFitOptions {
    pub max_iter: usize,
    /// Simplex diameter tolerance in scaled coordinates.
    pub tolerance: f64,
}

impl Default for GevFitOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tolerance: 1e-8,
        }
    }
}

/// GEV pseudo-MLE with default options.
pub fn fit_gev(s: &WeightedSample) -> Result<FitResult<GevParams>> {
    fit_gev_with(s, GevFitOptions::default())
}

/// GEV pseudo-MLE of `Σ w ℓ_θ(x)` by simplex search.
///
/// The search runs in coordinates `((loc - loc₀)/scale₀, log(scale/scale₀), γ)`
/// around a Gumbel moment start, so it is exactly affine-equivariant in the
/// data up to rounding. One restart from the optimum guards against a
/// collapsed simplex.
pub fn fit_gev_with(s: &WeightedSample, opts: GevFitOptions) -> Result<FitResult<GevParams>> {
    if s.distinct_values() < 3 {
        return Err(Error::Degenerate(
            "GEV fit needs at least 3 distinct values".into(),
        ));
    }
    let total = s.total_weight();
    let (mean, sd) = s.mean_and_sd();
    let scale0 = sd * 6f64.sqrt() / std::f64::consts::PI;
    let loc0 = mean - 0.5772 * scale0;
    let pts: Vec<(f64, f64)> = s.active().map(|(x, w)| ((x - loc0) / scale0, w / total)).collect();

    let objective = |p: &[f64]| -> f64 {
        let th = GevParams {
            loc: p[0],
            scale: p[1].exp(),
            shape: p[2],
        };
        let mut acc = NeumaierSum::new();
        for &(z, w) in &pts {
            let l = gev_loglik(&th, z);
            if l == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            acc.add(w * l);
        }
        -acc.value()
    };

    let mut start = [0.0, 0.0, 0.1];
    if !objective(&start).is_finite() {
        start[2] = 0.0;
    }
    let mut nm = NelderMead {
        diameter_tol: opts.tolerance,
        max_iter: opts.max_iter,
        initial_step: 0.1,
    };
    let first = nm.minimize(objective, &start);
    let mut iterations = first.iterations;
    let mut best = first;
    if best.converged && iterations < opts.max_iter {
        nm.max_iter = opts.max_iter - iterations;
        nm.initial_step = 0.01;
        let second = nm.minimize(objective, &best.point);
        iterations += second.iterations;
        let converged = second.converged;
        if second.value <= best.value {
            best = second;
        }
        best.converged = converged;
    }
    if !best.converged || !best.value.is_finite() {
        return Err(Error::NoConvergence(format!(
            "GEV simplex search did not converge within {} iterations",
            opts.max_iter
        )));
    }
    let mut shape = best.point[2];
    if shape.abs() < GUMBEL_THRESHOLD {
        shape = 0.0;
    }
    let params = GevParams::new(loc0 + scale0 * best.point[0], scale0 * best.point[1].exp(), shape)?;
    let loglik = sum(s.active().map(|(x, w)| w * gev_loglik(&params, x)));
    Ok(FitResult {
        params,
        loglik,
        converged: true,
        iterations,
    })
}

/// `c_T = -log(1 - 1/T)`.
pub fn return_period_constant(period: f64) -> Result<f64> {
    if !(period > 1.0) {
        return Err(Error::invalid(format!("return period must exceed 1, got {period}")));
    }
    Ok(-(-1.0 / period).ln_1p())
}

/// Plug-in return level `b + a (c_T^{-γ} - 1)/γ`, the `(1 - 1/T)`-quantile of
/// the fitted GEV.
pub fn return_level_from_gev(theta: &GevParams, period: f64) -> Result<f64> {
    let c = return_period_constant(period)?;
    let z = if theta.shape.abs() < GUMBEL_THRESHOLD {
        -c.ln()
    } else {
        (-theta.shape * c.ln()).exp_m1() / theta.shape
    };
    Ok(theta.loc + theta.scale * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{gev_quantile, frechet_quantile};
    use crate::rng::{domain, open01, stream};
    use approx::assert_abs_diff_eq;

    fn sample(values: &[f64]) -> WeightedSample {
        WeightedSample::from_values(values).unwrap()
    }

    fn frechet_draws(n: usize, alpha: f64, sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, domain::TEST, 0);
        let th = FrechetParams::new(alpha, sigma).unwrap();
        (0..n).map(|_| frechet_quantile(open01(&mut rng), &th).unwrap()).collect()
    }

    fn gev_draws(n: usize, th: GevParams, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, domain::TEST, 1);
        (0..n).map(|_| gev_quantile(open01(&mut rng), &th).unwrap()).collect()
    }

    #[test]
    fn weighted_sample_validation() {
        assert!(WeightedSample::new(vec![(1.0, 0.0)]).is_err());
        assert!(WeightedSample::new(vec![(f64::NAN, 1.0)]).is_err());
        assert!(WeightedSample::new(vec![(1.0, -1.0), (2.0, 3.0)]).is_err());
        assert!(WeightedSample::new(vec![]).is_err());
    }

    #[test]
    fn weighted_mean_examples() {
        assert_eq!(weighted_mean(&WeightedSample::new(vec![(2.0, 1.0), (4.0, 1.0)]).unwrap()).unwrap(), 3.0);
        assert_eq!(weighted_mean(&WeightedSample::new(vec![(5.0, 3.0)]).unwrap()).unwrap(), 5.0);
    }

    #[test]
    fn return_level_examples() {
        let gumbel = GevParams::new(0.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(return_level_from_gev(&gumbel, 100.0).unwrap(), 4.600_149_226_776_58, epsilon = 1e-12);
        let heavy = GevParams::new(0.0, 1.0, 0.2).unwrap();
        // (c^{-0.2} - 1)/0.2 with c = -log(0.99), evaluated in 30-digit arithmetic
        assert_abs_diff_eq!(return_level_from_gev(&heavy, 100.0).unwrap(), 7.546_826_408_585_784, epsilon = 1e-11);
        for th in [heavy, gumbel, GevParams::new(3.0, 0.4, -0.3).unwrap()] {
            for t in [1.5, 10.0, 365.0] {
                assert_abs_diff_eq!(
                    return_level_from_gev(&th, t).unwrap(),
                    gev_quantile(1.0 - 1.0 / t, &th).unwrap(),
                    epsilon = 1e-12 * (1.0 + th.loc.abs())
                );
            }
        }
        assert!(return_level_from_gev(&gumbel, 1.0).is_err());
    }

    #[test]
    fn frechet_all_tied() {
        let s = sample(&[0.001, 0.002, 0.0005]);
        assert!(matches!(fit_frechet(&s, 0.01), Err(Error::AllTied(_))));
        assert!(matches!(fit_frechet(&sample(&[3.0, 3.0]), 0.01), Err(Error::AllTied(_))));
    }

    #[test]
    fn frechet_consistency() {
        let x = frechet_draws(100_000, 1.0, 1.0, 11);
        let fit = fit_frechet(&sample(&x), 0.01).unwrap();
        assert!((fit.params.shape - 1.0).abs() < 0.02, "{:?}", fit.params);
        assert!((fit.params.scale - 1.0).abs() < 0.02, "{:?}", fit.params);
    }

    #[test]
    fn frechet_two_point_grid_oracle() {
        let s = WeightedSample::new(vec![(2.0, 1.0), (8.0, 1.0)]).unwrap();
        let fit = fit_frechet(&s, 0.01).unwrap();
        // coarse-to-fine grid search over (alpha, sigma), final resolution 1e-4
        let ll = |a: f64, sg: f64| frechet_loglik_unchecked(a, sg, 2.0) + frechet_loglik_unchecked(a, sg, 8.0);
        let (mut ca, mut cs, mut half) = (2.0f64, 5.0f64, 2.0f64);
        let mut step = 0.1f64;
        while step >= 1e-4 {
            let mut best = (f64::NEG_INFINITY, ca, cs);
            let steps = (half / step).round() as i64;
            for i in -steps..=steps {
                for j in -steps..=steps {
                    let a = ca + i as f64 * step;
                    let sg = cs + j as f64 * step;
                    if a > 0.0 && sg > 0.0 {
                        let v = ll(a, sg);
                        if v > best.0 {
                            best = (v, a, sg);
                        }
                    }
                }
            }
            ca = best.1;
            cs = best.2;
            half = 5.0 * step;
            step /= 10.0;
        }
        assert!((fit.params.shape - ca).abs() <= 2e-4, "{} vs {}", fit.params.shape, ca);
        assert!((fit.params.scale - cs).abs() <= 2e-4, "{} vs {}", fit.params.scale, cs);
    }

    #[test]
    fn frechet_scores_vanish() {
        let x = frechet_draws(2_000, 1.5, 3.0, 5);
        let s = WeightedSample::new(x.iter().enumerate().map(|(i, &v)| (v, 1.0 + (i % 3) as f64)).collect()).unwrap();
        let fit = fit_frechet(&s, 1e-3).unwrap();
        let (a, sg) = (fit.params.shape, fit.params.scale);
        // analytic partial derivatives of Σ w ℓ
        let mut da = 0.0;
        let mut ds = 0.0;
        for &(v, w) in s.items() {
            let y = v.max(1e-3);
            let lr = (y / sg).ln();
            let p = (-a * lr).exp();
            da += w * (1.0 / a + p * lr - lr);
            ds += w * (-1.0 / sg - p * a / sg + (a + 1.0) / sg);
        }
        let total = s.total_weight();
        assert!((da / total).abs() < 1e-8, "{da}");
        assert!((ds / total).abs() < 1e-8, "{ds}");
    }

    #[test]
    fn frechet_equivariance_and_inert_truncation() {
        let x = frechet_draws(500, 0.8, 2.0, 9);
        let base = fit_frechet(&sample(&x), 1e-6).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * 7.5).collect();
        let fit = fit_frechet(&sample(&scaled), 7.5e-6).unwrap();
        assert_abs_diff_eq!(fit.params.shape, base.params.shape, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params.scale, 7.5 * base.params.scale, epsilon = 1e-8 * fit.params.scale);
        let min = x.iter().copied().fold(f64::INFINITY, f64::min);
        let other = fit_frechet(&sample(&x), 0.5 * min).unwrap();
        assert_eq!(other.params, base.params);
    }

    #[test]
    fn gev_degenerate() {
        assert!(matches!(fit_gev(&sample(&[1.0, 2.0, 1.0, 2.0])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn gev_consistency() {
        let th = GevParams::new(0.0, 1.0, 0.1).unwrap();
        let x = gev_draws(10_000, th, 3);
        let fit = fit_gev(&sample(&x)).unwrap();
        assert!((fit.params.shape - 0.1).abs() < 0.03, "{:?}", fit.params);
        assert!(fit.converged);
    }

    #[test]
    fn gev_weighted_equals_expanded() {
        let th = GevParams::new(2.0, 0.5, -0.1).unwrap();
        let x = gev_draws(300, th, 4);
        let items: Vec<(f64, f64)> = x.iter().enumerate().map(|(i, &v)| (v, (1 + i % 4) as f64)).collect();
        let flat: Vec<f64> = items
            .iter()
            .flat_map(|&(v, w)| std::iter::repeat(v).take(w as usize))
            .collect();
        let a = fit_gev(&WeightedSample::new(items).unwrap()).unwrap().params;
        let b = fit_gev(&sample(&flat)).unwrap().params;
        assert_abs_diff_eq!(a.loc, b.loc, epsilon = 1e-6);
        assert_abs_diff_eq!(a.scale, b.scale, epsilon = 1e-6);
        assert_abs_diff_eq!(a.shape, b.shape, epsilon = 1e-6);
    }

    #[test]
    fn gev_local_optimality() {
        let th = GevParams::new(10.0, 2.0, 0.15).unwrap();
        let x = gev_draws(800, th, 8);
        let s = sample(&x);
        let fit = fit_gev(&s).unwrap();
        let p = fit.params;
        let ll = |q: &GevParams| sum(x.iter().map(|&v| gev_loglik(q, v)));
        let base = ll(&p);
        let (_, sd) = s.mean_and_sd();
        let unit = sd * 6f64.sqrt() / std::f64::consts::PI;
        for d in [1e-4, -1e-4] {
            let cands = [
                GevParams { loc: p.loc + d * unit, ..p },
                GevParams { scale: p.scale * d.exp(), ..p },
                GevParams { shape: p.shape + d, ..p },
            ];
            for c in cands {
                assert!(ll(&c) <= base + 1e-9, "{c:?}");
            }
        }
    }
}
