//! Closed-form GPD, GEV and Fréchet primitives.
//!
//! Shapes with `|γ| < GUMBEL_THRESHOLD` are evaluated through the analytic
//! `γ = 0` limit; elsewhere powers are formed with `log1p`/`expm1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this magnitude a shape parameter is treated as exactly zero.
pub const GUMBEL_THRESHOLD: f64 = 1e-9;

#[inline]
fn is_gumbel(shape: f64) -> bool {
    shape.abs() < GUMBEL_THRESHOLD
}

/// GEV(loc, scale, shape) parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub loc: f64,
    pub scale: f64,
    pub shape: f64,
}

impl GevParams {
    pub fn new(loc: f64, scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("GEV scale must be positive, got {scale}")));
        }
        if !loc.is_finite() || !shape.is_finite() {
            return Err(Error::invalid("GEV location and shape must be finite"));
        }
        Ok(Self { loc, scale, shape })
    }

    /// Whether `x` lies in the open support `1 + γ(x - loc)/scale > 0`.
    pub fn in_support(&self, x: f64) -> bool {
        is_gumbel(self.shape) || 1.0 + self.shape * (x - self.loc) / self.scale > 0.0
    }
}

/// Fréchet(shape α, scale σ) parameters, CDF `exp(-(x/σ)^{-α})` on `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetParams {
    pub shape: f64,
    pub scale: f64,
}

impl FrechetParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!(
                "Fréchet parameters must be positive, got shape={shape}, scale={scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    /// The same law written as a GEV with positive shape.
    pub fn to_gev(&self) -> GevParams {
        GevParams {
            loc: self.scale,
            scale: self.scale / self.shape,
            shape: 1.0 / self.shape,
        }
    }
}

/// Shape of the standard generalized Pareto law GPD(0, 1, γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdShape(pub f64);

impl GpdShape {
    /// Upper endpoint of the support, `-1/γ` for negative shapes.
    pub fn upper_endpoint(self) -> f64 {
        if self.0 < 0.0 && !is_gumbel(self.0) {
            -1.0 / self.0
        } else {
            f64::INFINITY
        }
    }
}

fn check_probability_half_open(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability must lie in [0, 1), got {p}")))
    }
}

fn check_probability_open(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability must lie in (0, 1), got {p}")))
    }
}

pub fn gpd_cdf(x: f64, shape: GpdShape) -> f64 {
    let g = shape.0;
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if is_gumbel(g) {
        return -(-x).exp_m1();
    }
    if x >= shape.upper_endpoint() {
        return 1.0;
    }
    -(-(g * x).ln_1p() / g).exp_m1()
}

pub fn gpd_pdf(x: f64, shape: GpdShape) -> f64 {
    let g = shape.0;
    if x < 0.0 || x > shape.upper_endpoint() {
        return 0.0;
    }
    if is_gumbel(g) {
        return (-x).exp();
    }
    (-(1.0 / g + 1.0) * (g * x).ln_1p()).exp()
}

pub fn gpd_quantile(p: f64, shape: GpdShape) -> Result<f64> {
    check_probability_half_open(p)?;
    Ok(gpd_quantile_unchecked(p, shape.0))
}

pub(crate) fn gpd_quantile_unchecked(p: f64, g: f64) -> f64 {
    let log_tail = (-p).ln_1p();
    if is_gumbel(g) {
        -log_tail
    } else {
        (-g * log_tail).exp_m1() / g
    }
}

/// Standardized GEV CDF `G_γ(z)`.
pub fn gev_std_cdf(z: f64, shape: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if is_gumbel(shape) {
        return (-(-z).exp()).exp();
    }
    let t = shape * z;
    if t <= -1.0 {
        return if shape > 0.0 { 0.0 } else { 1.0 };
    }
    (-(-t.ln_1p() / shape).exp()).exp()
}

pub fn gev_cdf(x: f64, theta: &GevParams) -> f64 {
    gev_std_cdf((x - theta.loc) / theta.scale, theta.shape)
}

pub fn gev_quantile(p: f64, theta: &GevParams) -> Result<f64> {
    check_probability_open(p)?;
    Ok(gev_quantile_unchecked(p, theta))
}

pub(crate) fn gev_quantile_unchecked(p: f64, theta: &GevParams) -> f64 {
    let y = -(-p.ln()).ln();
    // (-log p)^{-γ} = exp(γ·y)
    let z = if is_gumbel(theta.shape) {
        y
    } else {
        (theta.shape * y).exp_m1() / theta.shape
    };
    theta.loc + theta.scale * z
}

/// GEV log-density; `-inf` outside the support.
pub fn gev_loglik(theta: &GevParams, x: f64) -> f64 {
    let z = (x - theta.loc) / theta.scale;
    let log_scale = theta.scale.ln();
    if is_gumbel(theta.shape) {
        return -log_scale - z - (-z).exp();
    }
    let t = theta.shape * z;
    if t <= -1.0 || t.is_nan() {
        return f64::NEG_INFINITY;
    }
    let log_t = t.ln_1p();
    -log_scale - (1.0 + 1.0 / theta.shape) * log_t - (-log_t / theta.shape).exp()
}

pub fn gev_pdf(x: f64, theta: &GevParams) -> f64 {
    gev_loglik(theta, x).exp()
}

pub fn frechet_cdf(x: f64, theta: &FrechetParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (-(-theta.shape * (x / theta.scale).ln()).exp()).exp()
}

pub fn frechet_quantile(p: f64, theta: &FrechetParams) -> Result<f64> {
    check_probability_open(p)?;
    Ok(theta.scale * (-(-p.ln()).ln() / theta.shape).exp())
}

/// Fréchet log-density `log(α/σ) - (x/σ)^{-α} - (α+1) log(x/σ)`.
pub fn frechet_loglik(theta: &FrechetParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::invalid(format!(
            "Fréchet log-likelihood needs x > 0, got {x}"
        )));
    }
    Ok(frechet_loglik_unchecked(theta.shape, theta.scale, x))
}

#[inline]
pub(crate) fn frechet_loglik_unchecked(shape: f64, scale: f64, x: f64) -> f64 {
    let log_ratio = (x / scale).ln();
    (shape / scale).ln() - (-shape * log_ratio).exp() - (shape + 1.0) * log_ratio
}

pub fn frechet_pdf(x: f64, theta: &FrechetParams) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        frechet_loglik_unchecked(theta.shape, theta.scale, x).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    fn gev(loc: f64, scale: f64, shape: f64) -> GevParams {
        GevParams::new(loc, scale, shape).unwrap()
    }

    #[test]
    fn gpd_cdf_examples() {
        assert_eq!(gpd_cdf(0.0, GpdShape(0.2)), 0.0);
        assert_abs_diff_eq!(gpd_cdf(1.0, GpdShape(0.0)), 1.0 - (-1f64).exp(), epsilon = 1e-15);
        assert_eq!(gpd_cdf(5.0, GpdShape(-0.2)), 1.0);
        // 1 - 1.2^{-5}, evaluated in high precision: 0.598122427983539...
        assert_abs_diff_eq!(gpd_cdf(1.0, GpdShape(0.2)), 0.598_122_427_983_539_1, epsilon = 1e-13);
    }

    #[test]
    fn gpd_quantile_examples() {
        assert_eq!(gpd_quantile(0.0, GpdShape(-0.1)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            gpd_quantile(1.0 - (-1f64).exp(), GpdShape(0.0)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(gpd_quantile(0.59812, GpdShape(0.2)).unwrap(), 1.0, epsilon = 1e-4);
        assert!(gpd_quantile(1.0, GpdShape(0.1)).is_err());
        assert!(gpd_quantile(-0.1, GpdShape(0.1)).is_err());
    }

    #[test]
    fn gev_cdf_examples() {
        assert_abs_diff_eq!(gev_cdf(0.0, &gev(0.0, 1.0, 0.0)), (-1f64).exp(), epsilon = 1e-15);
        for shape in [-0.3, 0.2, 0.7] {
            assert_abs_diff_eq!(gev_cdf(4.0, &gev(4.0, 2.5, shape)), (-1f64).exp(), epsilon = 1e-15);
        }
        // exp(-1.5^{-2}) = exp(-4/9)
        assert_abs_diff_eq!(
            gev_cdf(1.0, &gev(0.0, 1.0, 0.5)),
            0.641_180_388_429_955_3,
            epsilon = 1e-13
        );
    }

    #[test]
    fn gev_quantile_examples() {
        assert_abs_diff_eq!(gev_quantile((-1f64).exp(), &gev(0.0, 1.0, 0.0)).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            gev_quantile(0.99, &gev(0.0, 1.0, 0.0)).unwrap(),
            4.600_149_226_776_597,
            epsilon = 1e-12
        );
        assert!(gev_quantile(0.0, &gev(0.0, 1.0, 0.0)).is_err());
        assert!(gev_quantile(1.0, &gev(0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn frechet_loglik_examples() {
        let unit = FrechetParams::new(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(frechet_loglik(&unit, 1.0).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(frechet_loglik(&unit, E).unwrap(), -(-1f64).exp() - 2.0, epsilon = 1e-14);
        let th = FrechetParams::new(2.0, 3.0).unwrap();
        assert_abs_diff_eq!(
            frechet_loglik(&th, 3.0).unwrap(),
            (2f64 / 3.0).ln() - 1.0,
            epsilon = 1e-14
        );
        assert!(frechet_loglik(&unit, 0.0).is_err());
        assert!(frechet_loglik(&unit, -1.0).is_err());
    }

    #[test]
    fn gev_loglik_examples() {
        assert_abs_diff_eq!(gev_loglik(&gev(0.0, 1.0, 0.0), 0.0), -1.0, epsilon = 1e-15);
        assert_eq!(gev_loglik(&gev(0.0, 1.0, -0.5), 3.0), f64::NEG_INFINITY);
        assert_abs_diff_eq!(
            gev_loglik(&gev(0.0, 2.0, 0.0), 0.0),
            -1.0 - 2f64.ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn parameter_validation() {
        assert!(GevParams::new(0.0, 0.0, 0.1).is_err());
        assert!(GevParams::new(0.0, -1.0, 0.1).is_err());
        assert!(FrechetParams::new(0.0, 1.0).is_err());
        assert!(FrechetParams::new(1.0, -2.0).is_err());
    }

    #[test]
    fn gumbel_branch_is_continuous() {
        let base = gev(0.3, 1.7, 0.0);
        for eps in [1e-8, -1e-8, 2e-9, -2e-9] {
            let near = gev(0.3, 1.7, eps);
            for x in [-2.0, -0.5, 0.0, 0.3, 1.0, 4.0, 9.0] {
                assert_abs_diff_eq!(gev_cdf(x, &near), gev_cdf(x, &base), epsilon = 1e-6);
                assert_abs_diff_eq!(gev_loglik(&near, x), gev_loglik(&base, x), epsilon = 1e-6);
            }
            for p in [0.01, 0.3, 0.5, 0.9, 0.999] {
                assert_abs_diff_eq!(
                    gev_quantile(p, &near).unwrap(),
                    gev_quantile(p, &base).unwrap(),
                    epsilon = 1e-6
                );
            }
        }
        // either side of the switch
        for x in [0.5, 2.0] {
            assert_abs_diff_eq!(
                gpd_cdf(x, GpdShape(0.9e-9)),
                gpd_cdf(x, GpdShape(1.1e-9)),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn frechet_is_reparametrized_gev() {
        for (a, s) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)] {
            let fr = FrechetParams::new(a, s).unwrap();
            let g = fr.to_gev();
            for i in 1..200 {
                let x = 0.05 * i as f64;
                assert_abs_diff_eq!(frechet_cdf(x, &fr), gev_cdf(x, &g), epsilon = 1e-10);
            }
        }
    }

    /// Integrates a density between the quantiles `1e-10` and `1 - 1e-10`,
    /// piecewise so heavy tails stay resolvable.
    fn mass(pdf: impl Fn(f64) -> f64, quantile: impl Fn(f64) -> f64) -> f64 {
        let ps = [1e-10, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999, 1.0 - 1e-10];
        ps.windows(2)
            .map(|w| crate::numerics::integrate(&pdf, quantile(w[0]), quantile(w[1]), 1e-12, 1e-10).unwrap().value)
            .sum::<f64>()
            + 2e-10
    }

    #[test]
    fn densities_integrate_to_one() {
        for shape in [-0.4, -0.1, 0.0, 0.2, 0.7] {
            let th = gev(1.0, 2.0, shape);
            let m = mass(|x| gev_pdf(x, &th), |p| gev_quantile(p, &th).unwrap());
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-6);
            let g = GpdShape(shape);
            let m = mass(|x| gpd_pdf(x, g), |p| gpd_quantile(p, g).unwrap());
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-6);
        }
        for (a, s) in [(0.8, 1.0), (2.0, 3.0), (5.0, 0.5)] {
            let th = FrechetParams::new(a, s).unwrap();
            let m = mass(|x| frechet_pdf(x, &th), |p| frechet_quantile(p, &th).unwrap());
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-6);
        }
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn gev_quantile_inverts_cdf(p in 1e-6f64..0.999_999, loc in -10f64..10.0, scale in 0.1f64..10.0, shape in -0.8f64..0.8) {
            let th = gev(loc, scale, shape);
            let x = gev_quantile(p, &th).unwrap();
            prop_assert!((gev_cdf(x, &th) - p).abs() < 1e-10);
        }

        #[test]
        fn cdf_then_quantile_is_identity(p in 0.01f64..0.99, shape in -0.8f64..0.8, a in 0.5f64..5.0) {
            let th = gev(0.5, 1.5, shape);
            let x = gev_quantile(p, &th).unwrap();
            prop_assert!((gev_quantile(gev_cdf(x, &th), &th).unwrap() - x).abs() < 1e-10 * (1.0 + x.abs()));
            let g = GpdShape(shape);
            let y = gpd_quantile(p, g).unwrap();
            prop_assert!((gpd_quantile(gpd_cdf(y, g), g).unwrap() - y).abs() < 1e-10 * (1.0 + y.abs()));
            let f = FrechetParams::new(a, 2.0).unwrap();
            let z = frechet_quantile(p, &f).unwrap();
            prop_assert!((frechet_quantile(frechet_cdf(z, &f), &f).unwrap() - z).abs() < 1e-10 * (1.0 + z));
        }

        #[test]
        fn cdfs_are_monotone(x in -20f64..20.0, dx in 0f64..5.0, shape in -0.8f64..0.8) {
            let th = gev(0.0, 1.0, shape);
            prop_assert!(gev_cdf(x, &th) <= gev_cdf(x + dx, &th));
            prop_assert!(gpd_cdf(x, GpdShape(shape)) <= gpd_cdf(x + dx, GpdShape(shape)));
        }
    }
}
