//! Closed-form asymptotic variances of the block-maxima estimators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dist::GUMBEL_THRESHOLD;
use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::numerics::special::{gamma, gamma_second_derivative_at_two, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsyMethod {
    Disjoint,
    /// Sliding and circular maxima share this variance.
    Sliding,
}

const SERIES_CUTOFF: f64 = 1e-3;
const LOWER_CUTOFF: f64 = 1e-12;

/// `α_c(w) - 1` with `α_c(w) = (1 - (1-w)^{c+1}) / (w (c+1))`.
fn alpha_minus_one(c: f64, w: f64) -> f64 {
    if w < SERIES_CUTOFF {
        -c * w / 2.0 + c * (c - 1.0) * w * w / 6.0 - c * (c - 1.0) * (c - 2.0) * w.powi(3) / 24.0
    } else {
        -((c + 1.0) * (-w).ln_1p()).exp_m1() / (w * (c + 1.0)) - 1.0
    }
}

/// `I(γ) = 2 ∫_0^{1/2} (α_{2γ}(w) - 1) w^{-γ-1} (1-w)^{-γ-1} dw`.
pub fn i_integral(g: f64) -> Result<f64> {
    if !(g < 0.5) {
        return Err(Error::invalid(format!("shape must be below 1/2, got {g}")));
    }
    let c = 2.0 * g;
    let f = |w: f64| alpha_minus_one(c, w) * (-(g + 1.0) * (w.ln() + (-w).ln_1p())).exp();
    let body = integrate(f, LOWER_CUTOFF, 0.5, 1e-11, 1e-10)?.value;
    // leading term -c w^{-γ}/2 integrated over (0, ε)
    let head = -c / 2.0 * LOWER_CUTOFF.powf(1.0 - g) / (1.0 - g);
    Ok(2.0 * (body + head))
}

/// Asymptotic variance of the mean of disjoint or sliding block maxima under
/// ARMAX-GPD(γ), after the `√(n/r) / (r(1-β))^γ` normalisation.
pub fn asy_var_mean(g: f64, method: AsyMethod) -> Result<f64> {
    if !(g < 0.5) || !g.is_finite() {
        return Err(Error::invalid(format!("shape must be below 1/2, got {g}")));
    }
    let gumbel = g.abs() < GUMBEL_THRESHOLD;
    match method {
        AsyMethod::Disjoint if gumbel => Ok(PI * PI / 6.0),
        AsyMethod::Disjoint => {
            let g1 = gamma(1.0 - g);
            let g2 = gamma(1.0 - 2.0 * g);
            Ok((g2 - g1 * g1) / (g * g))
        }
        AsyMethod::Sliding if gumbel => Ok(4.0 * (4f64.ln() - 1.0)),
        // one expression for both signs; for γ < 0 it equals 2Γ(-2γ)I(γ)
        AsyMethod::Sliding => Ok(-gamma(1.0 - 2.0 * g) / g * i_integral(g)?),
    }
}

/// Asymptotic covariance of the sliding Fréchet estimator `(α̂, σ̂)` at the
/// unit-scale parametrisation.
pub fn asy_cov_frechet_sliding(alpha0: f64) -> Result<[[f64; 2]; 2]> {
    check_alpha(alpha0)?;
    Ok([
        [0.4946 * alpha0 * alpha0, -0.3236],
        [-0.3236, 0.9578 / (alpha0 * alpha0)],
    ])
}

/// Linear map from the empirical process to the Fréchet estimator.
pub fn m_matrix(alpha0: f64) -> Result<[[f64; 3]; 2]> {
    check_alpha(alpha0)?;
    let s = 6.0 / (PI * PI);
    let a = alpha0;
    let g = EULER_GAMMA;
    let g2 = gamma_second_derivative_at_two();
    Ok([
        [s * a * a, s * a * (1.0 - g), -s * a * a],
        [s * (g - 1.0), -s * (g2 + 1.0) / a, s * (1.0 - g)],
    ])
}

fn check_alpha(alpha0: f64) -> Result<()> {
    if alpha0 > 0.0 && alpha0.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must be positive, got {alpha0}")))
    }
}
