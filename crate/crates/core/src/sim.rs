//! Exact ARMAX simulators with analytic ground truth.
//!
//! On the Fréchet(1) scale both models follow `Y_t = max(β Y_{t-1}, (1-β) W_t)`
//! with iid Fréchet(1) innovations. Fréchet(1) is the stationary law of the
//! recursion, so `Y_0` is drawn from it directly and no burn-in is needed.
//! Observations are `X_t = F^{-1}(F_W(Y_t))` for the target marginal `F`.

use serde::{Deserialize, Serialize};

use crate::dist::{gpd_quantile_unchecked, GUMBEL_THRESHOLD};
use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::rng::{domain, frechet1, stream};
use crate::series::TimeSeries;

/// ARMAX model with GPD(0, 1, γ) margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmaxGpdConfig {
    pub gamma: f64,
    pub beta: f64,
    pub n: usize,
    pub seed: u64,
}

/// ARMAX model with Pareto(α) margins, `F(x) = 1 - x^{-α}` on `x > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmaxParetoConfig {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub seed: u64,
}

/// Marginal family and dependence of an ARMAX model, without length or seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Model {
    ArmaxGpd { gamma: f64, beta: f64 },
    ArmaxPareto { alpha: f64, beta: f64 },
}

fn check_beta(beta: f64) -> Result<()> {
    if (0.0..1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::invalid(format!("beta must lie in [0, 1), got {beta}")))
    }
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Model::ArmaxGpd { gamma, beta } => {
                if !gamma.is_finite() {
                    return Err(Error::invalid("gamma must be finite"));
                }
                check_beta(beta)
            }
            Model::ArmaxPareto { alpha, beta } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
                }
                check_beta(beta)
            }
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Model::ArmaxGpd { beta, .. } | Model::ArmaxPareto { beta, .. } => beta,
        }
    }

    /// Marginal quantile evaluated from `log(1 - p)`.
    fn quantile_from_log_tail(&self, log_tail: f64) -> f64 {
        match *self {
            Model::ArmaxGpd { gamma, .. } => {
                if gamma.abs() < GUMBEL_THRESHOLD {
                    -log_tail
                } else {
                    (-gamma * log_tail).exp_m1() / gamma
                }
            }
            Model::ArmaxPareto { alpha, .. } => (-log_tail / alpha).exp(),
        }
    }

    /// Exponent `β + (1-β) r` in `P(M_r ≤ x) = F(x)^{β + (1-β) r}`.
    pub fn extremal_exponent(&self, r: usize) -> f64 {
        let beta = self.beta();
        beta + (1.0 - beta) * r as f64
    }

    /// Series `index` of the family seeded by `seed`.
    pub fn simulate_indexed(&self, n: usize, seed: u64, index: u64) -> Result<TimeSeries> {
        self.validate()?;
        let beta = self.beta();
        let mut rng = stream(seed, domain::SERIES, index);
        let mut y = frechet1(&mut rng);
        let mut out = Vec::with_capacity(n);
        for t in 0..n {
            if t > 0 {
                y = (beta * y).max((1.0 - beta) * frechet1(&mut rng));
            }
            // log(1 - F_W(y)) = log(1 - exp(-1/y))
            let log_tail = (-(-1.0 / y).exp_m1()).ln();
            out.push(self.quantile_from_log_tail(log_tail));
        }
        TimeSeries::new(out)
    }

    pub fn simulate(&self, n: usize, seed: u64) -> Result<TimeSeries> {
        self.simulate_indexed(n, seed, 0)
    }

    /// `(1 - 1/T)`-quantile of the block maximum `M_r`.
    pub fn true_return_level(&self, period: f64, r: usize) -> Result<f64> {
        self.validate()?;
        if !(period > 1.0) {
            return Err(Error::invalid(format!("return period must exceed 1, got {period}")));
        }
        if r == 0 {
            return Err(Error::invalid("block size r must be at least 1"));
        }
        let e = self.extremal_exponent(r);
        // 1 - (1 - 1/T)^{1/e}
        let tail = -((-1.0 / period).ln_1p() / e).exp_m1();
        Ok(self.quantile_from_log_tail(tail.ln()))
    }

    /// `E[M_r]` by quadrature of the block-maximum quantile function.
    pub fn true_block_mean(&self, r: usize) -> Result<f64> {
        self.validate()?;
        if r == 0 {
            return Err(Error::invalid("block size r must be at least 1"));
        }
        match *self {
            Model::ArmaxGpd { gamma, .. } if gamma >= 1.0 => {
                return Err(Error::invalid(format!(
                    "block maxima have no finite mean for gamma >= 1 (got {gamma})"
                )))
            }
            Model::ArmaxPareto { alpha, .. } if alpha <= 1.0 => {
                return Err(Error::invalid(format!(
                    "block maxima have no finite mean for alpha <= 1 (got {alpha})"
                )))
            }
            _ => {}
        }
        let e = self.extremal_exponent(r);
        // E[M_r] = ∫_0^1 F^{-1}(u^{1/e}) du, with u = 1 - v^2 to soften the
        // singularity at u = 1
        let integrand = |v: f64| {
            let u = 1.0 - v * v;
            if u <= 0.0 {
                return 2.0 * v * self.quantile_from_log_tail(0.0);
            }
            let tail = -(u.ln() / e).exp_m1();
            2.0 * v * self.quantile_from_log_tail(tail.ln())
        };
        Ok(integrate(integrand, 0.0, 1.0, 1e-10, 1e-12)?.value)
    }

    /// The Fréchet shape of the block-maximum limit, when it is heavy tailed.
    pub fn frechet_shape(&self) -> Option<f64> {
        match *self {
            Model::ArmaxPareto { alpha, .. } => Some(alpha),
            Model::ArmaxGpd { gamma, .. } if gamma > 0.0 => Some(1.0 / gamma),
            _ => None,
        }
    }
}

impl ArmaxGpdConfig {
    pub fn model(&self) -> Model {
        Model::ArmaxGpd {
            gamma: self.gamma,
            beta: self.beta,
        }
    }
}

impl ArmaxParetoConfig {
    pub fn model(&self) -> Model {
        Model::ArmaxPareto {
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

pub fn simulate_armax_gpd(cfg: &ArmaxGpdConfig) -> Result<TimeSeries> {
    cfg.model().simulate(cfg.n, cfg.seed)
}

pub fn simulate_armax_pareto(cfg: &ArmaxParetoConfig) -> Result<TimeSeries> {
    cfg.model().simulate(cfg.n, cfg.seed)
}

/// `RL(T, r) = F_γ^{-1}((1 - 1/T)^{1/(β + (1-β) r)})` for the ARMAX-GPD model.
pub fn true_return_level(period: f64, r: usize, gamma: f64, beta: f64) -> Result<f64> {
    Model::ArmaxGpd { gamma, beta }.true_return_level(period, r)
}

/// `E[M_r]` for the ARMAX-GPD model, `γ < 1`.
pub fn true_block_mean(r: usize, gamma: f64, beta: f64) -> Result<f64> {
    Model::ArmaxGpd { gamma, beta }.true_block_mean(r)
}

/// Norming constants `a_r = (r(1-β))^γ`, `b_r = ((r(1-β))^γ - 1)/γ` with the
/// `γ = 0` limit `b_r = log(r(1-β))`.
pub fn norming_constants(r: usize, gamma: f64, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    if r == 0 {
        return Err(Error::invalid("block size r must be at least 1"));
    }
    let log_eff = (r as f64 * (1.0 - beta)).ln();
    if gamma.abs() < GUMBEL_THRESHOLD {
        return Ok((1.0, log_eff));
    }
    Ok(((gamma * log_eff).exp(), (gamma * log_eff).exp_m1() / gamma))
}

/// Marginal GPD quantile, re-exported for simulators built elsewhere.
pub fn gpd_marginal_quantile(p: f64, gamma: f64) -> f64 {
    gpd_quantile_unchecked(p, gamma)
}
