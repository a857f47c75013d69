//! Special functions and constants.

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_4;

/// Second derivative of the Gamma function at 2, `(1 - γ_E)^2 + π^2/6 - 1`.
pub fn gamma_second_derivative_at_two() -> f64 {
    let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
    (1.0 - EULER_GAMMA).powi(2) + pi2_6 - 1.0
}
