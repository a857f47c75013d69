//! Numerical building blocks: quadrature, root finding, simplex search and
//! compensated accumulation.

pub mod quad;
pub mod roots;
pub mod simplex;
pub mod special;
pub mod sum;

pub use quad::{integrate, Integral};
pub use roots::brent;
pub use simplex::{NelderMead, SimplexOutcome};
pub use sum::{sum, NeumaierSum};
