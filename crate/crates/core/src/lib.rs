//! Block maxima extraction, extreme-value fitting and a resampling bootstrap
//! built on disjoint, sliding and circular block maxima.

pub mod blocks;
pub mod boot;
pub mod dist;
pub mod error;
pub mod fit;
pub mod io;
pub mod mc;
pub mod numerics;
pub mod rng;
pub mod scan;
pub mod series;
pub mod sim;

pub use error::{Error, Result};
pub use series::TimeSeries;
