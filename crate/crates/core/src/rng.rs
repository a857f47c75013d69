//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(seed, domain, index)`. The key is derived from `(seed, domain)` and the
//! ChaCha stream id is the index, so stream `i` never depends on how many other
//! streams were consumed or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains, so different consumers of one user seed never collide.
pub mod domain {
    pub const SERIES: u64 = 0x5345_5249_4553;
    pub const BOOTSTRAP: u64 = 0x424f_4f54;
    pub const PRESIM: u64 = 0x5052_4553_494d;
    pub const TEST: u64 = 0x5445_5354;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed, e.g. one per Monte Carlo replication.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// The stream addressed by `(seed, domain, index)`.
pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed) ^ splitmix64(domain));
    rng.set_stream(index);
    rng
}

/// Uniform draw on the open interval (0, 1).
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        // 53 random bits, shifted off zero
        let u = ((rng.gen::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

/// Standard Fréchet(1) draw, `-1 / log U`.
pub fn frechet1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -1.0 / open01(rng).ln()
}
