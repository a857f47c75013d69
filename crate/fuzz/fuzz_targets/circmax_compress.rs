#![no_main]

use blockmax::blocks::{circmax, sliding_maxima, CompressedBlocks};
use libfuzzer_sys::fuzz_target;

// Layout: r (1 byte), k (1 byte), then little-endian f64 observations.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let r = data[0] as usize % 16 + 1;
    let k = data[1] as usize % 8 + 1;
    let x: Vec<f64> = data[2..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .filter(|v| v.is_finite())
        .collect();
    let Ok(c) = circmax(&x, r, k) else { return };
    let kr = k * r;
    assert_eq!(c.values.len(), x.len() / kr * kr);
    let blocks = CompressedBlocks::from_values(&c.values, kr, false).unwrap();
    assert_eq!(blocks.expand(), c.values);
    for b in &blocks.blocks {
        assert_eq!(b.iter().map(|p| p.1 as usize).sum::<usize>(), kr);
    }
    if let Ok(s) = sliding_maxima(&x, r) {
        assert_eq!(s.values.len(), x.len() - r + 1);
    }
});
