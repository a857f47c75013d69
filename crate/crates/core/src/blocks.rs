//! Disjoint, sliding and circular block maxima.
//!
//! Series whose length is not a multiple of the block length are truncated at
//! the tail; `n_effective` records how many observations were used.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::WeightedSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockMethod {
    /// One maximum per disjoint block of length `r`.
    Disjoint,
    /// Each disjoint maximum repeated `r` times.
    DisjointRepeated,
    /// Every window of length `r`.
    Sliding,
    /// Circular maxima within blocks of length `k·r`.
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockScheme {
    pub method: BlockMethod,
    pub r: usize,
    /// Only meaningful for [`BlockMethod::Circular`].
    pub k: usize,
}

impl BlockScheme {
    pub fn new(method: BlockMethod, r: usize, k: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("block size r must be at least 1"));
        }
        if k == 0 {
            return Err(Error::invalid("circmax parameter k must be at least 1"));
        }
        Ok(Self { method, r, k })
    }

    /// Length of the resampling blocks: `k·r` for circular, `r` for repeated
    /// disjoint maxima, and `None` otherwise.
    pub fn resampling_block_len(&self) -> Option<usize> {
        match self.method {
            BlockMethod::Circular => Some(self.k * self.r),
            BlockMethod::DisjointRepeated => Some(self.r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMaxSeries {
    pub scheme: BlockScheme,
    pub values: Vec<f64>,
    pub n_effective: usize,
}

fn check_len(n: usize, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::invalid("block size r must be at least 1"));
    }
    if n < r {
        return Err(Error::invalid(format!(
            "series of length {n} is shorter than the block size {r}"
        )));
    }
    Ok(())
}

/// Maxima of consecutive non-overlapping blocks of length `r`.
pub fn disjoint_maxima(x: &[f64], r: usize) -> Result<BlockMaxSeries> {
    check_len(x.len(), r)?;
    let values: Vec<f64> = x.chunks_exact(r).map(block_max).collect();
    Ok(BlockMaxSeries {
        scheme: BlockScheme::new(BlockMethod::Disjoint, r, 1)?,
        n_effective: values.len() * r,
        values,
    })
}

/// Disjoint maxima with every entry repeated `r` times.
pub fn disjoint_repeated(x: &[f64], r: usize) -> Result<BlockMaxSeries> {
    let d = disjoint_maxima(x, r)?;
    let values = d
        .values
        .iter()
        .flat_map(|&m| std::iter::repeat_n(m, r))
        .collect();
    Ok(BlockMaxSeries {
        scheme: BlockScheme::new(BlockMethod::DisjointRepeated, r, 1)?,
        values,
        n_effective: d.n_effective,
    })
}

/// Maxima of all `n - r + 1` windows of length `r`, in O(n).
pub fn sliding_maxima(x: &[f64], r: usize) -> Result<BlockMaxSeries> {
    check_len(x.len(), r)?;
    Ok(BlockMaxSeries {
        scheme: BlockScheme::new(BlockMethod::Sliding, r, 1)?,
        values: sliding_window_max(x, r),
        n_effective: x.len(),
    })
}

/// Circular block maxima: within each block of length `k·r`, the block's
/// first `r - 1` observations are appended to its end and all `k·r` windows
/// of length `r` are maximised.
pub fn circmax(x: &[f64], r: usize, k: usize) -> Result<BlockMaxSeries> {
    if k == 0 {
        return Err(Error::invalid("circmax parameter k must be at least 1"));
    }
    let kr = k
        .checked_mul(r)
        .ok_or_else(|| Error::invalid("k·r overflows"))?;
    check_len(x.len(), kr)?;
    let blocks = x.len() / kr;
    let mut values = Vec::with_capacity(blocks * kr);
    let mut extended = Vec::with_capacity(kr + r - 1);
    for block in x.chunks_exact(kr) {
        extended.clear();
        extended.extend_from_slice(block);
        extended.extend_from_slice(&block[..r - 1]);
        values.extend(sliding_window_max(&extended, r));
    }
    Ok(BlockMaxSeries {
        scheme: BlockScheme::new(BlockMethod::Circular, r, k)?,
        values,
        n_effective: blocks * kr,
    })
}

/// Block maxima for any scheme.
pub fn extract(x: &[f64], scheme: BlockScheme) -> Result<BlockMaxSeries> {
    match scheme.method {
        BlockMethod::Disjoint => disjoint_maxima(x, scheme.r),
        BlockMethod::DisjointRepeated => disjoint_repeated(x, scheme.r),
        BlockMethod::Sliding => sliding_maxima(x, scheme.r),
        BlockMethod::Circular => circmax(x, scheme.r, scheme.k),
    }
}

fn block_max(block: &[f64]) -> f64 {
    block.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Monotone-deque sliding window maximum; `x.len() >= r >= 1`.
fn sliding_window_max(x: &[f64], r: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1 - r);
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(r);
    for (i, &v) in x.iter().enumerate() {
        // keep the earliest of equal values: ties never evict the front
        while let Some(&back) = deque.back() {
            if x[back] < v {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(i);
        if deque[0] + r <= i {
            deque.pop_front();
        }
        if i + 1 >= r {
            out.push(x[deque[0]]);
        }
    }
    out
}

/// Per-block run-length encoding of a block-maxima series.
///
/// Within each block, consecutive equal values are merged into
/// `(value, multiplicity)` pairs in order of appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedBlocks {
    pub kr: usize,
    pub blocks: Vec<Vec<(f64, u32)>>,
}

impl CompressedBlocks {
    /// Encodes `values` in blocks of `block_len`; with `allow_partial` the
    /// final block may be shorter.
    pub fn from_values(values: &[f64], block_len: usize, allow_partial: bool) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::invalid("block length must be at least 1"));
        }
        if !allow_partial && !values.len().is_multiple_of(block_len) {
            return Err(Error::invalid(format!(
                "series length {} is not a multiple of the block length {block_len}",
                values.len()
            )));
        }
        let blocks = values.chunks(block_len).map(run_length).collect();
        Ok(Self {
            kr: block_len,
            blocks,
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Total number of (expanded) observations.
    pub fn len(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| b.iter().map(|&(_, c)| c as usize))
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Number of stored `(value, multiplicity)` pairs.
    pub fn stored_pairs(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn expand(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flatten()
            .flat_map(|&(v, c)| std::iter::repeat_n(v, c as usize))
            .collect()
    }

    /// Weighted sample in which block `i` is counted `block_weights[i]` times.
    pub fn weighted(&self, block_weights: &[u32]) -> WeightedSample {
        debug_assert_eq!(block_weights.len(), self.blocks.len());
        let items = self
            .blocks
            .iter()
            .zip(block_weights)
            .filter(|(_, &w)| w > 0)
            .flat_map(|(b, &w)| b.iter().map(move |&(v, c)| (v, f64::from(c) * f64::from(w))))
            .collect();
        WeightedSample::from_items_unchecked(items)
    }

    /// Weighted sample with every block counted once.
    pub fn unit_weighted(&self) -> WeightedSample {
        self.weighted(&vec![1; self.blocks.len()])
    }
}

fn run_length(block: &[f64]) -> Vec<(f64, u32)> {
    let mut runs: Vec<(f64, u32)> = Vec::new();
    for &v in block {
        match runs.last_mut() {
            Some((last, count)) if last.to_bits() == v.to_bits() => *count += 1,
            _ => runs.push((v, 1)),
        }
    }
    runs
}

/// Compresses a circular or repeated-disjoint maxima series per `k·r` block.
pub fn compress(b: &BlockMaxSeries) -> Result<CompressedBlocks> {
    let kr = b.scheme.resampling_block_len().ok_or_else(|| {
        Error::invalid("only circular and repeated disjoint maxima can be compressed per block")
    })?;
    CompressedBlocks::from_values(&b.values, kr, false)
}

/// Run-length encodes a whole series into a weighted sample. Consecutive
/// ties in sliding maxima make this much smaller than the series.
pub fn runs_weighted(values: &[f64]) -> WeightedSample {
    let items = run_length(values)
        .into_iter()
        .map(|(v, c)| (v, f64::from(c)))
        .collect();
    WeightedSample::from_items_unchecked(items)
}
