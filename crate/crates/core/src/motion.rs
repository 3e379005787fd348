//! Moved-background detection.
//!
//! Each pixel keeps the multiset of absolute differences between consecutive
//! depth samples. A new depth that lies farther than the modelled samples by
//! more than the usual consecutive variation indicates that a background
//! object was removed, and the pixel is reclassified as background at once.

use crate::error::{GsmError, Result};

/// Sorted record of consecutive depth differences `|D_i - D_{i-1}|`.
///
/// Evaluated as an empirical CDF by binary search, so memory is O(n) per pixel
/// instead of one bin per depth level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffCdf {
    diffs: Vec<u16>,
}

impl DiffCdf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            diffs: Vec::with_capacity(capacity),
        }
    }

    /// Builds the record from temporally ordered depths.
    pub fn from_depths(depths: &[u16]) -> Self {
        let mut diffs: Vec<u16> = depths.windows(2).map(|w| w[0].abs_diff(w[1])).collect();
        diffs.sort_unstable();
        Self { diffs }
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.diffs
    }

    pub fn insert(&mut self, diff: u16) {
        let at = self.diffs.partition_point(|&d| d < diff);
        self.diffs.insert(at, diff);
    }

    /// Removes one occurrence of `diff`; returns whether it was present.
    pub fn remove(&mut self, diff: u16) -> bool {
        match self.diffs.binary_search(&diff) {
            Ok(at) => {
                self.diffs.remove(at);
                true
            }
            Err(_) => false,
        }
    }

    /// Median of the recorded differences (mean of the middle pair for even counts).
    pub fn median(&self) -> Option<f64> {
        let len = self.diffs.len();
        if len == 0 {
            return None;
        }
        let mid = len / 2;
        Some(if len % 2 == 1 {
            self.diffs[mid] as f64
        } else {
            (self.diffs[mid - 1] as f64 + self.diffs[mid] as f64) / 2.0
        })
    }

    /// `#{V_i <= k} / count`.
    pub fn eval(&self, k: f64) -> Result<f64> {
        if self.diffs.is_empty() {
            return Err(GsmError::NotTrained);
        }
        Ok(self.count_le(k) as f64 / self.diffs.len() as f64)
    }

    #[inline]
    pub(crate) fn count_le(&self, k: f64) -> usize {
        self.diffs.partition_point(|&d| (d as f64) <= k)
    }
}

/// Componentwise `max(0, d_new - D_i)`.
pub fn positive_gaps(samples: &[f64], d_new: f64) -> Vec<f64> {
    samples.iter().map(|&d| (d_new - d).max(0.0)).collect()
}

/// Mean CDF value over the positive gaps between `d_new` and the samples.
///
/// A zero gap (new depth not farther than the sample) contributes nothing:
/// the cumulative sum over strictly positive depth levels is empty there.
pub fn moved_background_score(cdf: &DiffCdf, samples: &[f64], d_new: f64) -> Result<f64> {
    if cdf.is_empty() || samples.is_empty() {
        return Err(GsmError::NotTrained);
    }
    let hits: usize = positive_gaps(samples, d_new)
        .into_iter()
        .filter(|&gap| gap > 0.0)
        .map(|gap| cdf.count_le(gap))
        .sum();
    Ok(hits as f64 / (cdf.len() as f64 * samples.len() as f64))
}

/// Strict comparison: a score equal to `xi` does not qualify.
#[inline]
pub fn is_moved_background(score: f64, xi: f64) -> bool {
    score > xi
}
