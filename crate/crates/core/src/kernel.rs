//! Gaussian kernel primitives: bandwidth estimation from consecutive
//! deviations and the shared lookup table used by the fast density path.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{GsmError, Result};

/// Divisor turning the median of consecutive absolute differences into a
/// kernel standard deviation.
pub const MAD_DIVISOR: f64 = 0.68 * SQRT_2;

/// Median of `values`; an even count yields the mean of the two middle order
/// statistics. Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let len = values.len();
    if len == 0 {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let mid = len / 2;
    if len % 2 == 1 {
        Some(values[mid])
    } else {
        Some((values[mid - 1] + values[mid]) / 2.0)
    }
}

/// Kernel bandwidth of one channel from its temporally ordered values.
///
/// `max(floor, median(|v_i - v_{i+1}|) / (0.68 * sqrt 2))`.
pub fn estimate_bandwidth(channel_values: &[f64], floor: f64) -> Result<f64> {
    if channel_values.len() < 2 {
        return Err(GsmError::InsufficientSamples {
            needed: 2,
            got: channel_values.len(),
        });
    }
    let mut diffs: Vec<f64> = channel_values.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let m = median_in_place(&mut diffs).unwrap_or(0.0);
    Ok(bandwidth_from_median(m, floor))
}

#[inline]
pub(crate) fn bandwidth_from_median(median: f64, floor: f64) -> f64 {
    (median / MAD_DIVISOR).max(floor)
}

/// Normal density with zero mean.
#[inline]
pub fn normal_pdf(delta: f64, sigma: f64) -> f64 {
    let z = delta / sigma;
    (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Precomputed samples of `exp(-u^2 / 2)` on `u in [0, cutoff]`, evaluated
/// with linear interpolation. Distances beyond `cutoff` evaluate to 0.
#[derive(Clone, Debug)]
pub struct KernelTable {
    resolution: f64,
    inv_resolution: f64,
    cutoff: f64,
    values: Vec<f64>,
}

impl KernelTable {
    pub const DEFAULT_RESOLUTION: f64 = 1e-3;
    /// Truncated mass stays below 1e-37 of a floored kernel peak.
    pub const DEFAULT_CUTOFF: f64 = 14.0;

    pub fn new(resolution: f64, cutoff: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) || !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(GsmError::InvalidConfig(format!(
                "kernel table needs positive resolution and cutoff, got {resolution} / {cutoff}"
            )));
        }
        let steps = (cutoff / resolution).ceil() as usize;
        // One trailing entry so interpolation at the last step never reads past the end.
        let values = (0..=steps + 1)
            .map(|i| {
                let u = i as f64 * resolution;
                (-0.5 * u * u).exp()
            })
            .collect();
        Ok(Self {
            resolution,
            inv_resolution: 1.0 / resolution,
            cutoff,
            values,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `exp(-u^2 / 2)` for a non-negative normalized distance `u`.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u > self.cutoff {
            return 0.0;
        }
        let pos = u * self.inv_resolution;
        let idx = pos as usize;
        let frac = pos - idx as f64;
        let lo = self.values[idx];
        lo + frac * (self.values[idx + 1] - lo)
    }
}

impl Default for KernelTable {
    fn default() -> Self {
        Self::new(Self::DEFAULT_RESOLUTION, Self::DEFAULT_CUTOFF).expect("default kernel table parameters are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bandwidth_fixtures() {
        let s = estimate_bandwidth(&[800.0, 802.0, 799.0, 803.0, 801.0], 1.0).unwrap();
        assert!((s - 2.5 / (0.68 * 2f64.sqrt())).abs() < 1e-12);
        assert!((s - 2.5997).abs() < 1e-4);

        let s = estimate_bandwidth(&[5.0, 5.0, 5.0, 5.0], 0.004).unwrap();
        assert_eq!(s, 0.004);

        let s = estimate_bandwidth(&[0.0, 10.0, 0.0, 10.0], 1.0).unwrap();
        assert!((s - 10.399).abs() < 1e-3);
    }

    #[test]
    fn bandwidth_needs_two_values() {
        assert!(matches!(
            estimate_bandwidth(&[1.0], 1.0),
            Err(GsmError::InsufficientSamples { got: 1, .. })
        ));
        assert!(estimate_bandwidth(&[], 1.0).is_err());
    }

    #[test]
    fn median_even_count_averages_middle_pair() {
        assert_eq!(median_in_place(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median_in_place(&mut []), None);
    }

    #[test]
    fn unit_normal_peak() {
        assert!((normal_pdf(0.0, 1.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn table_shape() {
        let t = KernelTable::default();
        assert_eq!(t.eval(0.0), 1.0);
        assert_eq!(t.eval(t.cutoff() + 1e-9), 0.0);
        let mut prev = f64::INFINITY;
        for i in 0..t.len() - 1 {
            let v = t.eval(i as f64 * t.resolution());
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn table_rejects_bad_parameters() {
        assert!(KernelTable::new(0.0, 6.0).is_err());
        assert!(KernelTable::new(1e-3, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn bandwidth_translation_invariant(
            values in proptest::collection::vec(-1000i32..1000, 2..64),
            shift in -5000i32..5000,
        ) {
            // Integer-valued data keeps the shifted differences exact.
            let a: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let b: Vec<f64> = values.iter().map(|&v| (v + shift) as f64).collect();
            prop_assert_eq!(estimate_bandwidth(&a, 0.5).unwrap(), estimate_bandwidth(&b, 0.5).unwrap());
        }

        #[test]
        fn table_relative_error_small(u in 0.0f64..14.0) {
            let t = KernelTable::default();
            let exact = (-0.5 * u * u).exp();
            prop_assert!(((t.eval(u) - exact) / exact).abs() < 1e-4);
        }
    }
}
