//! Per-pixel nonparametric density model over `(r, g, D)`.
//!
//! A pixel keeps its last `n` chromaticity samples and its last `n` depth
//! samples in two FIFO rings. The density of a new observation is the mean of
//! diagonal Gaussian kernels centred on the samples, with one bandwidth per
//! channel fixed at the end of training.

use crate::ado::AdoState;
use crate::error::{GsmError, Result};
use crate::frame::to_chromaticity;
use crate::kernel::{bandwidth_from_median, median_in_place, normal_pdf, KernelTable};
use crate::motion::DiffCdf;

/// One pixel's `(r, g, D)` triple. Depth is in raw sensor units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub r: f64,
    pub g: f64,
    pub depth: f64,
}

impl Observation {
    pub fn new(r: f64, g: f64, depth: f64) -> Self {
        Self { r, g, depth }
    }

    pub fn from_rgbd(rgb: [u8; 3], depth: u16) -> Self {
        let (r, g) = to_chromaticity(rgb);
        Self {
            r,
            g,
            depth: depth as f64,
        }
    }
}

/// Per-channel kernel standard deviations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bandwidths {
    pub sigma_r: f64,
    pub sigma_g: f64,
    pub sigma_d: f64,
}

impl Bandwidths {
    pub fn new(sigma_r: f64, sigma_g: f64, sigma_d: f64) -> Self {
        Self {
            sigma_r,
            sigma_g,
            sigma_d,
        }
    }
}

/// Lower bounds on the estimated bandwidths. A channel that never changes has
/// a zero median deviation and would otherwise produce a degenerate kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandwidthFloors {
    pub r: f64,
    pub g: f64,
    pub d: f64,
}

impl Default for BandwidthFloors {
    fn default() -> Self {
        Self {
            r: 1.0 / 255.0,
            g: 1.0 / 255.0,
            d: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Kernel {
    bandwidths: Bandwidths,
    inv_sigma: [f64; 3],
    // prod_j 1 / (sqrt(2 pi) sigma_j)
    norm: f64,
}

impl Kernel {
    fn new(bandwidths: Bandwidths) -> Self {
        let s = [bandwidths.sigma_r, bandwidths.sigma_g, bandwidths.sigma_d];
        let root_two_pi = (2.0 * std::f64::consts::PI).sqrt();
        Self {
            bandwidths,
            inv_sigma: s.map(|v| 1.0 / v),
            norm: s.iter().map(|v| 1.0 / (root_two_pi * v)).product(),
        }
    }
}

/// Ring buffers of recent samples plus the per-pixel state the segmenter
/// needs: bandwidths, ADO probability, last valid depth and the record of
/// consecutive depth differences.
#[derive(Clone, Debug)]
pub struct PixelModel {
    capacity: usize,
    color: Vec<[f32; 2]>,
    color_head: usize,
    depth: Vec<u16>,
    depth_head: usize,
    diffs: DiffCdf,
    kernel: Option<Kernel>,
    pub ado: AdoState,
    pub last_valid_depth: u16,
}

impl PixelModel {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "pixel model capacity must be positive");
        Self {
            capacity,
            color: Vec::with_capacity(capacity),
            color_head: 0,
            depth: Vec::with_capacity(capacity),
            depth_head: 0,
            diffs: DiffCdf::with_capacity(capacity.saturating_sub(1)),
            kernel: None,
            ado: AdoState::default(),
            last_valid_depth: 0,
        }
    }

    /// A trained model holding exactly `samples` with the given bandwidths.
    pub fn with_bandwidths(samples: &[Observation], bandwidths: Bandwidths) -> Self {
        let mut model = Self::new(samples.len().max(1));
        for s in samples {
            model.push_sample(s);
        }
        model.set_bandwidths(bandwidths);
        model
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of stored samples (color and depth rings are filled together
    /// until training ends).
    pub fn len(&self) -> usize {
        self.color.len().min(self.depth.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_trained(&self) -> bool {
        self.kernel.is_some()
    }

    pub fn bandwidths(&self) -> Option<Bandwidths> {
        self.kernel.map(|k| k.bandwidths)
    }

    pub fn set_bandwidths(&mut self, bandwidths: Bandwidths) {
        self.kernel = Some(Kernel::new(bandwidths));
    }

    pub fn diffs(&self) -> &DiffCdf {
        &self.diffs
    }

    pub fn push_sample(&mut self, x: &Observation) {
        self.push_color(x.r, x.g);
        self.push_depth(x.depth.round().clamp(0.0, u16::MAX as f64) as u16);
    }

    pub fn push_color(&mut self, r: f64, g: f64) {
        let value = [r as f32, g as f32];
        if self.color.len() < self.capacity {
            self.color.push(value);
        } else {
            self.color[self.color_head] = value;
            self.color_head = (self.color_head + 1) % self.capacity;
        }
    }

    /// Pushes a depth sample and keeps the consecutive-difference record in
    /// step with the ring contents.
    pub fn push_depth(&mut self, depth: u16) {
        let len = self.depth.len();
        if len < self.capacity {
            if let Some(&newest) = self.depth.last() {
                self.diffs.insert(newest.abs_diff(depth));
            }
            self.depth.push(depth);
            return;
        }
        let cap = self.capacity;
        if cap >= 2 {
            let oldest = self.depth[self.depth_head];
            let second = self.depth[(self.depth_head + 1) % cap];
            let newest = self.depth[(self.depth_head + cap - 1) % cap];
            let removed = self.diffs.remove(oldest.abs_diff(second));
            debug_assert!(removed);
            self.diffs.insert(newest.abs_diff(depth));
        }
        self.depth[self.depth_head] = depth;
        self.depth_head = (self.depth_head + 1) % cap;
    }

    /// Color samples, oldest first.
    pub fn color_samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.color.len();
        (0..n).map(move |i| {
            let [r, g] = self.color[(self.color_head + i) % n];
            (r as f64, g as f64)
        })
    }

    /// Depth samples, oldest first.
    pub fn depth_samples(&self) -> impl Iterator<Item = u16> + '_ {
        let n = self.depth.len();
        (0..n).map(move |i| self.depth[(self.depth_head + i) % n])
    }

    /// Stored samples paired by age, oldest first.
    pub fn samples(&self) -> Vec<Observation> {
        self.color_samples()
            .zip(self.depth_samples())
            .map(|((r, g), d)| Observation::new(r, g, d as f64))
            .collect()
    }

    /// Estimates the three bandwidths from the current ring contents and
    /// marks the model trained.
    pub fn fit_bandwidths(&mut self, floors: &BandwidthFloors) -> Result<Bandwidths> {
        let n = self.len();
        if n < 2 {
            return Err(GsmError::InsufficientSamples { needed: 2, got: n });
        }
        let colors: Vec<(f64, f64)> = self.color_samples().collect();
        let mut dr: Vec<f64> = colors.windows(2).map(|w| (w[0].0 - w[1].0).abs()).collect();
        let mut dg: Vec<f64> = colors.windows(2).map(|w| (w[0].1 - w[1].1).abs()).collect();
        let mr = median_in_place(&mut dr).unwrap_or(0.0);
        let mg = median_in_place(&mut dg).unwrap_or(0.0);
        let md = self.diffs.median().unwrap_or(0.0);
        let bw = Bandwidths::new(
            bandwidth_from_median(mr, floors.r),
            bandwidth_from_median(mg, floors.g),
            bandwidth_from_median(md, floors.d),
        );
        self.set_bandwidths(bw);
        Ok(bw)
    }

    /// Direct evaluation of the kernel density at `x`.
    pub fn kde_probability(&self, x: &Observation) -> Result<f64> {
        let k = self.kernel.ok_or(GsmError::NotTrained)?;
        let n = self.len();
        if n == 0 {
            return Err(GsmError::NotTrained);
        }
        let bw = k.bandwidths;
        let sum: f64 = self
            .color_samples()
            .zip(self.depth_samples())
            .map(|((r, g), d)| {
                normal_pdf(x.r - r, bw.sigma_r)
                    * normal_pdf(x.g - g, bw.sigma_g)
                    * normal_pdf(x.depth - d as f64, bw.sigma_d)
            })
            .sum();
        Ok(sum / n as f64)
    }

    /// Lookup-table evaluation of the kernel density at `x`.
    pub fn kde_probability_fast(&self, x: &Observation, table: &KernelTable) -> Result<f64> {
        self.kde_fast_until(x, table, f64::INFINITY)
    }

    /// Lookup-table density that stops summing once the running value reaches
    /// `stop`. The result is exact (to table accuracy) when below `stop` and a
    /// lower bound that is `>= stop` otherwise.
    pub fn kde_fast_until(&self, x: &Observation, table: &KernelTable, stop: f64) -> Result<f64> {
        let k = self.kernel.ok_or(GsmError::NotTrained)?;
        let n = self.len();
        if n == 0 {
            return Err(GsmError::NotTrained);
        }
        let scale = k.norm / n as f64;
        let stop_sum = stop / scale;
        let [ir, ig, id] = k.inv_sigma;
        let n_color = self.color.len();
        let n_depth = self.depth.len();
        let (mut ci, mut di) = (self.color_head, self.depth_head);
        let mut sum = 0.0;
        for _ in 0..n {
            let [r, g] = self.color[ci];
            let d = self.depth[di];
            ci += 1;
            if ci == n_color {
                ci = 0;
            }
            di += 1;
            if di == n_depth {
                di = 0;
            }
            let kd = table.eval((x.depth - d as f64).abs() * id);
            if kd == 0.0 {
                continue;
            }
            let kr = table.eval((x.r - r as f64).abs() * ir);
            if kr == 0.0 {
                continue;
            }
            let kg = table.eval((x.g - g as f64).abs() * ig);
            sum += kd * kr * kg;
            if sum >= stop_sum {
                break;
            }
        }
        Ok(sum * scale)
    }

    /// Mean CDF value of the positive gaps between `d_new` and the depth
    /// samples; see [`crate::motion::moved_background_score`].
    pub fn moved_score(&self, d_new: u16) -> Result<f64> {
        let m = self.diffs.len();
        if m == 0 || self.depth.is_empty() {
            return Err(GsmError::NotTrained);
        }
        Ok(self.moved_count(d_new) as f64 / (m as f64 * self.depth.len() as f64))
    }

    /// `moved_score(d_new) > xi`, skipping the CDF walk when fewer than
    /// `xi * n` samples lie nearer than `d_new`.
    pub fn is_moved(&self, d_new: u16, xi: f64) -> Result<bool> {
        let m = self.diffs.len();
        let n = self.depth.len();
        if m == 0 || n == 0 {
            return Err(GsmError::NotTrained);
        }
        let nearer = self.depth.iter().filter(|&&d| d < d_new).count();
        if nearer as f64 / n as f64 <= xi {
            return Ok(false);
        }
        Ok(self.moved_count(d_new) as f64 / (m as f64 * n as f64) > xi)
    }

    fn moved_count(&self, d_new: u16) -> usize {
        let diffs = self.diffs.as_slice();
        self.depth
            .iter()
            .filter(|&&d| d < d_new)
            .map(|&d| {
                let gap = d_new - d;
                diffs.partition_point(|&v| v <= gap)
            })
            .sum()
    }
}

/// Foreground when the density falls strictly below `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorDepthClass {
    Background,
    Foreground,
}

pub fn classify_density(p: f64, gamma: f64) -> ColorDepthClass {
    if p < gamma {
        ColorDepthClass::Foreground
    } else {
        ColorDepthClass::Background
    }
}

pub fn classify_color_depth(model: &PixelModel, x: &Observation, gamma: f64) -> Result<ColorDepthClass> {
    Ok(classify_density(model.kde_probability(x)?, gamma))
}
