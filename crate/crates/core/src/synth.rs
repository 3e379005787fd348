//! Synthetic RGBD sequences with exact ground truth.
//!
//! A scene is a wall with a side panel and a floor band, rendered back to
//! front together with the layers of the chosen scenario. Ground truth comes
//! from geometry alone, so it does not depend on noise.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{GsmError, Result};
use crate::frame::{ColorFrame, DepthFrame, GtLabel, GtMask};
use crate::io::{self, SequenceManifest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Static,
    MovingBox,
    DepthCamouflage,
    ColorCamouflage,
    LightSwitch,
    Shadow,
    RemovedObject,
    AdoDropout,
    Bootstrap,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::Static,
        ScenarioKind::MovingBox,
        ScenarioKind::DepthCamouflage,
        ScenarioKind::ColorCamouflage,
        ScenarioKind::LightSwitch,
        ScenarioKind::Shadow,
        ScenarioKind::RemovedObject,
        ScenarioKind::AdoDropout,
        ScenarioKind::Bootstrap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Static => "static",
            ScenarioKind::MovingBox => "moving_box",
            ScenarioKind::DepthCamouflage => "depth_camouflage",
            ScenarioKind::ColorCamouflage => "color_camouflage",
            ScenarioKind::LightSwitch => "light_switch",
            ScenarioKind::Shadow => "shadow",
            ScenarioKind::RemovedObject => "removed_object",
            ScenarioKind::AdoDropout => "ado_dropout",
            ScenarioKind::Bootstrap => "bootstrap",
        }
    }

    fn has_box(self) -> bool {
        !matches!(self, ScenarioKind::Static | ScenarioKind::RemovedObject)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = GsmError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GsmError::UnknownScenario {
                name: s.to_string(),
                valid: Self::ALL.map(|k| k.name()).join(", "),
            })
    }
}

pub const WALL_COLOR: [u8; 3] = [120, 100, 80];
pub const WALL_DEPTH: u16 = 1300;
pub const PANEL_COLOR: [u8; 3] = [60, 110, 150];
pub const PANEL_DEPTH: u16 = 1250;
pub const FLOOR_COLOR: [u8; 3] = [140, 90, 50];
pub const FLOOR_DEPTH: u16 = 1000;
pub const BOX_COLOR: [u8; 3] = [160, 40, 60];
pub const BOX_DEPTH: u16 = 900;
pub const DEPTH_CAMO_COLOR: [u8; 3] = [40, 170, 150];
pub const OBJECT_COLOR: [u8; 3] = [40, 60, 140];
pub const OBJECT_DEPTH: u16 = 1000;

/// Valid rendered depths; anything at or below `DEPTH_MIN` would read as ADO.
const DEPTH_MIN: u16 = 650;
const DEPTH_MAX: u16 = 1500;

/// Axis-aligned half-open rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn area(&self) -> usize {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn translate(&self, dx: usize, dy: usize, w: usize, h: usize) -> Rect {
        Rect {
            x0: (self.x0 + dx).min(w),
            y0: (self.y0 + dy).min(h),
            x1: (self.x1 + dx).min(w),
            y1: (self.y1 + dy).min(h),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub training_count: usize,
    /// Per-channel color noise std on the `[0, 1]` scale.
    pub noise_sigma_color: f64,
    /// Depth noise std in raw units.
    pub noise_sigma_depth: f64,
    pub seed: u64,
    /// Illumination gain of `light_switch`.
    pub gain: f64,
    /// Per-pixel dropout probability of `ado_dropout`.
    pub ado_rate: f64,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            width: 160,
            height: 120,
            frames: 150,
            training_count: 100,
            noise_sigma_color: 2.0 / 255.0,
            noise_sigma_depth: 3.0,
            seed,
            gain: 1.5,
            ado_rate: 0.02,
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.noise_sigma_color = 0.0;
        self.noise_sigma_depth = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GsmError::InvalidGeometry(m));
        if self.width < 40 || self.height < 40 {
            return bad(format!(
                "frame must be at least 40x40, got {}x{}",
                self.width, self.height
            ));
        }
        if self.training_count < 2 {
            return bad(format!(
                "training_count must be at least 2, got {}",
                self.training_count
            ));
        }
        if self.frames < self.training_count + 10 {
            return bad(format!(
                "frames ({}) must be at least training_count + 10 ({})",
                self.frames,
                self.training_count + 10
            ));
        }
        if !(self.noise_sigma_color >= 0.0 && self.noise_sigma_depth >= 0.0) {
            return bad("noise levels must be non-negative".into());
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return bad(format!("gain must be positive, got {}", self.gain));
        }
        if !(0.0..=1.0).contains(&self.ado_rate) {
            return bad(format!("ado_rate must lie in [0, 1], got {}", self.ado_rate));
        }
        Ok(())
    }

    /// Frame at which `light_switch` turns on and `removed_object` vanishes.
    pub fn event_frame(&self) -> usize {
        self.training_count + ((self.frames - self.training_count) / 5).max(1)
    }

    pub fn panel(&self) -> Rect {
        Rect {
            x0: 0,
            y0: 0,
            x1: self.width * 3 / 10,
            y1: self.floor_top(),
        }
    }

    fn floor_top(&self) -> usize {
        self.height * 3 / 4
    }

    pub fn floor(&self) -> Rect {
        Rect {
            x0: 0,
            y0: self.floor_top(),
            x1: self.width,
            y1: self.height,
        }
    }

    /// The removable object of `removed_object`, on the wall.
    pub fn object(&self) -> Rect {
        let (w, h) = (self.width, self.height);
        Rect {
            x0: w * 55 / 100,
            y0: h / 10,
            x1: w * 8 / 10,
            y1: h * 4 / 10,
        }
    }

    /// Always-ADO patch of `ado_dropout`, on the panel.
    pub fn ado_patch(&self) -> Rect {
        let (w, h) = (self.width, self.height);
        Rect {
            x0: w / 20,
            y0: h / 5,
            x1: w / 5,
            y1: h / 2,
        }
    }

    fn box_size(&self) -> (usize, usize) {
        (self.width / 5, self.height / 4)
    }

    /// Foreground box in frame `t`, if present.
    pub fn box_rect(&self, t: usize) -> Option<Rect> {
        if !self.kind.has_box() {
            return None;
        }
        let start = if self.kind == ScenarioKind::Bootstrap {
            0
        } else {
            self.training_count
        };
        if t < start {
            return None;
        }
        let (bw, bh) = self.box_size();
        let margin = 2;
        // Camouflage boxes stay on the wall so a single background surface
        // sits behind them.
        let (lo, hi) = match self.kind {
            ScenarioKind::DepthCamouflage | ScenarioKind::ColorCamouflage => {
                (self.panel().x1 + margin, self.width - bw - margin)
            }
            _ => (margin, self.width - bw - margin),
        };
        let span = (self.frames - start - 1).max(1);
        let x0 = lo + ((hi - lo) * (t - start) + span / 2) / span;
        let y0 = (self.floor_top() - bh) / 2;
        Some(Rect {
            x0,
            y0,
            x1: x0 + bw,
            y1: y0 + bh,
        })
    }

    fn shadow_rect(&self, t: usize) -> Option<Rect> {
        if self.kind != ScenarioKind::Shadow {
            return None;
        }
        let b = self.box_rect(t)?;
        let (dx, dy) = (self.width / 20, self.height / 10);
        Some(b.translate(dx, dy, self.width, self.height))
    }

    // Noise-free color, depth and ground truth of one pixel.
    fn pixel(&self, t: usize, x: usize, y: usize) -> ([u8; 3], Option<u16>, bool) {
        let (mut color, mut depth) = if self.floor().contains(x, y) {
            (FLOOR_COLOR, FLOOR_DEPTH)
        } else if self.panel().contains(x, y) {
            (PANEL_COLOR, PANEL_DEPTH)
        } else {
            (WALL_COLOR, WALL_DEPTH)
        };
        let mut depth_known = true;
        let mut fg = false;
        if self.kind == ScenarioKind::RemovedObject && t < self.event_frame() && self.object().contains(x, y) {
            color = OBJECT_COLOR;
            depth = OBJECT_DEPTH;
        }
        if let Some(s) = self.shadow_rect(t) {
            if s.contains(x, y) {
                color = color.map(|c| c / 2);
                depth_known = false;
            }
        }
        if let Some(b) = self.box_rect(t) {
            if b.contains(x, y) {
                fg = true;
                depth_known = true;
                match self.kind {
                    ScenarioKind::DepthCamouflage => {
                        color = DEPTH_CAMO_COLOR;
                        depth -= 2;
                    }
                    ScenarioKind::ColorCamouflage => {
                        depth = BOX_DEPTH;
                    }
                    _ => {
                        color = BOX_COLOR;
                        depth = BOX_DEPTH;
                    }
                }
            }
        }
        if self.kind == ScenarioKind::AdoDropout && self.ado_patch().contains(x, y) {
            depth_known = false;
        }
        if self.kind == ScenarioKind::LightSwitch && t >= self.event_frame() {
            color = color.map(|c| (c as f64 * self.gain).round().min(255.0) as u8);
        }
        (color, depth_known.then_some(depth), fg)
    }

    /// Ground truth of frame `t`.
    pub fn ground_truth(&self, t: usize) -> GtMask {
        let labels = (0..self.width * self.height)
            .map(|i| {
                let (_, _, fg) = self.pixel(t, i % self.width, i / self.width);
                if fg {
                    GtLabel::Foreground
                } else {
                    GtLabel::Background
                }
            })
            .collect();
        GtMask {
            width: self.width,
            height: self.height,
            labels,
        }
    }

    pub fn render_frame(&self, t: usize) -> Result<RenderedFrame> {
        self.validate()?;
        if t >= self.frames {
            return Err(GsmError::InvalidGeometry(format!(
                "frame {t} out of range (scenario has {} frames)",
                self.frames
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64);
        let color_noise = Normal::new(0.0, self.noise_sigma_color * 255.0).expect("checked sigma");
        let depth_noise = Normal::new(0.0, self.noise_sigma_depth).expect("checked sigma");
        let n = self.width * self.height;
        let mut pixels = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let (color, depth, fg) = self.pixel(t, i % self.width, i / self.width);
            // Draws happen for every pixel so the stream layout does not
            // depend on scene content.
            let noisy = color.map(|c| {
                let v = c as f64 + color_noise.sample(&mut rng);
                v.round().clamp(0.0, 255.0) as u8
            });
            let dn = depth_noise.sample(&mut rng);
            let dropped = rng.random::<f64>() < self.ado_rate && self.kind == ScenarioKind::AdoDropout;
            let d = match depth {
                Some(d) if !dropped => (d as f64 + dn).round().clamp((DEPTH_MIN + 1) as f64, DEPTH_MAX as f64) as u16,
                _ => DepthFrame::ADO,
            };
            pixels.push(noisy);
            values.push(d);
            labels.push(if fg { GtLabel::Foreground } else { GtLabel::Background });
        }
        Ok(RenderedFrame {
            color: ColorFrame {
                width: self.width,
                height: self.height,
                pixels,
            },
            depth: DepthFrame {
                width: self.width,
                height: self.height,
                values,
            },
            gt: GtMask {
                width: self.width,
                height: self.height,
                labels,
            },
        })
    }

    /// All frames, rendered in parallel.
    pub fn render(&self) -> Result<Vec<RenderedFrame>> {
        self.validate()?;
        (0..self.frames).into_par_iter().map(|t| self.render_frame(t)).collect()
    }

    /// Writes color, depth and (post-training) ground truth under `dir`, plus
    /// a `manifest.txt`. Returns the manifest path.
    pub fn write_sequence(&self, dir: &Path) -> Result<PathBuf> {
        self.validate()?;
        let color_dir = dir.join("color");
        let depth_dir = dir.join("depth");
        let gt_dir = dir.join("gt");
        for d in [&color_dir, &depth_dir, &gt_dir] {
            std::fs::create_dir_all(d).map_err(|e| GsmError::io(d, e))?;
        }
        let mut manifest = SequenceManifest::new(color_dir.clone(), depth_dir.clone());
        manifest.gt_dir = Some(gt_dir.clone());
        manifest.training_count = self.training_count;
        manifest.depth_min = DEPTH_MIN;
        manifest.depth_max = DEPTH_MAX;
        (0..self.frames).into_par_iter().try_for_each(|t| -> Result<()> {
            let f = self.render_frame(t)?;
            let name = manifest.pattern.format(t);
            io::write_color(&f.color, &color_dir.join(&name))?;
            io::write_depth(&f.depth, &depth_dir.join(&name))?;
            if t >= self.training_count {
                io::write_gt(&f.gt, &gt_dir.join(&name))?;
            }
            Ok(())
        })?;
        let path = dir.join("manifest.txt");
        manifest.save(&path)?;
        Ok(path)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderedFrame {
    pub color: ColorFrame,
    pub depth: DepthFrame,
    pub gt: GtMask,
}
