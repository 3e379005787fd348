//! Training and per-frame segmentation.
//!
//! Per pixel and frame, in order:
//! 1. an ADO reading is replaced by the last valid depth;
//! 2. a depth farther than the modelled samples (moved background) labels
//!    the pixel background outright;
//! 3. otherwise the kernel density decides background/foreground;
//! 4. a fresh ADO on a pixel with low ADO probability overrides the label
//!    with undefined;
//! 5. color is learned only from confident background, depth (and the ADO
//!    probability) only from moved-background pixels.

use rayon::prelude::*;

use crate::ado::{inpaint_initial_depth, is_undefined, substitute_ado};
use crate::config::{GsmConfig, UndefinedPolicy};
use crate::error::{GsmError, Result};
use crate::frame::{check_dims, BinaryMask, ColorFrame, DepthFrame, Label, LabelFrame};
use crate::kernel::KernelTable;
use crate::scene_model::{Observation, PixelModel};

/// Accumulates training frames one at a time.
pub struct Trainer {
    config: GsmConfig,
    width: usize,
    height: usize,
    pixels: Vec<PixelModel>,
    frames: usize,
}

impl Trainer {
    pub fn new(width: usize, height: usize, config: GsmConfig) -> Result<Self> {
        config.validate()?;
        if width == 0 || height == 0 {
            return Err(GsmError::InvalidGeometry(format!("empty frame size {width}x{height}")));
        }
        let pixels = (0..width * height).map(|_| PixelModel::new(config.n)).collect();
        Ok(Self {
            config,
            width,
            height,
            pixels,
            frames: 0,
        })
    }

    pub fn frames_seen(&self) -> usize {
        self.frames
    }

    pub fn push(&mut self, color: &ColorFrame, depth: &DepthFrame) -> Result<()> {
        let dims = (self.width, self.height);
        check_dims(dims, color.dims())?;
        check_dims(dims, depth.dims())?;

        if self.frames == 0 {
            let seed = inpaint_initial_depth(depth)?;
            for (p, &d) in self.pixels.iter_mut().zip(&seed.values) {
                p.last_valid_depth = d;
            }
        }
        let alpha = self.config.alpha;
        self.pixels
            .par_iter_mut()
            .zip(color.pixels.par_iter())
            .zip(depth.values.par_iter())
            .for_each(|((p, &rgb), &raw)| {
                let is_ado = raw == DepthFrame::ADO;
                p.ado.update(alpha, is_ado);
                let d = substitute_ado(raw, &mut p.last_valid_depth);
                p.push_sample(&Observation::from_rgbd(rgb, d));
            });
        self.frames += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<SceneModel> {
        let needed = self.config.n.max(2);
        if self.frames < needed {
            return Err(GsmError::TooFewFrames {
                needed,
                got: self.frames,
            });
        }
        let floors = self.config.floors();
        self.pixels
            .par_iter_mut()
            .try_for_each(|p| p.fit_bandwidths(&floors).map(|_| ()))?;
        Ok(SceneModel {
            config: self.config,
            width: self.width,
            height: self.height,
            pixels: self.pixels,
            table: KernelTable::default(),
            frames_segmented: 0,
        })
    }
}

/// Trains a scene model from the given frames, in order.
pub fn train<'a, I>(frames: I, config: &GsmConfig) -> Result<SceneModel>
where
    I: IntoIterator<Item = (&'a ColorFrame, &'a DepthFrame)>,
{
    let mut frames = frames.into_iter().peekable();
    let (w, h) = match frames.peek() {
        Some((c, _)) => c.dims(),
        None => {
            return Err(GsmError::TooFewFrames {
                needed: config.n.max(2),
                got: 0,
            })
        }
    };
    let mut trainer = Trainer::new(w, h, config.clone())?;
    for (c, d) in frames {
        trainer.push(c, d)?;
    }
    trainer.finish()
}

/// What happened at one pixel during [`SceneModel::segment_frame_traced`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelStep {
    pub label: Label,
    /// The moved-background test fired (and the depth model was updated).
    pub moved: bool,
    /// The color sample was pushed.
    pub color_updated: bool,
}

/// A trained scene: one [`PixelModel`] per pixel plus the shared settings.
#[derive(Clone, Debug)]
pub struct SceneModel {
    config: GsmConfig,
    width: usize,
    height: usize,
    pixels: Vec<PixelModel>,
    table: KernelTable,
    frames_segmented: usize,
}

impl SceneModel {
    pub fn config(&self) -> &GsmConfig {
        &self.config
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn frames_segmented(&self) -> usize {
        self.frames_segmented
    }

    pub fn pixel(&self, x: usize, y: usize) -> &PixelModel {
        &self.pixels[y * self.width + x]
    }

    pub fn pixels(&self) -> &[PixelModel] {
        &self.pixels
    }

    pub fn ado_probabilities(&self) -> Vec<f64> {
        self.pixels.iter().map(|p| p.ado.prob).collect()
    }

    pub fn segment_frame(&mut self, color: &ColorFrame, depth: &DepthFrame) -> Result<LabelFrame> {
        let steps = self.segment_frame_traced(color, depth)?;
        LabelFrame::new(self.width, self.height, steps.iter().map(|s| s.label).collect())
    }

    /// Classifies and updates every pixel; returns the per-pixel decisions.
    pub fn segment_frame_traced(&mut self, color: &ColorFrame, depth: &DepthFrame) -> Result<Vec<PixelStep>> {
        let dims = (self.width, self.height);
        check_dims(dims, color.dims())?;
        check_dims(dims, depth.dims())?;
        let config = &self.config;
        let table = &self.table;
        let steps = self
            .pixels
            .par_iter_mut()
            .zip(color.pixels.par_iter())
            .zip(depth.values.par_iter())
            .map(|((p, &rgb), &raw)| step_pixel(p, rgb, raw, config, table))
            .collect::<Result<Vec<_>>>()?;
        self.frames_segmented += 1;
        Ok(steps)
    }
}

fn step_pixel(
    p: &mut PixelModel,
    rgb: [u8; 3],
    raw: u16,
    config: &GsmConfig,
    table: &KernelTable,
) -> Result<PixelStep> {
    let is_ado = raw == DepthFrame::ADO;
    let depth = substitute_ado(raw, &mut p.last_valid_depth);
    let x = Observation::from_rgbd(rgb, depth);

    let moved = p.is_moved(depth, config.xi)?;
    let density = p.kde_fast_until(&x, table, config.gamma_update)?;
    let mut label = if moved || density >= config.gamma {
        Label::Background
    } else {
        Label::Foreground
    };
    if is_undefined(p.ado, config.theta, is_ado) {
        label = Label::Undefined;
    }
    let color_updated = apply_updates(p, &x, label, moved, is_ado, density, config);
    Ok(PixelStep {
        label,
        moved,
        color_updated,
    })
}

fn apply_updates(
    p: &mut PixelModel,
    x: &Observation,
    label: Label,
    moved: bool,
    is_ado: bool,
    density: f64,
    config: &GsmConfig,
) -> bool {
    let color = label == Label::Background && density >= config.gamma_update;
    if color {
        p.push_color(x.r, x.g);
    }
    if moved {
        p.push_depth(x.depth as u16);
        p.ado.update(config.alpha, is_ado);
    }
    color
}

/// Applies the update rules to one pixel after classification.
///
/// Color is pushed for background whose density reaches `gamma_update`;
/// depth and the ADO probability are updated only for moved background.
/// Returns whether the color sample was pushed.
pub fn update_models(
    p: &mut PixelModel,
    x: &Observation,
    label: Label,
    moved: bool,
    is_ado: bool,
    config: &GsmConfig,
    table: &KernelTable,
) -> Result<bool> {
    let density = if label == Label::Background {
        p.kde_fast_until(x, table, config.gamma_update)?
    } else {
        0.0
    };
    Ok(apply_updates(p, x, label, moved, is_ado, density, config))
}

/// Folds undefined pixels into background (`Ub`) or foreground (`Uf`).
pub fn collapse(labels: &LabelFrame, policy: UndefinedPolicy) -> BinaryMask {
    let undefined_fg = policy == UndefinedPolicy::Uf;
    BinaryMask {
        width: labels.width,
        height: labels.height,
        foreground: labels
            .labels
            .iter()
            .map(|l| match l {
                Label::Background => false,
                Label::Foreground => true,
                Label::Undefined => undefined_fg,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: usize = 6;
    const H: usize = 4;

    fn cfg(n: usize) -> GsmConfig {
        GsmConfig {
            n,
            ..GsmConfig::default()
        }
    }

    fn static_frames(count: usize) -> Vec<(ColorFrame, DepthFrame)> {
        (0..count)
            .map(|_| (ColorFrame::filled(W, H, [90, 60, 30]), DepthFrame::filled(W, H, 800)))
            .collect()
    }

    fn train_on(frames: &[(ColorFrame, DepthFrame)], config: &GsmConfig) -> SceneModel {
        train(frames.iter().map(|(c, d)| (c, d)), config).unwrap()
    }

    #[test]
    fn constant_training_hits_floors() {
        let config = cfg(100);
        let model = train_on(&static_frames(100), &config);
        for p in model.pixels() {
            let bw = p.bandwidths().unwrap();
            assert_eq!((bw.sigma_r, bw.sigma_g, bw.sigma_d), (1.0 / 255.0, 1.0 / 255.0, 1.0));
            assert_eq!(p.ado.prob, 0.0);
            assert!(p.diffs().as_slice().iter().all(|&d| d == 0));
            assert_eq!(p.diffs().len(), 99);
        }
    }

    #[test]
    fn persistent_ado_pixel_training() {
        let config = cfg(100);
        let mut frames = static_frames(100);
        for (_, d) in frames.iter_mut() {
            d.values[7] = DepthFrame::ADO;
        }
        let model = train_on(&frames, &config);
        let p = &model.pixels()[7];
        assert!((p.ado.prob - (1.0 - 0.98f64.powi(100))).abs() < 1e-12);
        assert!((p.ado.prob - 0.8674).abs() < 1e-4);
        // Inpainted from uniform 800 neighbours and propagated.
        assert!(p.depth_samples().all(|d| d == 800));
    }

    #[test]
    fn minimal_training() {
        let model = train_on(&static_frames(2), &cfg(2));
        assert!(model.pixels().iter().all(|p| p.diffs().len() == 1));
    }

    #[test]
    fn training_errors() {
        let frames = static_frames(3);
        assert!(matches!(
            train(frames.iter().map(|(c, d)| (c, d)), &cfg(5)),
            Err(GsmError::TooFewFrames { needed: 5, got: 3 })
        ));
        let mut t = Trainer::new(W, H, cfg(2)).unwrap();
        let small = ColorFrame::filled(W - 1, H, [0; 3]);
        assert!(matches!(
            t.push(&small, &DepthFrame::filled(W, H, 800)),
            Err(GsmError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            t.push(
                &ColorFrame::filled(W, H, [1; 3]),
                &DepthFrame::filled(W, H, DepthFrame::ADO)
            ),
            Err(GsmError::NoValidSupport)
        ));
    }

    #[test]
    fn identical_frame_is_background() {
        let mut model = train_on(&static_frames(20), &cfg(20));
        let (c, d) = &static_frames(1)[0];
        let labels = model.segment_frame(c, d).unwrap();
        assert_eq!(labels.count(Label::Background), W * H);
    }

    #[test]
    fn removed_background_is_instant() {
        let mut model = train_on(&static_frames(20), &cfg(20));
        let (c, mut d) = static_frames(1).remove(0);
        d.values[5] = 1400;
        let steps = model.segment_frame_traced(&c, &d).unwrap();
        assert_eq!(steps[5].label, Label::Background);
        assert!(steps[5].moved);
        assert_eq!(model.pixels()[5].depth_samples().last(), Some(1400));
        assert!(!steps[4].moved);
    }

    #[test]
    fn fresh_ado_is_undefined() {
        let mut model = train_on(&static_frames(20), &cfg(20));
        let (mut c, mut d) = static_frames(1).remove(0);
        d.values[3] = DepthFrame::ADO;
        c.pixels[3] = [10, 200, 10];
        let labels = model.segment_frame(&c, &d).unwrap();
        assert_eq!(labels.labels[3], Label::Undefined);
        assert_eq!(labels.count(Label::Undefined), 1);
    }

    #[test]
    fn foreground_is_not_learned() {
        let mut model = train_on(&static_frames(20), &cfg(20));
        let (mut c, d) = static_frames(1).remove(0);
        c.pixels[0] = [10, 200, 10];
        let before = model.pixels()[0].samples();
        let steps = model.segment_frame_traced(&c, &d).unwrap();
        assert_eq!(steps[0].label, Label::Foreground);
        assert!(!steps[0].color_updated && !steps[0].moved);
        assert_eq!(model.pixels()[0].samples(), before);
    }

    #[test]
    fn guard_band_blocks_color_update() {
        let config = cfg(4);
        let mut p = PixelModel::with_bandwidths(
            &[Observation::new(0.25, 0.5, 800.0); 4],
            crate::scene_model::Bandwidths::new(0.01, 0.01, 1.0),
        );
        let table = KernelTable::default();
        // Density between gamma and gamma_update: move r until the peak
        // (~3989) drops into the guard band.
        let peak = p.kde_probability(&Observation::new(0.25, 0.5, 800.0)).unwrap();
        let target = (config.gamma * config.gamma_update).sqrt();
        let u = (2.0 * (peak / target).ln()).sqrt();
        let x = Observation::new(0.25 + u * 0.01, 0.5, 800.0);
        let density = p.kde_probability(&x).unwrap();
        assert!(density > config.gamma && density < config.gamma_update);
        let before = p.samples();
        let pushed = update_models(&mut p, &x, Label::Background, false, false, &config, &table).unwrap();
        assert!(!pushed);
        assert_eq!(p.samples(), before);

        let pushed = update_models(
            &mut p,
            &Observation::new(0.25, 0.5, 800.0),
            Label::Background,
            false,
            false,
            &config,
            &table,
        )
        .unwrap();
        assert!(pushed);
    }

    #[test]
    fn moved_update_touches_depth_only() {
        let config = cfg(3);
        let table = KernelTable::default();
        let mut p = PixelModel::with_bandwidths(
            &[
                Observation::new(0.25, 0.5, 800.0),
                Observation::new(0.25, 0.5, 801.0),
                Observation::new(0.25, 0.5, 802.0),
            ],
            crate::scene_model::Bandwidths::new(0.01, 0.01, 1.0),
        );
        let x = Observation::new(0.5, 0.25, 1300.0);
        let pushed = update_models(&mut p, &x, Label::Background, true, false, &config, &table).unwrap();
        assert!(!pushed);
        assert_eq!(p.depth_samples().collect::<Vec<_>>(), vec![801, 802, 1300]);
        assert!(p.color_samples().all(|(r, g)| (r, g) == (0.25, 0.5)));
    }

    #[test]
    fn collapse_policies() {
        let all = LabelFrame::filled(3, 2, Label::Undefined);
        assert_eq!(collapse(&all, UndefinedPolicy::Ub).foreground_count(), 0);
        assert_eq!(collapse(&all, UndefinedPolicy::Uf).foreground_count(), 6);

        let mixed = LabelFrame::new(3, 1, vec![Label::Background, Label::Foreground, Label::Undefined]).unwrap();
        let ub = collapse(&mixed, UndefinedPolicy::Ub);
        let uf = collapse(&mixed, UndefinedPolicy::Uf);
        assert_eq!(ub.foreground, vec![false, true, false]);
        assert_eq!(uf.foreground, vec![false, true, true]);
    }

    #[test]
    fn segment_rejects_mismatched_frames() {
        let mut model = train_on(&static_frames(4), &cfg(4));
        let c = ColorFrame::filled(W, H + 1, [1, 2, 3]);
        let d = DepthFrame::filled(W, H + 1, 800);
        assert!(matches!(
            model.segment_frame(&c, &d),
            Err(GsmError::DimensionMismatch { .. })
        ));
    }
}
