//! C ABI over the `gsm` library.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free` (or consumed by [`gsm_trainer_finish`]). Every fallible call
//! returns a [`GsmStatus`]; on failure a message is available from
//! [`gsm_last_error_message`] on the same thread. Panics never cross the
//! boundary.
//!
//! Frames are row-major: color is `width * height * 3` bytes of RGB, depth is
//! `width * height` raw sensor values mapped with the configured
//! `depth_min`/`depth_max` (0 or anything at or below `depth_min` is an
//! absent reading).

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use gsm::io::map_raw_depth;
use gsm::metrics::{cdnet_measures, ConfusionCounts};
use gsm::{ColorFrame, DepthFrame, GsmError, Label, LabelFrame, SceneModel, Trainer, UndefinedPolicy};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    TooFewFrames = 4,
    NotTrained = 5,
    NoValidSupport = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsmLabel {
    Background = 0,
    Foreground = 1,
    Undefined = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsmPolicy {
    /// Undefined pixels count as background.
    Ub = 0,
    /// Undefined pixels count as foreground.
    Uf = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GsmConfig {
    pub n: u32,
    pub gamma: f64,
    pub theta: f64,
    pub xi: f64,
    pub alpha: f64,
    pub gamma_update: f64,
    pub undefined_policy: GsmPolicy,
    pub depth_min: u16,
    pub depth_max: u16,
    pub floor_r: f64,
    pub floor_g: f64,
    pub floor_d: f64,
}

impl From<&gsm::GsmConfig> for GsmConfig {
    fn from(c: &gsm::GsmConfig) -> Self {
        Self {
            n: c.n as u32,
            gamma: c.gamma,
            theta: c.theta,
            xi: c.xi,
            alpha: c.alpha,
            gamma_update: c.gamma_update,
            undefined_policy: c.undefined_policy.into(),
            depth_min: c.depth_min,
            depth_max: c.depth_max,
            floor_r: c.floor_r,
            floor_g: c.floor_g,
            floor_d: c.floor_d,
        }
    }
}

impl From<&GsmConfig> for gsm::GsmConfig {
    fn from(c: &GsmConfig) -> Self {
        Self {
            n: c.n as usize,
            gamma: c.gamma,
            theta: c.theta,
            xi: c.xi,
            alpha: c.alpha,
            gamma_update: c.gamma_update,
            undefined_policy: c.undefined_policy.into(),
            depth_min: c.depth_min,
            depth_max: c.depth_max,
            floor_r: c.floor_r,
            floor_g: c.floor_g,
            floor_d: c.floor_d,
        }
    }
}

impl From<UndefinedPolicy> for GsmPolicy {
    fn from(p: UndefinedPolicy) -> Self {
        match p {
            UndefinedPolicy::Ub => GsmPolicy::Ub,
            UndefinedPolicy::Uf => GsmPolicy::Uf,
        }
    }
}

impl From<GsmPolicy> for UndefinedPolicy {
    fn from(p: GsmPolicy) -> Self {
        match p {
            GsmPolicy::Ub => UndefinedPolicy::Ub,
            GsmPolicy::Uf => UndefinedPolicy::Uf,
        }
    }
}

/// The seven change-detection measures plus foreground similarity.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GsmMetrics {
    pub recall: f64,
    pub specificity: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub pwc: f64,
    pub precision: f64,
    pub fmeasure: f64,
    pub s: f64,
}

/// Training state; opaque to C.
pub struct GsmTrainer {
    inner: Trainer,
    width: usize,
    height: usize,
    depth_min: u16,
    depth_max: u16,
}

/// Trained scene model; opaque to C.
pub struct GsmModel {
    inner: SceneModel,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &GsmError) -> GsmStatus {
    match err {
        GsmError::DimensionMismatch { .. } => GsmStatus::DimensionMismatch,
        GsmError::TooFewFrames { .. } | GsmError::InsufficientSamples { .. } => GsmStatus::TooFewFrames,
        GsmError::NotTrained => GsmStatus::NotTrained,
        GsmError::NoValidSupport => GsmStatus::NoValidSupport,
        GsmError::InvalidConfig(_) | GsmError::InvalidGeometry(_) => GsmStatus::InvalidArgument,
        _ => GsmStatus::Internal,
    }
}

// Runs `f`, recording any error or panic for `gsm_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), (GsmStatus, String)>) -> GsmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GsmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GsmStatus::Panic
        }
    }
}

fn lib_err(e: GsmError) -> (GsmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (GsmStatus, String) {
    (GsmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn frames(
    width: usize,
    height: usize,
    depth_min: u16,
    depth_max: u16,
    rgb: *const u8,
    depth: *const u16,
) -> Result<(ColorFrame, DepthFrame), (GsmStatus, String)> {
    if rgb.is_null() {
        return Err(null("rgb"));
    }
    if depth.is_null() {
        return Err(null("depth"));
    }
    let n = width * height;
    let rgb = std::slice::from_raw_parts(rgb, n * 3);
    let depth = std::slice::from_raw_parts(depth, n);
    let pixels = rgb.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    let values = depth.iter().map(|&d| map_raw_depth(d, depth_min, depth_max)).collect();
    Ok((
        ColorFrame::new(width, height, pixels).map_err(lib_err)?,
        DepthFrame::new(width, height, values).map_err(lib_err)?,
    ))
}

/// Copies the message of the last failed call on this thread into `buf`
/// (NUL-terminated, truncated to `len - 1` bytes). Returns the full message
/// length, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gsm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Writes the default configuration to `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsm_config_default(out: *mut GsmConfig) -> GsmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = GsmConfig::from(&gsm::GsmConfig::default());
        Ok(())
    })
}

/// Creates a trainer for `width x height` frames.
///
/// # Safety
/// `config` must be null (defaults) or valid for reads; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn gsm_trainer_new(
    width: u32,
    height: u32,
    config: *const GsmConfig,
    out: *mut *mut GsmTrainer,
) -> GsmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = std::ptr::null_mut();
        let config = config
            .as_ref()
            .map_or_else(gsm::GsmConfig::default, gsm::GsmConfig::from);
        let (w, h) = (width as usize, height as usize);
        let trainer = GsmTrainer {
            width: w,
            height: h,
            depth_min: config.depth_min,
            depth_max: config.depth_max,
            inner: Trainer::new(w, h, config).map_err(lib_err)?,
        };
        *out = Box::into_raw(Box::new(trainer));
        Ok(())
    })
}

/// Adds one training frame.
///
/// # Safety
/// `trainer` must come from [`gsm_trainer_new`]; `rgb` and `depth` must
/// hold a full frame each.
#[no_mangle]
pub unsafe extern "C" fn gsm_trainer_push(trainer: *mut GsmTrainer, rgb: *const u8, depth: *const u16) -> GsmStatus {
    guard(|| {
        let t = trainer.as_mut().ok_or_else(|| null("trainer"))?;
        let (c, d) = frames(t.width, t.height, t.depth_min, t.depth_max, rgb, depth)?;
        t.inner.push(&c, &d).map_err(lib_err)
    })
}

/// Fits the model. Always consumes `trainer`, even on failure.
///
/// # Safety
/// `trainer` must come from [`gsm_trainer_new`] and not be used afterwards;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsm_trainer_finish(trainer: *mut GsmTrainer, out: *mut *mut GsmModel) -> GsmStatus {
    guard(|| {
        if trainer.is_null() {
            return Err(null("trainer"));
        }
        let t = Box::from_raw(trainer);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = std::ptr::null_mut();
        let model = t.inner.finish().map_err(lib_err)?;
        *out = Box::into_raw(Box::new(GsmModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `trainer` must be null or come from [`gsm_trainer_new`].
#[no_mangle]
pub unsafe extern "C" fn gsm_trainer_free(trainer: *mut GsmTrainer) {
    if !trainer.is_null() {
        drop(Box::from_raw(trainer));
    }
}

/// Frame size of a trained model.
///
/// # Safety
/// `model` must come from [`gsm_trainer_finish`]; `width`/`height` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsm_model_dims(model: *const GsmModel, width: *mut u32, height: *mut u32) -> GsmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let (w, h) = m.inner.dims();
        *width.as_mut().ok_or_else(|| null("width"))? = w as u32;
        *height.as_mut().ok_or_else(|| null("height"))? = h as u32;
        Ok(())
    })
}

/// Segments one frame and updates the model. `labels_out` receives one
/// [`GsmLabel`] value per pixel.
///
/// # Safety
/// `model` must come from [`gsm_trainer_finish`]; `rgb`, `depth` and
/// `labels_out` must hold a full frame each.
#[no_mangle]
pub unsafe extern "C" fn gsm_model_segment(
    model: *mut GsmModel,
    rgb: *const u8,
    depth: *const u16,
    labels_out: *mut u8,
) -> GsmStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        if labels_out.is_null() {
            return Err(null("labels_out"));
        }
        let (w, h) = m.inner.dims();
        let cfg = m.inner.config();
        let (c, d) = frames(w, h, cfg.depth_min, cfg.depth_max, rgb, depth)?;
        let labels = m.inner.segment_frame(&c, &d).map_err(lib_err)?;
        let out = std::slice::from_raw_parts_mut(labels_out, w * h);
        for (o, l) in out.iter_mut().zip(&labels.labels) {
            *o = match l {
                Label::Background => GsmLabel::Background,
                Label::Foreground => GsmLabel::Foreground,
                Label::Undefined => GsmLabel::Undefined,
            } as u8;
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from [`gsm_trainer_finish`].
#[no_mangle]
pub unsafe extern "C" fn gsm_model_free(model: *mut GsmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Folds `len` label values into a 0/1 foreground mask.
///
/// # Safety
/// `labels` and `mask_out` must each hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gsm_collapse(
    labels: *const u8,
    len: usize,
    policy: GsmPolicy,
    mask_out: *mut u8,
) -> GsmStatus {
    guard(|| {
        if labels.is_null() {
            return Err(null("labels"));
        }
        if mask_out.is_null() {
            return Err(null("mask_out"));
        }
        let src = std::slice::from_raw_parts(labels, len);
        let labels = src
            .iter()
            .map(|&v| match v {
                0 => Ok(Label::Background),
                1 => Ok(Label::Foreground),
                2 => Ok(Label::Undefined),
                v => Err((GsmStatus::InvalidArgument, format!("invalid label value {v}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let frame = LabelFrame::new(len, 1, labels).map_err(lib_err)?;
        let mask = gsm::collapse(&frame, policy.into());
        let out = std::slice::from_raw_parts_mut(mask_out, len);
        for (o, &f) in out.iter_mut().zip(&mask.foreground) {
            *o = f as u8;
        }
        Ok(())
    })
}

/// Change-detection measures from confusion counts.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsm_metrics(tp: u64, fp: u64, tn: u64, fn_: u64, out: *mut GsmMetrics) -> GsmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = cdnet_measures(&ConfusionCounts::new(tp, fp, tn, fn_));
        *out = GsmMetrics {
            recall: r.recall,
            specificity: r.specificity,
            fpr: r.fpr,
            fnr: r.fnr,
            pwc: r.pwc,
            precision: r.precision,
            fmeasure: r.fmeasure,
            s: r.s,
        };
        Ok(())
    })
}
