//! Frame containers shared by the model, I/O, metrics and generator.
//!
//! All frames are row-major with `index = y * width + x`.

use crate::error::{GsmError, Result};

/// 8-bit RGB frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl ColorFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_len(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Raw depth frame. Absent depth observations are stored as [`DepthFrame::ADO`];
/// every other value lies inside the configured valid depth range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthFrame {
    pub width: usize,
    pub height: usize,
    pub values: Vec<u16>,
}

impl DepthFrame {
    /// In-memory sentinel for an absent depth observation.
    pub const ADO: u16 = 0;

    pub fn new(width: usize, height: usize, values: Vec<u16>) -> Result<Self> {
        check_len(width, height, values.len())?;
        Ok(Self { width, height, values })
    }

    pub fn filled(width: usize, height: usize, depth: u16) -> Self {
        Self {
            width,
            height,
            values: vec![depth; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn is_ado(&self, index: usize) -> bool {
        self.values[index] == Self::ADO
    }

    pub fn ado_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == Self::ADO).count()
    }
}

/// Three-class segmentation label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Label {
    Background = 0,
    Foreground = 1,
    Undefined = 2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelFrame {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Label>,
}

impl LabelFrame {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Result<Self> {
        check_len(width, height, labels.len())?;
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: usize, height: usize, label: Label) -> Self {
        Self {
            width,
            height,
            labels: vec![label; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Foreground/background decision per pixel (`true` = foreground).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub foreground: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, foreground: Vec<bool>) -> Result<Self> {
        check_len(width, height, foreground.len())?;
        Ok(Self {
            width,
            height,
            foreground,
        })
    }

    pub fn filled(width: usize, height: usize, foreground: bool) -> Self {
        Self {
            width,
            height,
            foreground: vec![foreground; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn foreground_count(&self) -> usize {
        self.foreground.iter().filter(|&&f| f).count()
    }
}

/// Ground-truth pixel class. `Unknown` pixels are excluded from scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GtLabel {
    Background,
    Foreground,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtMask {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<GtLabel>,
}

impl GtMask {
    pub fn new(width: usize, height: usize, labels: Vec<GtLabel>) -> Result<Self> {
        check_len(width, height, labels.len())?;
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: usize, height: usize, label: GtLabel) -> Self {
        Self {
            width,
            height,
            labels: vec![label; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn from_binary(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width,
            height: mask.height,
            labels: mask
                .foreground
                .iter()
                .map(|&f| if f { GtLabel::Foreground } else { GtLabel::Background })
                .collect(),
        }
    }
}

/// Luminance-normalized `(r, g)` chromaticity of an 8-bit RGB triple.
///
/// Black has no defined chromaticity and maps to the neutral point `(1/3, 1/3)`.
#[inline]
pub fn to_chromaticity(rgb: [u8; 3]) -> (f64, f64) {
    let sum = rgb[0] as u32 + rgb[1] as u32 + rgb[2] as u32;
    if sum == 0 {
        return (1.0 / 3.0, 1.0 / 3.0);
    }
    let sum = sum as f64;
    (rgb[0] as f64 / sum, rgb[1] as f64 / sum)
}

pub(crate) fn check_dims(expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected != got {
        return Err(GsmError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    if width * height != len {
        return Err(GsmError::InvalidGeometry(format!(
            "{width}x{height} frame needs {} pixels, got {len}",
            width * height
        )));
    }
    Ok(())
}
