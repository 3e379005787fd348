//! On-disk sequences: color/depth/ground-truth image files plus a small
//! `key = value` manifest.
//!
//! * color: 8-bit RGB PNG
//! * depth: 16-bit grayscale PNG, raw sensor units; values at or below
//!   `depth_min` (and 0) are absent observations
//! * ground truth: 8-bit grayscale, 0 = background, 255 = foreground, any
//!   other value = unknown (not scored)
//! * label masks: 8-bit grayscale, 0 = background, 255 = foreground,
//!   128 = undefined

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageBuffer, Luma, RgbImage};

use crate::error::{GsmError, Result};
use crate::frame::{BinaryMask, ColorFrame, DepthFrame, GtLabel, GtMask, Label, LabelFrame};
use crate::UndefinedPolicy;

pub const MASK_BACKGROUND: u8 = 0;
pub const MASK_UNDEFINED: u8 = 128;
pub const MASK_FOREGROUND: u8 = 255;

/// Raw value written for absent depth, matching the reference sensor.
pub const ADO_RAW_CODE: u16 = 650;

fn open_image(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(GsmError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    image::open(path).map_err(|source| GsmError::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn save_image(img: &DynamicImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|source| GsmError::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_color(path: &Path) -> Result<ColorFrame> {
    let rgb = match open_image(path)? {
        DynamicImage::ImageRgb8(img) => img,
        img @ DynamicImage::ImageRgba8(_) => img.to_rgb8(),
        other => {
            return Err(GsmError::format(
                path,
                format!("expected 8-bit RGB color, got {:?}", other.color()),
            ))
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    ColorFrame::new(w, h, rgb.pixels().map(|p| p.0).collect())
}

pub fn write_color(frame: &ColorFrame, path: &Path) -> Result<()> {
    let raw: Vec<u8> = frame.pixels.iter().flatten().copied().collect();
    let img =
        RgbImage::from_raw(frame.width as u32, frame.height as u32, raw).expect("color buffer matches frame size");
    save_image(&DynamicImage::ImageRgb8(img), path)
}

/// Maps one stored depth value: no-data codes and anything at or below
/// `depth_min` become ADO, valid values are clamped to `depth_max`.
#[inline]
pub fn map_raw_depth(raw: u16, depth_min: u16, depth_max: u16) -> u16 {
    if raw == 0 || raw <= depth_min {
        DepthFrame::ADO
    } else {
        raw.min(depth_max)
    }
}

pub fn load_depth(path: &Path, depth_min: u16, depth_max: u16) -> Result<DepthFrame> {
    let img = match open_image(path)? {
        DynamicImage::ImageLuma16(img) => img,
        other => {
            return Err(GsmError::format(
                path,
                format!("expected 16-bit single-channel depth, got {:?}", other.color()),
            ))
        }
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    DepthFrame::new(
        w,
        h,
        img.pixels()
            .map(|p| map_raw_depth(p.0[0], depth_min, depth_max))
            .collect(),
    )
}

/// Writes depth as 16-bit PNG with ADO stored as [`ADO_RAW_CODE`].
pub fn write_depth(frame: &DepthFrame, path: &Path) -> Result<()> {
    let raw: Vec<u16> = frame
        .values
        .iter()
        .map(|&v| if v == DepthFrame::ADO { ADO_RAW_CODE } else { v })
        .collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(frame.width as u32, frame.height as u32, raw).expect("depth buffer matches frame size");
    save_image(&DynamicImage::ImageLuma16(img), path)
}

fn load_gray8(path: &Path) -> Result<GrayImage> {
    match open_image(path)? {
        DynamicImage::ImageLuma8(img) => Ok(img),
        other => Err(GsmError::format(
            path,
            format!("expected 8-bit single-channel mask, got {:?}", other.color()),
        )),
    }
}

pub fn load_gt(path: &Path) -> Result<GtMask> {
    let img = load_gray8(path)?;
    GtMask::new(
        img.width() as usize,
        img.height() as usize,
        img.pixels()
            .map(|p| match p.0[0] {
                MASK_BACKGROUND => GtLabel::Background,
                MASK_FOREGROUND => GtLabel::Foreground,
                _ => GtLabel::Unknown,
            })
            .collect(),
    )
}

pub fn write_gt(mask: &GtMask, path: &Path) -> Result<()> {
    let bytes = mask
        .labels
        .iter()
        .map(|l| match l {
            GtLabel::Background => MASK_BACKGROUND,
            GtLabel::Foreground => MASK_FOREGROUND,
            GtLabel::Unknown => MASK_UNDEFINED,
        })
        .collect();
    write_gray8(mask.width, mask.height, bytes, path)
}

/// Anything that can be written as an 8-bit label mask.
pub trait MaskImage {
    fn mask_dims(&self) -> (usize, usize);
    fn mask_bytes(&self) -> Vec<u8>;
}

impl MaskImage for LabelFrame {
    fn mask_dims(&self) -> (usize, usize) {
        self.dims()
    }

    fn mask_bytes(&self) -> Vec<u8> {
        self.labels
            .iter()
            .map(|l| match l {
                Label::Background => MASK_BACKGROUND,
                Label::Foreground => MASK_FOREGROUND,
                Label::Undefined => MASK_UNDEFINED,
            })
            .collect()
    }
}

impl MaskImage for BinaryMask {
    fn mask_dims(&self) -> (usize, usize) {
        self.dims()
    }

    fn mask_bytes(&self) -> Vec<u8> {
        self.foreground
            .iter()
            .map(|&f| if f { MASK_FOREGROUND } else { MASK_BACKGROUND })
            .collect()
    }
}

fn write_gray8(width: usize, height: usize, bytes: Vec<u8>, path: &Path) -> Result<()> {
    let img = GrayImage::from_raw(width as u32, height as u32, bytes).expect("mask buffer matches frame size");
    save_image(&DynamicImage::ImageLuma8(img), path)
}

pub fn write_mask<M: MaskImage>(mask: &M, path: &Path) -> Result<()> {
    let (w, h) = mask.mask_dims();
    write_gray8(w, h, mask.mask_bytes(), path)
}

/// Reads a label mask written by [`write_mask`].
pub fn read_mask(path: &Path) -> Result<LabelFrame> {
    let img = load_gray8(path)?;
    let labels = img
        .pixels()
        .map(|p| match p.0[0] {
            MASK_BACKGROUND => Ok(Label::Background),
            MASK_FOREGROUND => Ok(Label::Foreground),
            MASK_UNDEFINED => Ok(Label::Undefined),
            v => Err(GsmError::format(path, format!("unexpected mask value {v}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    LabelFrame::new(img.width() as usize, img.height() as usize, labels)
}

/// Reads a predicted mask as binary, folding undefined pixels per `policy`.
pub fn read_binary_mask(path: &Path, policy: UndefinedPolicy) -> Result<BinaryMask> {
    Ok(crate::segmenter::collapse(&read_mask(path)?, policy))
}

/// printf-style frame file pattern with one zero-padded index, e.g. `%06d.png`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramePattern {
    prefix: String,
    width: usize,
    suffix: String,
}

impl FramePattern {
    pub fn parse(pattern: &str) -> Result<Self> {
        let bad = || GsmError::format(pattern, "frame pattern must contain one `%0Nd` or `%d`");
        let start = pattern.find('%').ok_or_else(bad)?;
        let rest = &pattern[start + 1..];
        let end = rest.find('d').ok_or_else(bad)?;
        let spec = &rest[..end];
        let width = if spec.is_empty() {
            0
        } else {
            spec.trim_start_matches('0').parse::<usize>().map_err(|_| bad())?
        };
        let suffix = &rest[end + 1..];
        if suffix.contains('%') || pattern[..start].contains('/') || suffix.contains('/') {
            return Err(bad());
        }
        Ok(Self {
            prefix: pattern[..start].to_string(),
            width,
            suffix: suffix.to_string(),
        })
    }

    pub fn format(&self, index: usize) -> String {
        format!("{}{:0width$}{}", self.prefix, index, self.suffix, width = self.width)
    }

    pub fn match_index(&self, file_name: &str) -> Option<usize> {
        let digits = file_name.strip_prefix(&self.prefix)?.strip_suffix(&self.suffix)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if self.width > 0 && digits.len() < self.width {
            return None;
        }
        digits.parse().ok()
    }

    /// Indices of matching files in `dir`, ascending.
    pub fn list(&self, dir: &Path) -> Result<Vec<usize>> {
        let entries = fs::read_dir(dir).map_err(|e| GsmError::io(dir, e))?;
        let mut out = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| GsmError::io(dir, e))?;
            if let Some(i) = entry.file_name().to_str().and_then(|n| self.match_index(n)) {
                out.push(i);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

impl std::fmt::Display for FramePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.width > 0 {
            write!(f, "{}%0{}d{}", self.prefix, self.width, self.suffix)
        } else {
            write!(f, "{}%d{}", self.prefix, self.suffix)
        }
    }
}

/// Sequence description. Relative directories resolve against the directory
/// holding the manifest file.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceManifest {
    pub color_dir: PathBuf,
    pub depth_dir: PathBuf,
    pub gt_dir: Option<PathBuf>,
    pub pattern: FramePattern,
    pub training_count: usize,
    pub depth_min: u16,
    pub depth_max: u16,
}

impl SequenceManifest {
    pub const DEFAULT_PATTERN: &'static str = "%06d.png";

    pub fn new(color_dir: PathBuf, depth_dir: PathBuf) -> Self {
        Self {
            color_dir,
            depth_dir,
            gt_dir: None,
            pattern: FramePattern::parse(Self::DEFAULT_PATTERN).expect("default pattern is valid"),
            training_count: 100,
            depth_min: 650,
            depth_max: 1500,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| GsmError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            GsmError::Format { msg, .. } => GsmError::format(path, msg),
            other => other,
        })
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| GsmError::format(base, format!("line {}: expected `key = value`", lineno + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let dir = |key: &str| -> Result<PathBuf> {
            let v = kv
                .get(key)
                .ok_or_else(|| GsmError::format(base, format!("missing key `{key}`")))?;
            Ok(base.join(v))
        };
        let num = |key: &str, default: u64| -> Result<u64> {
            kv.get(key).map_or(Ok(default), |v| {
                v.parse()
                    .map_err(|_| GsmError::format(base, format!("`{key}` must be an integer, got `{v}`")))
            })
        };
        for key in kv.keys() {
            if !matches!(
                key.as_str(),
                "color_dir" | "depth_dir" | "gt_dir" | "pattern" | "training_count" | "depth_min" | "depth_max"
            ) {
                return Err(GsmError::format(base, format!("unknown key `{key}`")));
            }
        }
        let to_u16 = |key: &str, v: u64| -> Result<u16> {
            u16::try_from(v).map_err(|_| GsmError::format(base, format!("`{key}` out of range: {v}")))
        };
        let m = Self {
            color_dir: dir("color_dir")?,
            depth_dir: dir("depth_dir")?,
            gt_dir: kv.get("gt_dir").map(|v| base.join(v)),
            pattern: FramePattern::parse(kv.get("pattern").map_or(Self::DEFAULT_PATTERN, String::as_str))?,
            training_count: num("training_count", 100)? as usize,
            depth_min: to_u16("depth_min", num("depth_min", 650)?)?,
            depth_max: to_u16("depth_max", num("depth_max", 1500)?)?,
        };
        if m.depth_min >= m.depth_max {
            return Err(GsmError::format(base, "depth_min must be below depth_max"));
        }
        Ok(m)
    }

    /// Writes the manifest with directories relative to `path`'s directory
    /// when possible.
    pub fn save(&self, path: &Path) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new("."));
        let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
        let mut text = String::new();
        text.push_str(&format!("color_dir = {}\n", rel(&self.color_dir)));
        text.push_str(&format!("depth_dir = {}\n", rel(&self.depth_dir)));
        if let Some(gt) = &self.gt_dir {
            text.push_str(&format!("gt_dir = {}\n", rel(gt)));
        }
        text.push_str(&format!("pattern = {}\n", self.pattern));
        text.push_str(&format!("training_count = {}\n", self.training_count));
        text.push_str(&format!("depth_min = {}\n", self.depth_min));
        text.push_str(&format!("depth_max = {}\n", self.depth_max));
        fs::write(path, text).map_err(|e| GsmError::io(path, e))
    }
}

/// A sequence on disk with its frame indices resolved.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub manifest: SequenceManifest,
    indices: Vec<usize>,
    dims: Option<(usize, usize)>,
}

impl Sequence {
    pub fn open(manifest: SequenceManifest) -> Result<Self> {
        for dir in [&manifest.color_dir, &manifest.depth_dir] {
            if !dir.is_dir() {
                return Err(GsmError::io(
                    dir,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "directory not found"),
                ));
            }
        }
        let color = manifest.pattern.list(&manifest.color_dir)?;
        let depth = manifest.pattern.list(&manifest.depth_dir)?;
        if color != depth {
            return Err(GsmError::format(
                &manifest.depth_dir,
                format!(
                    "color and depth frame sets differ ({} color vs {} depth frames)",
                    color.len(),
                    depth.len()
                ),
            ));
        }
        if color.is_empty() {
            return Err(GsmError::format(
                &manifest.color_dir,
                format!("no frames match `{}`", manifest.pattern),
            ));
        }
        Ok(Self {
            manifest,
            indices: color,
            dims: None,
        })
    }

    /// Frame indices in temporal order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn color_path(&self, index: usize) -> PathBuf {
        self.manifest.color_dir.join(self.manifest.pattern.format(index))
    }

    pub fn depth_path(&self, index: usize) -> PathBuf {
        self.manifest.depth_dir.join(self.manifest.pattern.format(index))
    }

    pub fn gt_path(&self, index: usize) -> Option<PathBuf> {
        let dir = self.manifest.gt_dir.as_ref()?;
        let p = dir.join(self.manifest.pattern.format(index));
        p.exists().then_some(p)
    }

    /// Loads one frame pair and checks it against the sequence dimensions.
    pub fn load_frame(&mut self, index: usize) -> Result<(ColorFrame, DepthFrame)> {
        let cp = self.color_path(index);
        let dp = self.depth_path(index);
        let color = load_color(&cp)?;
        let depth = load_depth(&dp, self.manifest.depth_min, self.manifest.depth_max)?;
        let expected = *self.dims.get_or_insert(color.dims());
        for (path, got) in [(&cp, color.dims()), (&dp, depth.dims())] {
            if got != expected {
                return Err(GsmError::format(
                    path,
                    format!(
                        "frame is {}x{}, sequence is {}x{}",
                        got.0, got.1, expected.0, expected.1
                    ),
                ));
            }
        }
        Ok((color, depth))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_round_trip() {
        let p = FramePattern::parse("frame_%06d.png").unwrap();
        assert_eq!(p.format(42), "frame_000042.png");
        assert_eq!(p.match_index("frame_000042.png"), Some(42));
        assert_eq!(p.match_index("frame_42.png"), None);
        assert_eq!(p.match_index("other_000042.png"), None);
        assert_eq!(p.to_string(), "frame_%06d.png");
        assert!(FramePattern::parse("nodigits.png").is_err());
        let bare = FramePattern::parse("%d.png").unwrap();
        assert_eq!(bare.match_index("7.png"), Some(7));
    }

    #[test]
    fn raw_depth_mapping() {
        assert_eq!(map_raw_depth(650, 650, 1500), DepthFrame::ADO);
        assert_eq!(map_raw_depth(0, 650, 1500), DepthFrame::ADO);
        assert_eq!(map_raw_depth(1200, 650, 1500), 1200);
        assert_eq!(map_raw_depth(4000, 650, 1500), 1500);
    }

    #[test]
    fn depth_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        let f = DepthFrame::new(3, 1, vec![DepthFrame::ADO, 1200, 651]).unwrap();
        write_depth(&f, &path).unwrap();
        assert_eq!(load_depth(&path, 650, 1500).unwrap(), f);
        // Stored sentinel and zero both read back as ADO.
        let raw: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(2, 1, vec![0u16, 650]).unwrap();
        DynamicImage::ImageLuma16(raw).save(&path).unwrap();
        assert_eq!(load_depth(&path, 650, 1500).unwrap().ado_count(), 2);
    }

    #[test]
    fn depth_rejects_8bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        write_mask(&BinaryMask::filled(2, 2, false), &path).unwrap();
        assert!(matches!(load_depth(&path, 650, 1500), Err(GsmError::Format { .. })));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_color(Path::new("/nonexistent/c.png")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/c.png"));
    }

    #[test]
    fn mask_encoding() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let labels = LabelFrame::new(3, 1, vec![Label::Background, Label::Foreground, Label::Undefined]).unwrap();
        write_mask(&labels, &path).unwrap();
        assert_eq!(load_gray8(&path).unwrap().into_raw(), vec![0, 255, 128]);
        assert_eq!(read_mask(&path).unwrap(), labels);

        write_mask(&LabelFrame::filled(4, 2, Label::Background), &path).unwrap();
        assert!(load_gray8(&path).unwrap().into_raw().iter().all(|&b| b == 0));

        let uf = crate::segmenter::collapse(&labels, UndefinedPolicy::Uf);
        write_mask(&uf, &path).unwrap();
        assert!(load_gray8(&path)
            .unwrap()
            .into_raw()
            .iter()
            .all(|&b| b == 0 || b == 255));
    }

    #[test]
    fn manifest_parse_and_save() {
        let dir = tempfile::tempdir().unwrap();
        let text =
            "# seq\ncolor_dir = color\ndepth_dir = depth\ngt_dir = gt\npattern = %04d.png\ntraining_count = 20\n";
        let m = SequenceManifest::parse(text, dir.path()).unwrap();
        assert_eq!(m.color_dir, dir.path().join("color"));
        assert_eq!(m.training_count, 20);
        assert_eq!((m.depth_min, m.depth_max), (650, 1500));
        let path = dir.path().join("manifest.txt");
        m.save(&path).unwrap();
        assert_eq!(SequenceManifest::load(&path).unwrap(), m);

        assert!(SequenceManifest::parse("color_dir = c\n", dir.path()).is_err());
        assert!(SequenceManifest::parse("color_dir = c\ndepth_dir = d\nbogus = 1\n", dir.path()).is_err());
    }

    #[test]
    fn sequence_requires_matching_frames() {
        let dir = tempfile::tempdir().unwrap();
        let m = SequenceManifest::new(dir.path().join("color"), dir.path().join("depth"));
        let err = Sequence::open(m.clone()).unwrap_err();
        assert!(err.to_string().contains("color"));

        fs::create_dir_all(&m.color_dir).unwrap();
        fs::create_dir_all(&m.depth_dir).unwrap();
        write_color(&ColorFrame::filled(2, 2, [1, 2, 3]), &m.color_dir.join("000000.png")).unwrap();
        write_color(&ColorFrame::filled(2, 2, [1, 2, 3]), &m.color_dir.join("000001.png")).unwrap();
        write_depth(&DepthFrame::filled(2, 2, 900), &m.depth_dir.join("000000.png")).unwrap();
        assert!(Sequence::open(m.clone()).is_err());
        write_depth(&DepthFrame::filled(2, 3, 900), &m.depth_dir.join("000001.png")).unwrap();
        let mut seq = Sequence::open(m).unwrap();
        assert_eq!(seq.indices(), &[0, 1]);
        seq.load_frame(0).unwrap();
        assert!(seq.load_frame(1).is_err());
    }
}
