//! Nonparametric RGBD scene modelling and foreground segmentation.
//!
//! Every pixel keeps a short history of `(r, g, D)` observations: `r, g` are
//! luminance-normalized chromaticity and `D` is raw sensor depth. A new
//! observation is background when its kernel density under that history is
//! high enough. Missing depth readings are tracked per pixel so that a
//! sudden hole can be reported as *undefined* instead of guessed, and a
//! depth that jumps behind the modelled surface is absorbed as background in
//! the same frame.

pub mod ado;
pub mod cli;
pub mod config;
pub mod error;
pub mod frame;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod motion;
pub mod scene_model;
pub mod segmenter;
pub mod synth;

pub use config::{GsmConfig, UndefinedPolicy};
pub use error::{GsmError, Result};
pub use frame::{to_chromaticity, BinaryMask, ColorFrame, DepthFrame, GtLabel, GtMask, Label, LabelFrame};
pub use io::{Sequence, SequenceManifest};
pub use kernel::{estimate_bandwidth, KernelTable};
pub use metrics::{ConfusionCounts, MetricReport};
pub use scene_model::{Bandwidths, Observation, PixelModel};
pub use segmenter::{collapse, train, SceneModel, Trainer};
pub use synth::{Scenario, ScenarioKind};
