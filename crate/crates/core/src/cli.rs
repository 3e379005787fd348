//! Command-line front end: `segment`, `evaluate`, `synth` and `rank`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{GsmConfig, UndefinedPolicy};
use crate::error::{GsmError, Result};
use crate::frame::LabelFrame;
use crate::io::{self, FramePattern, Sequence, SequenceManifest};
use crate::metrics::{self, SequenceScore, AGGREGATE_SEQUENCE};
use crate::segmenter::{collapse, Trainer};
use crate::synth::{Scenario, ScenarioKind};

#[derive(Debug, Parser)]
#[command(name = "gsm", version, about = "Nonparametric RGBD foreground segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on the leading frames of a sequence and segment the rest.
    Segment(SegmentArgs),
    /// Score predicted masks against ground truth.
    Evaluate(EvaluateArgs),
    /// Render a synthetic sequence with ground truth.
    Synth(SynthArgs),
    /// Rank methods across sequences from evaluation reports.
    Rank(RankArgs),
}

/// Overrides for [`GsmConfig`]; unset fields keep their defaults.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// Samples per pixel [default: the manifest's training_count]
    #[arg(long)]
    pub n: Option<usize>,
    /// Foreground threshold on the joint density [default: 1e-8]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Minimum absent-depth probability for a defined label [default: 0.005]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Moved-background score threshold [default: 0.6]
    #[arg(long)]
    pub xi: Option<f64>,
    /// Absent-depth probability learning rate [default: 0.02]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Density a background pixel needs to enter the color model [default: 1e-6]
    #[arg(long)]
    pub gamma_update: Option<f64>,
    /// How undefined pixels are collapsed [default: ub]
    #[arg(long, alias = "policy", value_enum)]
    pub undefined_policy: Option<UndefinedPolicy>,
    /// [default: the manifest's depth_min]
    #[arg(long)]
    pub depth_min: Option<u16>,
    /// [default: the manifest's depth_max]
    #[arg(long)]
    pub depth_max: Option<u16>,
    /// Bandwidth floor for r [default: 1/255]
    #[arg(long)]
    pub floor_r: Option<f64>,
    /// Bandwidth floor for g [default: 1/255]
    #[arg(long)]
    pub floor_g: Option<f64>,
    /// Bandwidth floor for depth [default: 1]
    #[arg(long)]
    pub floor_d: Option<f64>,
}

impl ConfigArgs {
    /// Applies the overrides on top of defaults taken from `manifest`.
    pub fn resolve(&self, manifest: &SequenceManifest) -> Result<GsmConfig> {
        let d = GsmConfig::default();
        let c = GsmConfig {
            n: self.n.unwrap_or(manifest.training_count),
            gamma: self.gamma.unwrap_or(d.gamma),
            theta: self.theta.unwrap_or(d.theta),
            xi: self.xi.unwrap_or(d.xi),
            alpha: self.alpha.unwrap_or(d.alpha),
            gamma_update: self.gamma_update.unwrap_or(d.gamma_update),
            undefined_policy: self.undefined_policy.unwrap_or(d.undefined_policy),
            depth_min: self.depth_min.unwrap_or(manifest.depth_min),
            depth_max: self.depth_max.unwrap_or(manifest.depth_max),
            floor_r: self.floor_r.unwrap_or(d.floor_r),
            floor_g: self.floor_g.unwrap_or(d.floor_g),
            floor_d: self.floor_d.unwrap_or(d.floor_d),
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Sequence manifest
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for masks and metadata.json
    #[arg(long)]
    pub out: PathBuf,
    /// Write 0/128/255 masks instead of collapsing undefined pixels
    #[arg(long)]
    pub three_class: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Mask directory, or a directory of per-sequence mask directories
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth directory laid out like `--pred`; for each sequence a
    /// `gt` subdirectory is used when present
    #[arg(long)]
    pub gt: PathBuf,
    /// CSV report to write
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value = "gsm")]
    pub method: String,
    /// How 128-valued (undefined) predicted pixels are scored
    #[arg(long, value_enum, default_value_t = UndefinedPolicy::Ub)]
    pub policy: UndefinedPolicy,
    #[arg(long, default_value = SequenceManifest::DEFAULT_PATTERN)]
    pub pattern: String,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// One of: static, moving_box, depth_camouflage, color_camouflage,
    /// light_switch, shadow, removed_object, ado_dropout, bootstrap
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 160)]
    pub width: usize,
    #[arg(long, default_value_t = 120)]
    pub height: usize,
    #[arg(long, default_value_t = 150)]
    pub frames: usize,
    #[arg(long, default_value_t = 100)]
    pub training_count: usize,
    /// Color noise std on the [0, 1] scale
    #[arg(long, default_value_t = 2.0 / 255.0)]
    pub noise_sigma_color: f64,
    /// Depth noise std in raw units
    #[arg(long, default_value_t = 3.0)]
    pub noise_sigma_depth: f64,
    #[arg(long, default_value_t = 1.5)]
    pub gain: f64,
    #[arg(long, default_value_t = 0.02)]
    pub ado_rate: f64,
    /// Shorthand for zero color and depth noise
    #[arg(long)]
    pub noiseless: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Reports written by `evaluate`
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Write the ranking CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Written next to the masks of every `segment` run.
#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub version: &'static str,
    pub sequence: PathBuf,
    pub config: GsmConfig,
    pub three_class: bool,
    pub training_frames: usize,
    pub segmented_frames: usize,
    pub seconds: f64,
    pub frames_per_second: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentSummary {
    pub training_frames: usize,
    pub segmented_frames: usize,
    /// Wall time spent segmenting (training and I/O of training frames excluded).
    pub seconds: f64,
}

/// Trains on the first `training_count` frames of `seq` and segments the
/// remaining ones in order, handing each label frame to `sink`. Frames are
/// loaded one at a time.
pub fn segment_sequence(
    seq: &mut Sequence,
    config: &GsmConfig,
    mut sink: impl FnMut(usize, &LabelFrame) -> Result<()>,
) -> Result<SegmentSummary> {
    let indices = seq.indices().to_vec();
    let tc = seq.manifest.training_count;
    if indices.len() <= tc {
        return Err(GsmError::TooFewFrames {
            needed: tc + 1,
            got: indices.len(),
        });
    }
    let mut trainer: Option<Trainer> = None;
    for &i in &indices[..tc] {
        let (c, d) = seq.load_frame(i)?;
        let t = match trainer.as_mut() {
            Some(t) => t,
            None => trainer.insert(Trainer::new(c.width, c.height, config.clone())?),
        };
        t.push(&c, &d)?;
    }
    let mut model = match trainer {
        Some(t) => t.finish()?,
        None => {
            return Err(GsmError::TooFewFrames {
                needed: config.n.max(2),
                got: 0,
            })
        }
    };
    let start = Instant::now();
    for &i in &indices[tc..] {
        let (c, d) = seq.load_frame(i)?;
        let labels = model.segment_frame(&c, &d)?;
        sink(i, &labels)?;
    }
    Ok(SegmentSummary {
        training_frames: tc,
        segmented_frames: indices.len() - tc,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Segment(a) => cmd_segment(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Rank(a) => cmd_rank(&a),
    }
}

pub fn cmd_segment(a: &SegmentArgs) -> anyhow::Result<()> {
    let manifest = SequenceManifest::load(&a.manifest)?;
    let config = a.config.resolve(&manifest)?;
    let pattern = manifest.pattern.clone();
    let mut seq = Sequence::open(manifest)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let policy = config.undefined_policy;
    let summary = segment_sequence(&mut seq, &config, |i, labels| {
        let path = a.out.join(pattern.format(i));
        if a.three_class {
            io::write_mask(labels, &path)
        } else {
            io::write_mask(&collapse(labels, policy), &path)
        }
    })?;
    let fps = if summary.seconds > 0.0 {
        summary.segmented_frames as f64 / summary.seconds
    } else {
        0.0
    };
    let meta = RunMetadata {
        version: env!("CARGO_PKG_VERSION"),
        sequence: a.manifest.clone(),
        config,
        three_class: a.three_class,
        training_frames: summary.training_frames,
        segmented_frames: summary.segmented_frames,
        seconds: summary.seconds,
        frames_per_second: fps,
    };
    let meta_path = a.out.join("metadata.json");
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)
        .with_context(|| format!("writing {}", meta_path.display()))?;
    println!(
        "segmented {} frames ({} training) at {:.1} fps -> {}",
        summary.segmented_frames,
        summary.training_frames,
        fps,
        a.out.display()
    );
    Ok(())
}

// (sequence name, prediction dir, gt dir) for a flat or nested layout.
fn evaluation_pairs(pred: &Path, gt: &Path, pattern: &FramePattern) -> anyhow::Result<Vec<(String, PathBuf, PathBuf)>> {
    ensure!(pred.is_dir(), "{}: prediction directory not found", pred.display());
    ensure!(gt.is_dir(), "{}: ground-truth directory not found", gt.display());
    let gt_of = |dir: &Path| {
        let nested = dir.join("gt");
        if nested.is_dir() {
            nested
        } else {
            dir.to_path_buf()
        }
    };
    if !pattern.list(pred)?.is_empty() {
        let name = pred
            .file_name()
            .map_or_else(|| "sequence".to_string(), |n| n.to_string_lossy().into_owned());
        return Ok(vec![(name, pred.to_path_buf(), gt_of(gt))]);
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(pred)
        .with_context(|| format!("reading {}", pred.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut out = Vec::new();
    for dir in subdirs {
        if pattern.list(&dir)?.is_empty() {
            continue;
        }
        let name = dir
            .file_name()
            .expect("entry has a name")
            .to_string_lossy()
            .into_owned();
        let g = gt.join(&name);
        ensure!(g.is_dir(), "{}: no ground truth for sequence `{name}`", g.display());
        out.push((name, dir, gt_of(&g)));
    }
    ensure!(!out.is_empty(), "{}: no masks matching `{pattern}`", pred.display());
    Ok(out)
}

/// Scores one directory of masks against one directory of ground truth.
pub fn score_directory(
    pred: &Path,
    gt: &Path,
    pattern: &FramePattern,
    policy: UndefinedPolicy,
) -> anyhow::Result<SequenceScore> {
    let p = pattern.list(pred)?;
    let g = pattern.list(gt)?;
    ensure!(!p.is_empty(), "{}: no masks matching `{pattern}`", pred.display());
    if p != g {
        bail!(
            "{} has {} masks but {} has {} ground-truth frames (index sets differ)",
            pred.display(),
            p.len(),
            gt.display(),
            g.len()
        );
    }
    let mut score = SequenceScore::default();
    for i in p {
        let name = pattern.format(i);
        let mask = io::read_binary_mask(&pred.join(&name), policy)?;
        let truth = io::load_gt(&gt.join(&name))?;
        score.add_frame(&mask, &truth).with_context(|| format!("frame {i}"))?;
    }
    Ok(score)
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> anyhow::Result<()> {
    let pattern = FramePattern::parse(&a.pattern)?;
    let pairs = evaluation_pairs(&a.pred, &a.gt, &pattern)?;
    let mut rows = Vec::new();
    let mut total = SequenceScore::default();
    for (name, pred, gt) in pairs {
        let s = score_directory(&pred, &gt, &pattern, a.policy).with_context(|| format!("sequence `{name}`"))?;
        total.merge(&s);
        rows.push((name, s));
    }
    rows.push((AGGREGATE_SEQUENCE.to_string(), total));
    metrics::write_report(&a.report, &a.method, &rows)?;
    for (name, s) in &rows {
        let r = s.report();
        println!(
            "{name}: frames {} F {:.4} PWC {:.4} S {:.4} S_B {:.4}",
            s.frames, r.fmeasure, r.pwc, r.s, r.s_b
        );
    }
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs) -> anyhow::Result<()> {
    let kind: ScenarioKind = a.scenario.parse()?;
    let mut s = Scenario {
        kind,
        width: a.width,
        height: a.height,
        frames: a.frames,
        training_count: a.training_count,
        noise_sigma_color: a.noise_sigma_color,
        noise_sigma_depth: a.noise_sigma_depth,
        seed: a.seed,
        gain: a.gain,
        ado_rate: a.ado_rate,
    };
    if a.noiseless {
        s = s.noiseless();
    }
    let manifest = s.write_sequence(&a.out)?;
    println!("wrote {} frames of `{kind}` -> {}", s.frames, manifest.display());
    Ok(())
}

pub fn cmd_rank(a: &RankArgs) -> anyhow::Result<()> {
    let mut all = Vec::new();
    for path in &a.reports {
        all.extend(metrics::read_report(path)?);
    }
    let ranking = metrics::rank_methods(&all)?;
    match &a.out {
        Some(path) => {
            let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            metrics::write_ranking(f, &ranking)?;
        }
        None => metrics::write_ranking(std::io::stdout().lock(), &ranking)?,
    }
    Ok(())
}
