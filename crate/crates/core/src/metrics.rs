//! Scoring of predicted masks against ground truth, and rank aggregation
//! across methods and sequences.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use crate::error::{GsmError, Result};
use crate::frame::{check_dims, BinaryMask, GtLabel, GtMask};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.fp + o.fp, self.tn + o.tn, self.fn_ + o.fn_)
    }
}

impl std::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// The seven change-detection measures plus the two similarity scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub recall: f64,
    pub specificity: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub pwc: f64,
    pub precision: f64,
    pub fmeasure: f64,
    pub s: f64,
    pub s_b: f64,
}

/// Counts over pixels whose ground truth is known.
pub fn confusion(pred: &BinaryMask, gt: &GtMask) -> Result<ConfusionCounts> {
    check_dims(gt.dims(), pred.dims())?;
    Ok(confusion_where(pred, gt, |_| true))
}

fn confusion_where(pred: &BinaryMask, gt: &GtMask, keep: impl Fn(usize) -> bool) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (i, (&p, &g)) in pred.foreground.iter().zip(&gt.labels).enumerate() {
        if !keep(i) {
            continue;
        }
        match (g, p) {
            (GtLabel::Unknown, _) => {}
            (GtLabel::Foreground, true) => c.tp += 1,
            (GtLabel::Foreground, false) => c.fn_ += 1,
            (GtLabel::Background, true) => c.fp += 1,
            (GtLabel::Background, false) => c.tn += 1,
        }
    }
    c
}

// `num / den`, or the guard value when the denominator is empty: 1 when the
// quantity is vacuous on both sides, else 0.
fn ratio(num: u64, den: u64, vacuous: bool) -> f64 {
    if den == 0 {
        if vacuous {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

/// Fills the seven measures; `s` and `s_b` are left at the full-frame
/// similarity and NaN respectively (see [`similarity`], [`boundary_similarity`]).
pub fn cdnet_measures(c: &ConfusionCounts) -> MetricReport {
    let ConfusionCounts { tp, fp, tn, fn_ } = *c;
    let no_gt_fg = tp + fn_ == 0;
    let no_pred_fg = tp + fp == 0;
    let recall = ratio(tp, tp + fn_, no_pred_fg);
    let precision = ratio(tp, tp + fp, no_gt_fg);
    let fmeasure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let total = c.total();
    MetricReport {
        recall,
        specificity: ratio(tn, tn + fp, true),
        fpr: ratio(fp, fp + tn, false),
        fnr: ratio(fn_, tp + fn_, false),
        pwc: if total == 0 {
            0.0
        } else {
            100.0 * (fp + fn_) as f64 / total as f64
        },
        precision,
        fmeasure,
        s: similarity(c),
        s_b: f64::NAN,
    }
}

/// Foreground Jaccard index `tp / (tp + fp + fn)`; 1 when all three are zero.
pub fn similarity(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fp + c.fn_, true)
}

/// Half-width of the band around ground-truth boundaries.
pub const BOUNDARY_RADIUS: usize = 5;

/// Pixels within Chebyshev distance `radius` of a ground-truth foreground
/// pixel that is 4-adjacent to ground-truth background.
pub fn boundary_band(gt: &GtMask, radius: usize) -> Vec<bool> {
    let (w, h) = gt.dims();
    let fg = |x: usize, y: usize| gt.labels[y * w + x] == GtLabel::Foreground;
    let bg = |x: usize, y: usize| gt.labels[y * w + x] == GtLabel::Background;
    let mut edge = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            if !fg(x, y) {
                continue;
            }
            edge[y * w + x] = (x > 0 && bg(x - 1, y))
                || (x + 1 < w && bg(x + 1, y))
                || (y > 0 && bg(x, y - 1))
                || (y + 1 < h && bg(x, y + 1));
        }
    }
    // Separable square dilation.
    let mut rows = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(w - 1);
            rows[y * w + x] = (lo..=hi).any(|xx| edge[y * w + xx]);
        }
    }
    let mut band = vec![false; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(radius);
        let hi = (y + radius).min(h - 1);
        for x in 0..w {
            band[y * w + x] = (lo..=hi).any(|yy| rows[yy * w + x]);
        }
    }
    band
}

/// Confusion restricted to the boundary band, for accumulation over frames.
pub fn boundary_confusion(pred: &BinaryMask, gt: &GtMask) -> Result<ConfusionCounts> {
    check_dims(gt.dims(), pred.dims())?;
    let band = boundary_band(gt, BOUNDARY_RADIUS);
    Ok(confusion_where(pred, gt, |i| band[i]))
}

/// Similarity inside a 10-pixel-wide band around ground-truth object
/// boundaries. Without ground-truth foreground the band is empty and the
/// score is 1 if the prediction is empty too, else 0.
pub fn boundary_similarity(pred: &BinaryMask, gt: &GtMask) -> Result<f64> {
    check_dims(gt.dims(), pred.dims())?;
    if !gt.labels.contains(&GtLabel::Foreground) {
        return Ok(if pred.foreground_count() == 0 { 1.0 } else { 0.0 });
    }
    Ok(similarity(&boundary_confusion(pred, gt)?))
}

/// Running totals over the frames of one sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SequenceScore {
    pub frames: usize,
    pub counts: ConfusionCounts,
    pub boundary: ConfusionCounts,
    /// Frames whose ground truth has no foreground but whose prediction does.
    pub empty_gt_misses: usize,
}

impl SequenceScore {
    pub fn add_frame(&mut self, pred: &BinaryMask, gt: &GtMask) -> Result<()> {
        self.counts += confusion(pred, gt)?;
        if gt.labels.contains(&GtLabel::Foreground) {
            self.boundary += boundary_confusion(pred, gt)?;
        } else if pred.foreground_count() > 0 {
            self.empty_gt_misses += 1;
        }
        self.frames += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &SequenceScore) {
        self.frames += other.frames;
        self.counts += other.counts;
        self.boundary += other.boundary;
        self.empty_gt_misses += other.empty_gt_misses;
    }

    pub fn report(&self) -> MetricReport {
        let mut r = cdnet_measures(&self.counts);
        let b = self.boundary;
        r.s_b = if b.tp + b.fp + b.fn_ == 0 {
            if self.empty_gt_misses == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            similarity(&b)
        };
        r
    }
}

/// Whether larger or smaller values of a metric are better.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    HigherIsBetter,
    LowerIsBetter,
}

/// Orientation of the rankable report columns; other columns are not ranked.
pub fn orientation(metric: &str) -> Option<Orientation> {
    match metric {
        "recall" | "specificity" | "precision" | "fmeasure" | "s" | "s_b" => Some(Orientation::HigherIsBetter),
        "fpr" | "fnr" | "pwc" | "te" => Some(Orientation::LowerIsBetter),
        _ => None,
    }
}

/// One method's metric values on one sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodScores {
    pub method: String,
    pub sequence: String,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    pub methods: Vec<String>,
    pub sequences: Vec<String>,
    pub metrics: Vec<String>,
    /// `rm[method][sequence]`: mean rank over metrics (1 = best).
    pub rm: Vec<Vec<f64>>,
    /// Mean of `rm` over sequences.
    pub rc: Vec<f64>,
}

/// Ranks `values` (one per method); ties share the mean of their ranks.
pub fn average_ranks(values: &[f64], orientation: Orientation) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    let key = |i: usize| match orientation {
        Orientation::HigherIsBetter => -values[i],
        Orientation::LowerIsBetter => values[i],
    };
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && key(order[end]) == key(order[start]) {
            end += 1;
        }
        // Positions start..end hold ranks start+1 ..= end.
        let mean = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

/// Per-sequence mean rank (RM) and its mean over sequences (RC).
///
/// Every method must be scored on every sequence with the same set of
/// rankable metrics.
pub fn rank_methods(scores: &[MethodScores]) -> Result<Ranking> {
    let methods: Vec<String> = scores
        .iter()
        .map(|s| s.method.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let sequences: Vec<String> = scores
        .iter()
        .map(|s| s.sequence.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if methods.is_empty() {
        return Err(GsmError::IncompleteGrid("no scores".into()));
    }
    let mut grid: BTreeMap<(&str, &str), &BTreeMap<String, f64>> = BTreeMap::new();
    for s in scores {
        if grid.insert((&s.method, &s.sequence), &s.metrics).is_some() {
            return Err(GsmError::IncompleteGrid(format!(
                "duplicate entry for method `{}` on sequence `{}`",
                s.method, s.sequence
            )));
        }
    }
    let rankable = |m: &BTreeMap<String, f64>| -> BTreeSet<String> {
        m.keys().filter(|k| orientation(k).is_some()).cloned().collect()
    };
    let metrics: BTreeSet<String> = rankable(&scores[0].metrics);
    if metrics.is_empty() {
        return Err(GsmError::IncompleteGrid("no rankable metrics".into()));
    }
    for m in &methods {
        for s in &sequences {
            let entry = grid
                .get(&(m.as_str(), s.as_str()))
                .ok_or_else(|| GsmError::IncompleteGrid(format!("method `{m}` has no score for sequence `{s}`")))?;
            if rankable(entry) != metrics {
                return Err(GsmError::IncompleteGrid(format!(
                    "method `{m}` on sequence `{s}` reports a different metric set"
                )));
            }
        }
    }

    let mut rm = vec![vec![0.0; sequences.len()]; methods.len()];
    for (si, s) in sequences.iter().enumerate() {
        for metric in &metrics {
            let values: Vec<f64> = methods
                .iter()
                .map(|m| grid[&(m.as_str(), s.as_str())][metric])
                .collect();
            let ranks = average_ranks(&values, orientation(metric).expect("rankable"));
            for (mi, r) in ranks.into_iter().enumerate() {
                rm[mi][si] += r;
            }
        }
        for row in rm.iter_mut() {
            row[si] /= metrics.len() as f64;
        }
    }
    let rc = rm
        .iter()
        .map(|row| row.iter().sum::<f64>() / row.len() as f64)
        .collect();
    Ok(Ranking {
        methods,
        sequences,
        metrics: metrics.into_iter().collect(),
        rm,
        rc,
    })
}

/// Column order of evaluation reports.
pub const REPORT_COLUMNS: [&str; 16] = [
    "method",
    "sequence",
    "frames",
    "tp",
    "fp",
    "tn",
    "fn",
    "recall",
    "specificity",
    "fpr",
    "fnr",
    "pwc",
    "precision",
    "fmeasure",
    "s",
    "s_b",
];

/// Sequence name of the aggregate row in a report.
pub const AGGREGATE_SEQUENCE: &str = "ALL";

pub fn write_report(path: &Path, method: &str, rows: &[(String, SequenceScore)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(REPORT_COLUMNS).map_err(|e| csv_error(path, e))?;
    for (sequence, score) in rows {
        let r = score.report();
        let c = score.counts;
        let mut rec = vec![method.to_string(), sequence.clone(), score.frames.to_string()];
        rec.extend([c.tp, c.fp, c.tn, c.fn_].map(|v| v.to_string()));
        rec.extend(
            [
                r.recall,
                r.specificity,
                r.fpr,
                r.fnr,
                r.pwc,
                r.precision,
                r.fmeasure,
                r.s,
                r.s_b,
            ]
            .map(|v| format!("{v:.6}")),
        );
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| GsmError::io(path, e))
}

/// Reads per-sequence rows of a report (the aggregate row is skipped).
pub fn read_report(path: &Path) -> Result<Vec<MethodScores>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| GsmError::format(path, format!("missing column `{name}`")))
    };
    let (mi, si) = (col("method")?, col("sequence")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if &rec[si] == AGGREGATE_SEQUENCE {
            continue;
        }
        let mut metrics = BTreeMap::new();
        for (i, h) in headers.iter().enumerate() {
            if orientation(h).is_some() {
                let v: f64 = rec[i]
                    .parse()
                    .map_err(|_| GsmError::format(path, format!("bad value `{}` in column `{h}`", &rec[i])))?;
                metrics.insert(h.to_string(), v);
            }
        }
        out.push(MethodScores {
            method: rec[mi].to_string(),
            sequence: rec[si].to_string(),
            metrics,
        });
    }
    Ok(out)
}

pub fn write_ranking<W: Write>(out: W, ranking: &Ranking) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["method".to_string()];
    header.extend(ranking.sequences.iter().map(|s| format!("rm_{s}")));
    header.push("rc".into());
    let err = |e: csv::Error| GsmError::format("ranking", e.to_string());
    w.write_record(&header).map_err(err)?;
    for (mi, m) in ranking.methods.iter().enumerate() {
        let mut rec = vec![m.clone()];
        rec.extend(ranking.rm[mi].iter().map(|v| format!("{v:.4}")));
        rec.push(format!("{:.4}", ranking.rc[mi]));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| GsmError::format("ranking", e.to_string()))
}

fn csv_error(path: &Path, e: csv::Error) -> GsmError {
    GsmError::format(path, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture() -> (BinaryMask, GtMask) {
        // 1000 px: 50 tp, 10 fp, 930 tn, 10 fn.
        let mut pred = vec![false; 1000];
        let mut gt = vec![GtLabel::Background; 1000];
        gt[..60].fill(GtLabel::Foreground);
        for p in pred.iter_mut().take(50) {
            *p = true;
        }
        for p in pred.iter_mut().skip(60).take(10) {
            *p = true;
        }
        (
            BinaryMask::new(100, 10, pred).unwrap(),
            GtMask::new(100, 10, gt).unwrap(),
        )
    }

    #[test]
    fn constructed_fixture_counts() {
        let (p, g) = fixture();
        assert_eq!(confusion(&p, &g).unwrap(), ConfusionCounts::new(50, 10, 930, 10));
    }

    #[test]
    fn identical_masks_have_no_errors() {
        let (_, g) = fixture();
        let p = BinaryMask::new(100, 10, g.labels.iter().map(|&l| l == GtLabel::Foreground).collect()).unwrap();
        let c = confusion(&p, &g).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let r = cdnet_measures(&c);
        assert_eq!((r.recall, r.precision, r.fmeasure, r.pwc), (1.0, 1.0, 1.0, 0.0));
        assert_eq!(similarity(&c), 1.0);
    }

    #[test]
    fn all_foreground_on_empty_gt() {
        let p = BinaryMask::filled(8, 8, true);
        let g = GtMask::filled(8, 8, GtLabel::Background);
        assert_eq!(confusion(&p, &g).unwrap(), ConfusionCounts::new(0, 64, 0, 0));
    }

    #[test]
    fn unknown_pixels_are_excluded() {
        let p = BinaryMask::filled(2, 1, true);
        let g = GtMask::new(2, 1, vec![GtLabel::Unknown, GtLabel::Foreground]).unwrap();
        assert_eq!(confusion(&p, &g).unwrap(), ConfusionCounts::new(1, 0, 0, 0));
    }

    #[test]
    fn measures_fixture() {
        let r = cdnet_measures(&ConfusionCounts::new(50, 10, 930, 10));
        let close = |a: f64, b: f64| (a - b).abs() < 1e-4;
        assert!(close(r.recall, 0.8333));
        assert!(close(r.specificity, 0.98936));
        assert!(close(r.fpr, 0.01064));
        assert!(close(r.fnr, 0.1667));
        assert!(close(r.pwc, 2.0));
        assert!(close(r.precision, 0.8333));
        assert!(close(r.fmeasure, 0.8333));
        assert!(close(r.s, 0.7143));
    }

    #[test]
    fn guard_cases() {
        let r = cdnet_measures(&ConfusionCounts::new(0, 0, 100, 0));
        assert_eq!((r.recall, r.precision, r.fmeasure, r.pwc), (1.0, 1.0, 1.0, 0.0));
        assert_eq!(similarity(&ConfusionCounts::new(0, 0, 100, 0)), 1.0);
        assert_eq!(similarity(&ConfusionCounts::new(0, 3, 100, 2)), 0.0);
        let r = cdnet_measures(&ConfusionCounts::new(0, 5, 95, 0));
        assert_eq!((r.recall, r.precision), (0.0, 0.0));
    }

    #[test]
    fn boundary_similarity_cases() {
        let (w, h) = (80, 80);
        let square = |lo: usize, hi: usize| {
            let mut v = vec![false; w * h];
            for y in lo..hi {
                for x in lo..hi {
                    v[y * w + x] = true;
                }
            }
            BinaryMask::new(w, h, v).unwrap()
        };
        let gt_mask = square(30, 50);
        let gt = GtMask::from_binary(&gt_mask);
        assert_eq!(boundary_similarity(&gt_mask, &gt).unwrap(), 1.0);

        let fat = square(10, 70);
        let sb = boundary_similarity(&fat, &gt).unwrap();
        assert!(sb < 1.0);
        // Band: radius 5 around the ring of the 20x20 square, i.e. 30x30
        // minus an 8x8 hole; 336 of its 836 pixels are gt foreground.
        assert!((sb - 336.0 / 836.0).abs() < 1e-12, "{sb}");

        let empty = GtMask::filled(w, h, GtLabel::Background);
        assert_eq!(
            boundary_similarity(&BinaryMask::filled(w, h, false), &empty).unwrap(),
            1.0
        );
        assert_eq!(boundary_similarity(&square(0, 2), &empty).unwrap(), 0.0);
    }

    fn scores(method: &str, seq: &str, vals: &[(&str, f64)]) -> MethodScores {
        MethodScores {
            method: method.into(),
            sequence: seq.into(),
            metrics: vals.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        }
    }

    #[test]
    fn single_method_ranks_first() {
        let r = rank_methods(&[scores("a", "s1", &[("recall", 0.5), ("pwc", 3.0)])]).unwrap();
        assert_eq!(r.rm, vec![vec![1.0]]);
        assert_eq!(r.rc, vec![1.0]);
    }

    #[test]
    fn dominated_method_ranks_second() {
        let mut all = Vec::new();
        for s in ["s1", "s2"] {
            all.push(scores("good", s, &[("recall", 0.9), ("fpr", 0.01), ("s", 0.8)]));
            all.push(scores("bad", s, &[("recall", 0.5), ("fpr", 0.2), ("s", 0.3)]));
        }
        let r = rank_methods(&all).unwrap();
        let bad = r.methods.iter().position(|m| m == "bad").unwrap();
        let good = r.methods.iter().position(|m| m == "good").unwrap();
        assert_eq!(r.rm[good], vec![1.0, 1.0]);
        assert_eq!(r.rm[bad], vec![2.0, 2.0]);
        assert_eq!((r.rc[good], r.rc[bad]), (1.0, 2.0));
    }

    #[test]
    fn tie_rule() {
        // Tied on recall, a wins fpr, b wins s.
        let r = rank_methods(&[
            scores("a", "s", &[("recall", 0.7), ("fpr", 0.1), ("s", 0.4)]),
            scores("b", "s", &[("recall", 0.7), ("fpr", 0.2), ("s", 0.5)]),
        ])
        .unwrap();
        assert_eq!(r.rm, vec![vec![(1.5 + 1.0 + 2.0) / 3.0], vec![(1.5 + 2.0 + 1.0) / 3.0]]);
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0], Orientation::LowerIsBetter),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn incomplete_grid_rejected() {
        let err = rank_methods(&[
            scores("a", "s1", &[("recall", 0.7)]),
            scores("b", "s2", &[("recall", 0.7)]),
        ]);
        assert!(matches!(err, Err(GsmError::IncompleteGrid(_))));
    }

    #[test]
    fn report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut s = SequenceScore::default();
        let (p, g) = fixture();
        s.add_frame(&p, &g).unwrap();
        write_report(&path, "gsm", &[("seq".into(), s), (AGGREGATE_SEQUENCE.into(), s)]).unwrap();
        let rows = read_report(&path).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].metrics["pwc"] - 2.0).abs() < 1e-9);
        assert_eq!(rows[0].metrics.len(), 9);
    }

    proptest! {
        #[test]
        fn measure_identities(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500) {
            let c = ConfusionCounts::new(tp, fp, tn, fn_);
            let r = cdnet_measures(&c);
            if tp + fn_ > 0 {
                prop_assert!((r.recall + r.fnr - 1.0).abs() < 1e-12);
            }
            if tn + fp > 0 {
                prop_assert!((r.specificity + r.fpr - 1.0).abs() < 1e-12);
            }
            prop_assert!(r.fmeasure >= r.precision.min(r.recall) - 1e-12);
            prop_assert!(r.fmeasure <= r.precision.max(r.recall) + 1e-12);
            if tp > 0 {
                prop_assert!(r.s <= r.precision.min(r.recall) + 1e-12);
            }
            prop_assert!((0.0..=100.0).contains(&r.pwc));
        }

        #[test]
        fn ranks_invariant_under_monotone_rescale(
            vals in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..6),
        ) {
            let mk = |f: &dyn Fn(f64) -> f64| -> Vec<MethodScores> {
                vals.iter().enumerate()
                    .map(|(i, &(a, b))| scores(&format!("m{i}"), "s", &[("recall", f(a)), ("pwc", f(b))]))
                    .collect()
            };
            let base = rank_methods(&mk(&|v| v)).unwrap();
            let scaled = rank_methods(&mk(&|v| 3.0 * v.powi(3) + 1.0)).unwrap();
            prop_assert_eq!(base, scaled);
        }
    }
}
