use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gsm::frame::{BinaryMask, GtLabel, GtMask, Label};
use gsm::io;

fn gsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = gsm(args);
    assert!(
        out.status.success(),
        "gsm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn err(args: &[&str]) -> String {
    let out = gsm(args);
    assert!(!out.status.success(), "gsm {args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, scenario: &str, seed: &str) -> PathBuf {
    ok(&[
        "synth",
        "--scenario",
        scenario,
        "--seed",
        seed,
        "--out",
        s(dir),
        "--width",
        "40",
        "--height",
        "40",
        "--frames",
        "30",
        "--training-count",
        "20",
    ]);
    dir.join("manifest.txt")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn mask_names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".png"))
        .collect();
    v.sort();
    v
}

#[test]
fn synth_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    synth(&t.path().join("a"), "removed_object", "7");
    synth(&t.path().join("b"), "removed_object", "7");
    let a = files(&t.path().join("a"));
    assert_eq!(a, files(&t.path().join("b")));
    // 30 color + 30 depth + 10 gt + manifest
    assert_eq!(a.len(), 71);
}

#[test]
fn synth_rejects_unknown_scenario() {
    let t = tempfile::tempdir().unwrap();
    let msg = err(&["synth", "--scenario", "volcano", "--seed", "1", "--out", s(t.path())]);
    for name in ["static", "moving_box", "ado_dropout", "bootstrap"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn synth_requires_ten_test_frames() {
    let t = tempfile::tempdir().unwrap();
    let msg = err(&[
        "synth",
        "--scenario",
        "static",
        "--seed",
        "1",
        "--out",
        s(t.path()),
        "--frames",
        "105",
    ]);
    assert!(msg.contains("training_count + 10"), "{msg}");
}

#[test]
fn static_sequence_segments_to_empty_masks() {
    let t = tempfile::tempdir().unwrap();
    let m = synth(&t.path().join("seq"), "static", "2");
    let out = t.path().join("masks");
    ok(&["segment", "--manifest", s(&m), "--out", s(&out)]);
    let names = mask_names(&out);
    assert_eq!(names.len(), 10);
    assert_eq!(names[0], "000020.png");
    for n in &names {
        let mask = io::read_mask(&out.join(n)).unwrap();
        assert_eq!(mask.count(Label::Background), 1600, "{n}");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["n"], 20);
    assert_eq!(meta["config"]["gamma"], 1e-8);
    assert_eq!(meta["config"]["undefined_policy"], "ub");
    assert_eq!(meta["segmented_frames"], 10);
}

#[test]
fn policies_differ_only_on_undefined() {
    let t = tempfile::tempdir().unwrap();
    let m = synth(&t.path().join("seq"), "ado_dropout", "3");
    let (ub, uf, three) = (t.path().join("ub"), t.path().join("uf"), t.path().join("three"));
    ok(&["segment", "--manifest", s(&m), "--out", s(&ub), "--policy", "ub"]);
    ok(&["segment", "--manifest", s(&m), "--out", s(&uf), "--policy", "uf"]);
    ok(&["segment", "--manifest", s(&m), "--out", s(&three), "--three-class"]);
    let mut undefined = 0;
    for n in mask_names(&three) {
        let labels = io::read_mask(&three.join(&n)).unwrap();
        let a = io::read_mask(&ub.join(&n)).unwrap();
        let b = io::read_mask(&uf.join(&n)).unwrap();
        for i in 0..labels.labels.len() {
            let differs = a.labels[i] != b.labels[i];
            assert_eq!(differs, labels.labels[i] == Label::Undefined, "{n} pixel {i}");
        }
        undefined += labels.count(Label::Undefined);
    }
    assert!(undefined > 0);
}

#[test]
fn missing_depth_directory_is_named() {
    let t = tempfile::tempdir().unwrap();
    let m = synth(&t.path().join("seq"), "static", "2");
    fs::remove_dir_all(t.path().join("seq/depth")).unwrap();
    let msg = err(&["segment", "--manifest", s(&m), "--out", s(&t.path().join("o"))]);
    assert!(msg.contains("depth"), "{msg}");
}

fn write_fixture(pred_dir: &Path, gt_dir: &Path) {
    // 1000 px: tp 50, fp 10, tn 930, fn 10.
    fs::create_dir_all(pred_dir).unwrap();
    fs::create_dir_all(gt_dir).unwrap();
    let gt: Vec<GtLabel> = (0..1000)
        .map(|i| {
            if i < 60 {
                GtLabel::Foreground
            } else {
                GtLabel::Background
            }
        })
        .collect();
    let pred: Vec<bool> = (0..1000).map(|i| i < 50 || (60..70).contains(&i)).collect();
    io::write_gt(&GtMask::new(100, 10, gt).unwrap(), &gt_dir.join("000000.png")).unwrap();
    io::write_mask(&BinaryMask::new(100, 10, pred).unwrap(), &pred_dir.join("000000.png")).unwrap();
}

fn report_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        gsm::metrics::REPORT_COLUMNS
    );
    r.records().map(|r| r.unwrap()).collect()
}

#[test]
fn evaluate_fixture_end_to_end() {
    let t = tempfile::tempdir().unwrap();
    let (pred, gt, report) = (t.path().join("pred"), t.path().join("gt"), t.path().join("r.csv"));
    write_fixture(&pred, &gt);
    ok(&["evaluate", "--pred", s(&pred), "--gt", s(&gt), "--report", s(&report)]);
    let rows = report_rows(&report);
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[1][1], "ALL");
    let pwc: f64 = rows[0][11].parse().unwrap();
    assert!((pwc - 2.0).abs() < 1e-4);
    assert_eq!(
        (&rows[0][3], &rows[0][4], &rows[0][5], &rows[0][6]),
        ("50", "10", "930", "10")
    );
}

#[test]
fn evaluate_perfect_masks_nested_layout() {
    let t = tempfile::tempdir().unwrap();
    synth(&t.path().join("data/box"), "moving_box", "4");
    let pred = t.path().join("pred/box");
    fs::create_dir_all(&pred).unwrap();
    for n in mask_names(&t.path().join("data/box/gt")) {
        let gt = io::load_gt(&t.path().join("data/box/gt").join(&n)).unwrap();
        let mask = BinaryMask::new(40, 40, gt.labels.iter().map(|&l| l == GtLabel::Foreground).collect()).unwrap();
        io::write_mask(&mask, &pred.join(&n)).unwrap();
    }
    let report = t.path().join("r.csv");
    ok(&[
        "evaluate",
        "--pred",
        s(&t.path().join("pred")),
        "--gt",
        s(&t.path().join("data")),
        "--report",
        s(&report),
    ]);
    let rows = report_rows(&report);
    assert_eq!(&rows[0][1], "box");
    assert_eq!(&rows[0][13], "1.000000");
}

#[test]
fn evaluate_rejects_empty_and_mismatched() {
    let t = tempfile::tempdir().unwrap();
    let (pred, gt) = (t.path().join("pred"), t.path().join("gt"));
    write_fixture(&pred, &gt);
    let empty = t.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    err(&[
        "evaluate",
        "--pred",
        s(&empty),
        "--gt",
        s(&gt),
        "--report",
        s(&t.path().join("a.csv")),
    ]);
    fs::copy(gt.join("000000.png"), gt.join("000001.png")).unwrap();
    let msg = err(&[
        "evaluate",
        "--pred",
        s(&pred),
        "--gt",
        s(&gt),
        "--report",
        s(&t.path().join("b.csv")),
    ]);
    assert!(msg.contains("differ"), "{msg}");
}

fn report(dir: &Path, method: &str, rows: &[(&str, &str)]) -> PathBuf {
    let path = dir.join(format!("{method}.csv"));
    let mut text = gsm::metrics::REPORT_COLUMNS.join(",");
    text.push('\n');
    for (seq, vals) in rows {
        text.push_str(&format!("{method},{seq},10,1,1,1,1,{vals}\n"));
    }
    fs::write(&path, text).unwrap();
    path
}

const GOOD: &str = "0.9,0.99,0.01,0.1,1.0,0.9,0.9,0.8,0.7";
const BAD: &str = "0.5,0.9,0.1,0.5,9.0,0.5,0.5,0.3,0.2";

#[test]
fn rank_single_report() {
    let t = tempfile::tempdir().unwrap();
    let r = report(t.path(), "a", &[("s1", GOOD), ("s2", BAD)]);
    let out = ok(&["rank", s(&r)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "method,rm_s1,rm_s2,rc");
    assert_eq!(lines[1], "a,1.0000,1.0000,1.0000");
}

#[test]
fn rank_dominated_pair() {
    let t = tempfile::tempdir().unwrap();
    let a = report(t.path(), "a", &[("s1", GOOD), ("s2", GOOD)]);
    let b = report(t.path(), "b", &[("s1", BAD), ("s2", BAD)]);
    let out_path = t.path().join("rank.csv");
    ok(&["rank", s(&a), s(&b), "--out", s(&out_path)]);
    let out = fs::read_to_string(out_path).unwrap();
    assert!(out.contains("a,1.0000,1.0000,1.0000"), "{out}");
    assert!(out.contains("b,2.0000,2.0000,2.0000"), "{out}");
}

#[test]
fn rank_rejects_mismatched_sequences() {
    let t = tempfile::tempdir().unwrap();
    let a = report(t.path(), "a", &[("s1", GOOD)]);
    let b = report(t.path(), "b", &[("s2", BAD)]);
    let msg = err(&["rank", s(&a), s(&b)]);
    assert!(msg.contains("incomplete"), "{msg}");
}
