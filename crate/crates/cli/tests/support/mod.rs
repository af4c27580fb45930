//! Runs CLI commands in-process and drives the toy pipeline.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use zhnp_cli::Cli;

pub fn toy(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy").join(file)
}

pub fn zhnp(args: &[&str]) -> anyhow::Result<()> {
    let cli = Cli::try_parse_from(std::iter::once("zhnp").chain(args.iter().copied()))?;
    zhnp_cli::run(&cli)
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

pub const SPLIT_SEED: &str = "7";

/// `align` → `extract` → `match` → `annotate` → `split` → `train` →
/// `predict` → `evaluate` for both model kinds, all under `dir`.
pub fn run_pipeline(dir: &Path) -> anyhow::Result<()> {
    let corpus = toy("corpus.jsonl");
    let c = s(&corpus);
    let p = |f: &str| dir.join(f);
    zhnp(&["align", "--corpus", c, "--out", s(&p("align")), "--iterations", "15"])?;
    zhnp(&["extract", "--corpus", c, "--out", s(&p("nps.jsonl"))])?;
    zhnp(&[
        "match",
        "--corpus",
        c,
        "--nps",
        s(&p("nps.jsonl")),
        "--alignments-e2z",
        s(&p("align/align.e2z.txt")),
        "--alignments-z2e",
        s(&p("align/align.z2e.txt")),
        "--out",
        s(&p("matches.jsonl")),
    ])?;
    zhnp(&[
        "annotate",
        "--corpus",
        c,
        "--matches",
        s(&p("matches.jsonl")),
        "--out",
        s(&p("dataset.jsonl")),
    ])?;
    zhnp(&[
        "split",
        "--dataset",
        s(&p("dataset.jsonl")),
        "--out",
        s(&p("split.jsonl")),
        "--seed",
        SPLIT_SEED,
    ])?;
    for kind in ["logistic", "linear-svm"] {
        let model = p(&format!("model.{kind}.json"));
        let preds = p(&format!("pred.{kind}.jsonl"));
        zhnp(&[
            "train",
            "--dataset",
            s(&p("split.jsonl")),
            "--corpus",
            c,
            "--task",
            "plurality",
            "--model-kind",
            kind,
            "--seed",
            "1",
            "--out",
            s(&model),
        ])?;
        zhnp(&[
            "predict",
            "--model",
            s(&model),
            "--dataset",
            s(&p("split.jsonl")),
            "--corpus",
            c,
            "--out",
            s(&preds),
        ])?;
        zhnp(&[
            "evaluate",
            "--dataset",
            s(&p("split.jsonl")),
            "--predictions",
            s(&preds),
            "--majority-baseline",
            "--out",
            s(&p(&format!("eval.{kind}.json"))),
        ])?;
    }
    Ok(())
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, d: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in fs::read_dir(d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}
