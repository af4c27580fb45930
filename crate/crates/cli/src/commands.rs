use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use zhnp::agreement::{score_records, AgreementReport, DatasetLabels};
use zhnp::align::{read_pharaoh_file, viterbi_align, write_pharaoh_file, Model1Trainer, TrainingReport};
use zhnp::analysis::{
    annotate_chinese, corpus_stats, men_suffix_nps, split_dataset, CorpusStats, MenExclusions, MenReport,
};
use zhnp::assessment::SessionStore;
use zhnp::classifier::{build_context, train, tune_l2, CorpusIndex, LinearModel, MarkedInstance, Task, TrainConfig};
use zhnp::corpus::{load_corpus, open_jsonl, read_dataset, write_dataset, write_jsonl};
use zhnp::eval::{merge_binary, subset_eval, MetricReport, PredictionLine, PredictionSet, Scores, SubsetReport};
use zhnp::hashing::keep_sample;
use zhnp::matcher::{match_sentence, MatchRecord};
use zhnp::projection::{LabelProjector, ProjectorSettings};
use zhnp::tree::SentenceNps;
use zhnp::{AlignmentSet, AnnotatedNP, AssessmentRecord, Definiteness, Direction, ParallelSentence, Plurality, Split};

use crate::args::*;
use crate::meta::{write_json, Meta};
use crate::server;

pub const E2Z_FILE: &str = "align.e2z.txt";
pub const Z2E_FILE: &str = "align.z2e.txt";

fn lengths(corpus: &[ParallelSentence], dir: Direction) -> Vec<(usize, usize)> {
    corpus.iter().map(|p| dir.lengths(p)).collect()
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct DirectionSummary {
    direction: Direction,
    training: Option<TrainingReport>,
    links: usize,
    oov_tokens: usize,
}

pub fn align(a: &AlignArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus).context("loading corpus")?;
    fs::create_dir_all(&a.out)?;
    let mut meta = Meta::new(
        "align",
        json!({ "iterations": a.iterations, "ingest": a.alignments_e2z.is_some() }),
    )
    .input("corpus", &a.corpus)?;
    let (e2z, z2e, summaries) = match (&a.alignments_e2z, &a.alignments_z2e) {
        (Some(e), Some(z)) => {
            meta = meta.input("alignments_e2z", e)?.input("alignments_z2e", z)?;
            let e2z = read_pharaoh_file(e, Direction::EnToZh, &lengths(&corpus, Direction::EnToZh))
                .with_context(|| format!("reading {}", e.display()))?;
            let z2e = read_pharaoh_file(z, Direction::ZhToEn, &lengths(&corpus, Direction::ZhToEn))
                .with_context(|| format!("reading {}", z.display()))?;
            let summaries = [(Direction::EnToZh, &e2z), (Direction::ZhToEn, &z2e)]
                .into_iter()
                .map(|(direction, sets)| DirectionSummary {
                    direction,
                    training: None,
                    links: sets.iter().map(AlignmentSet::len).sum(),
                    oov_tokens: 0,
                })
                .collect();
            (e2z, z2e, summaries)
        }
        _ => {
            let trainer = Model1Trainer::new(a.iterations);
            let run = |dir: Direction| -> Result<(Vec<AlignmentSet>, DirectionSummary)> {
                let (table, report) = trainer.train(&corpus, dir)?;
                table.write(a.out.join(format!("model1.{dir}.ttable")))?;
                let aligned: Vec<(AlignmentSet, usize)> = corpus.par_iter().map(|p| viterbi_align(&table, p)).collect();
                let oov_tokens = aligned.iter().map(|(_, o)| o).sum();
                let sets: Vec<AlignmentSet> = aligned.into_iter().map(|(s, _)| s).collect();
                let summary = DirectionSummary {
                    direction: dir,
                    links: sets.iter().map(AlignmentSet::len).sum(),
                    training: Some(report),
                    oov_tokens,
                };
                Ok((sets, summary))
            };
            let (fwd, back) = rayon::join(|| run(Direction::EnToZh), || run(Direction::ZhToEn));
            let ((e2z, s1), (z2e, s2)) = (fwd?, back?);
            (e2z, z2e, vec![s1, s2])
        }
    };
    write_pharaoh_file(&e2z, a.out.join(E2Z_FILE))?;
    write_pharaoh_file(&z2e, a.out.join(Z2E_FILE))?;
    let mut value = serde_json::to_value(&meta)?;
    value["directions"] = serde_json::to_value(&summaries)?;
    write_json(&a.out.join("align.meta.json"), &value)?;
    for s in &summaries {
        info!("{}: {} links", s.direction, s.links);
    }
    println!("aligned {} sentence pairs -> {}", corpus.len(), a.out.display());
    Ok(())
}

pub fn extract(a: &ExtractArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus).context("loading corpus")?;
    let nps: Vec<SentenceNps> = corpus
        .par_iter()
        .map(|p| SentenceNps::extract(p).with_context(|| format!("sentence {}", p.id)))
        .collect::<Result<_>>()?;
    ensure_parent(&a.out)?;
    write_jsonl(&nps, &a.out)?;
    Meta::new("extract", json!({}))
        .input("corpus", &a.corpus)?
        .write_beside(&a.out)?;
    let (en, zh): (usize, usize) = nps.iter().fold((0, 0), |(e, z), s| (e + s.en.len(), z + s.zh.len()));
    println!(
        "extracted {en} English and {zh} Chinese NPs from {} pairs",
        corpus.len()
    );
    Ok(())
}

fn read_nps(path: &Path, corpus: &[ParallelSentence]) -> Result<Vec<SentenceNps>> {
    let mut out = Vec::with_capacity(corpus.len());
    for item in open_jsonl::<SentenceNps>(path)? {
        let (line, nps) = item?;
        let Some(pair) = corpus.get(out.len()) else {
            bail!("{}: line {line}: more NP lines than corpus sentences", path.display());
        };
        ensure!(
            pair.id == nps.sent_id,
            "{}: line {line}: sentence {} where the corpus has {}",
            path.display(),
            nps.sent_id,
            pair.id
        );
        for span in nps.en.iter().chain(&nps.zh) {
            let len = pair.tokens(span.side).len();
            ensure!(
                span.start < span.end && span.end <= len && span.head >= span.start && span.head < span.end,
                "{}: line {line}: span [{}, {}) head {} invalid for a {len}-token sentence",
                path.display(),
                span.start,
                span.end,
                span.head
            );
        }
        out.push(nps);
    }
    ensure!(
        out.len() == corpus.len(),
        "{} has {} lines for {} sentences",
        path.display(),
        out.len(),
        corpus.len()
    );
    Ok(out)
}

pub fn match_cmd(a: &MatchArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus).context("loading corpus")?;
    let nps = read_nps(&a.nps, &corpus)?;
    let e2z = read_pharaoh_file(
        &a.alignments_e2z,
        Direction::EnToZh,
        &lengths(&corpus, Direction::EnToZh),
    )
    .with_context(|| format!("reading {}", a.alignments_e2z.display()))?;
    let z2e = read_pharaoh_file(
        &a.alignments_z2e,
        Direction::ZhToEn,
        &lengths(&corpus, Direction::ZhToEn),
    )
    .with_context(|| format!("reading {}", a.alignments_z2e.display()))?;
    let records: Vec<MatchRecord> = nps
        .par_iter()
        .zip(e2z.par_iter().zip(z2e.par_iter()))
        .flat_map_iter(|(s, (f, b))| {
            match_sentence(&s.en, &s.zh, f, b).into_iter().map(|m| MatchRecord {
                sent_id: s.sent_id.clone(),
                m,
            })
        })
        .collect();
    ensure_parent(&a.out)?;
    write_jsonl(&records, &a.out)?;
    Meta::new("match", json!({}))
        .input("corpus", &a.corpus)?
        .input("nps", &a.nps)?
        .input("alignments_e2z", &a.alignments_e2z)?
        .input("alignments_z2e", &a.alignments_z2e)?
        .write_beside(&a.out)?;
    println!("{} matched NP pairs", records.len());
    Ok(())
}

fn men_exclusions(path: Option<&Path>) -> Result<MenExclusions> {
    match path {
        Some(p) => MenExclusions::from_file(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(MenExclusions::default()),
    }
}

pub fn annotate(a: &AnnotateArgs) -> Result<()> {
    ensure!((0.0..=1.0).contains(&a.sample_rate), "--sample-rate must lie in [0, 1]");
    let corpus = load_corpus(&a.corpus).context("loading corpus")?;
    let by_id: HashMap<&str, &ParallelSentence> = corpus.iter().map(|p| (p.id.as_str(), p)).collect();
    let projector = LabelProjector::from_settings(&ProjectorSettings {
        possessive_definite: a.possessive_definite,
        number_lexicon_path: a.number_lexicon.clone(),
    })?;
    let exclusions = men_exclusions(a.men_exclusions.as_deref())?;
    let matches: Vec<(usize, MatchRecord)> = open_jsonl::<MatchRecord>(&a.matches)?.collect::<zhnp::Result<_>>()?;
    let mut dataset: Vec<AnnotatedNP> = matches
        .par_iter()
        .filter(|(_, r)| keep_sample(a.seed, &r.sent_id, a.sample_rate))
        .map(|(line, r)| {
            let pair = by_id
                .get(r.sent_id.as_str())
                .ok_or_else(|| anyhow!("{}: line {line}: unknown sentence {}", a.matches.display(), r.sent_id))?;
            let mut np = projector.project(&r.m, pair);
            annotate_chinese(&mut np, pair, &exclusions);
            Ok(np)
        })
        .collect::<Result<_>>()?;
    dataset.sort_by(|x, y| {
        (&x.sent_id, x.zh_span.start, x.zh_span.end).cmp(&(&y.sent_id, y.zh_span.start, y.zh_span.end))
    });
    ensure_parent(&a.out)?;
    write_dataset(&dataset, &a.out)?;
    let mut meta = Meta::new(
        "annotate",
        json!({
            "sample_rate": a.sample_rate,
            "possessive_definite": a.possessive_definite,
        }),
    )
    .seed(a.seed)
    .input("corpus", &a.corpus)?
    .input("matches", &a.matches)?;
    if let Some(p) = &a.number_lexicon {
        meta = meta.input("number_lexicon", p)?;
    }
    if let Some(p) = &a.men_exclusions {
        meta = meta.input("men_exclusions", p)?;
    }
    meta.write_beside(&a.out)?;
    println!("{} annotated NPs", dataset.len());
    Ok(())
}

#[derive(Debug, Serialize)]
struct StatsReport {
    meta: Meta,
    stats: CorpusStats,
    men_suffix: MenReport,
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let dataset = read_dataset(&a.dataset)?;
    let stats = corpus_stats(&dataset);
    let (_, men) = men_suffix_nps(&dataset, &men_exclusions(a.men_exclusions.as_deref())?);
    let report = StatsReport {
        meta: Meta::new("stats", json!({})).input("dataset", &a.dataset)?,
        stats,
        men_suffix: men,
    };
    match &a.out {
        Some(out) => {
            ensure_parent(out)?;
            write_json(out, &report)?;
            print_stats(&report.stats);
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map_or("n/a".into(), |v| format!("{:.2}%", 100.0 * v))
}

fn print_stats(s: &CorpusStats) {
    println!("split\ttotal\tsingular\tplural\tdefinite\tindefinite");
    for (name, c) in [
        ("train", &s.splits.train),
        ("dev", &s.splits.dev),
        ("test", &s.splits.test),
        ("all", &s.overall),
    ] {
        println!(
            "{name}\t{}\t{}\t{}\t{}\t{}",
            c.total, c.singular, c.plural, c.definite, c.indefinite
        );
    }
    println!(
        "explicit plural {} / definite {} of NPs; 们 NPs {} (singular {}, indefinite {})",
        fmt_rate(s.explicit_plural_rate),
        fmt_rate(s.explicit_definite_rate),
        s.men_count,
        fmt_rate(s.men_singular_rate),
        fmt_rate(s.men_indefinite_rate)
    );
}

pub fn split(a: &SplitArgs) -> Result<()> {
    let mut dataset = read_dataset(&a.dataset)?;
    split_dataset(&mut dataset, a.ratios, a.seed);
    ensure_parent(&a.out)?;
    write_dataset(&dataset, &a.out)?;
    Meta::new("split", json!({ "ratios": a.ratios.to_string() }))
        .seed(a.seed)
        .input("dataset", &a.dataset)?
        .write_beside(&a.out)?;
    let count = |s: Split| dataset.iter().filter(|np| np.split == s).count();
    println!(
        "train {} / dev {} / test {}",
        count(Split::Train),
        count(Split::Dev),
        count(Split::Test)
    );
    Ok(())
}

impl ModelArgs {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
            min_freq: self.min_freq,
            orders: self.orders.clone(),
            normalize: !self.no_normalize,
            seed: self.seed,
        }
    }
}

fn split_matches(choice: SplitChoice, split: Split) -> bool {
    match choice {
        SplitChoice::All => true,
        SplitChoice::Train => split == Split::Train,
        SplitChoice::Dev => split == Split::Dev,
        SplitChoice::Test => split == Split::Test,
    }
}

/// Marked instances for the records in one split, in dataset order.
pub fn instances(
    dataset: &[AnnotatedNP],
    index: &CorpusIndex,
    task: Task,
    k: usize,
    choice: SplitChoice,
) -> Result<Vec<MarkedInstance>> {
    dataset
        .par_iter()
        .filter(|np| split_matches(choice, np.split))
        .map(|np| Ok(build_context(np, index, k, task.gold(np))?))
        .collect()
}

fn load_index(path: &Path) -> Result<CorpusIndex> {
    Ok(CorpusIndex::new(load_corpus(path).context("loading corpus")?))
}

pub fn train_cmd(a: &TrainArgs) -> Result<()> {
    let dataset = read_dataset(&a.dataset)?;
    let index = load_index(&a.corpus)?;
    let m = &a.model;
    let train_set = instances(&dataset, &index, m.task, m.k, SplitChoice::Train)?;
    ensure!(
        !train_set.is_empty(),
        "no train-split records in {}; run `split` first",
        a.dataset.display()
    );
    let config = m.train_config();
    let model = match &a.l2_grid {
        Some(grid) => {
            let dev = instances(&dataset, &index, m.task, m.k, SplitChoice::Dev)?;
            ensure!(!dev.is_empty(), "--l2-grid needs dev-split records");
            let (model, trace) = tune_l2(&train_set, &dev, m.task, m.model_kind, &config, grid)?;
            for (l2, f1) in trace {
                println!("l2 {l2:e}\tdev macro-F1 {f1:.4}");
            }
            model
        }
        None => train(&train_set, m.task, m.model_kind, &config)?,
    };
    ensure_parent(&a.out)?;
    model.save(&a.out)?;
    Meta::new(
        "train",
        json!({ "config": model.config, "task": m.task, "model_kind": m.model_kind, "k": m.k }),
    )
    .seed(m.seed)
    .input("dataset", &a.dataset)?
    .input("corpus", &a.corpus)?
    .write_beside(&a.out)?;
    let correct = train_set.iter().filter(|i| model.predict(i).label == i.label).count();
    println!(
        "{} {} model: {} features, final loss {:.6}, train accuracy {:.4}",
        m.task,
        m.model_kind,
        model.vocabulary.len(),
        model.final_loss,
        correct as f64 / train_set.len() as f64
    );
    Ok(())
}

pub fn prediction_lines(model: &LinearModel, insts: &[MarkedInstance]) -> Vec<PredictionLine> {
    insts
        .par_iter()
        .map(|inst| {
            let p = model.predict(inst);
            PredictionLine {
                id: inst.id.clone(),
                task: model.task,
                label: p.label,
                scores: Some(model.classes.iter().cloned().zip(p.scores).collect()),
            }
        })
        .collect()
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let model = LinearModel::load(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let dataset = read_dataset(&a.dataset)?;
    let index = load_index(&a.corpus)?;
    let insts = instances(&dataset, &index, model.task, model.context_size, a.split)?;
    let lines = prediction_lines(&model, &insts);
    ensure_parent(&a.out)?;
    write_jsonl(&lines, &a.out)?;
    Meta::new("predict", json!({ "split": format!("{:?}", a.split).to_lowercase() }))
        .input("model", &a.model)?
        .input("dataset", &a.dataset)?
        .input("corpus", &a.corpus)?
        .write_beside(&a.out)?;
    println!("{} predictions", lines.len());
    Ok(())
}

fn explicit_mask(task: Task, np: &AnnotatedNP) -> bool {
    match task {
        Task::Plurality => np.explicit_plural,
        Task::Definiteness => np.explicit_definite,
        Task::Fourway => np.explicit_plural || np.explicit_definite,
    }
}

fn majority_label(dataset: &[AnnotatedNP], task: Task) -> Result<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for np in dataset.iter().filter(|np| np.split == Split::Train) {
        *counts.entry(task.gold(np)).or_default() += 1;
    }
    // ties go to the earliest class in task order
    let mut best: Option<(String, usize)> = None;
    for c in task.classes() {
        let n = counts.get(c.as_str()).copied().unwrap_or(0);
        if n > 0 && best.as_ref().is_none_or(|(_, b)| n > *b) {
            best = Some((c, n));
        }
    }
    best.map(|(c, _)| c)
        .ok_or_else(|| anyhow!("the majority baseline needs train-split records"))
}

#[derive(Debug, Serialize)]
struct EvaluationReport {
    meta: Meta,
    task: Task,
    report: MetricReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    components: Option<BTreeMap<String, MetricReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subsets: Option<SubsetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    majority_baseline: Option<MetricReport>,
}

fn score(task: Task, gold: &HashMap<&str, &AnnotatedNP>, preds: &BTreeMap<String, String>) -> Result<MetricReport> {
    let mut golds = Vec::with_capacity(preds.len());
    for id in preds.keys() {
        let np = gold
            .get(id.as_str())
            .ok_or_else(|| anyhow!("prediction for unknown id {id}"))?;
        golds.push(task.gold(np));
    }
    let predicted: Vec<&str> = preds.values().map(String::as_str).collect();
    Ok(MetricReport::compute(task, &golds, &predicted)?)
}

fn typed<T: std::str::FromStr<Err = zhnp::Error>>(set: &PredictionSet) -> Result<BTreeMap<String, T>> {
    set.labels
        .iter()
        .map(|(id, l)| Ok((id.clone(), l.parse::<T>()?)))
        .collect()
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let dataset = read_dataset(&a.dataset)?;
    let gold: HashMap<&str, &AnnotatedNP> = dataset.iter().map(|np| (np.id.as_str(), np)).collect();
    let mut meta = Meta::new(
        "evaluate",
        json!({ "merge_binary": a.merge_binary, "subset": a.subset.map(|s| format!("{s:?}").to_lowercase()) }),
    )
    .input("dataset", &a.dataset)?;
    let mut sets = Vec::new();
    for (i, p) in a.predictions.iter().enumerate() {
        sets.push(zhnp::eval::import_predictions(p).with_context(|| format!("importing {}", p.display()))?);
        meta = meta.input(&format!("predictions_{i}"), p)?;
    }
    let (task, labels, components) = if a.merge_binary {
        ensure!(sets.len() == 2, "--merge-binary needs exactly two prediction files");
        let find = |t: Task| {
            sets.iter()
                .find(|s| s.task == Some(t))
                .ok_or_else(|| anyhow!("--merge-binary needs a {t} prediction file"))
        };
        let (pl, de) = (find(Task::Plurality)?, find(Task::Definiteness)?);
        let merged = merge_binary(&typed::<Plurality>(pl)?, &typed::<Definiteness>(de)?)?;
        let components = BTreeMap::from([
            ("plurality".to_string(), score(Task::Plurality, &gold, &pl.labels)?),
            (
                "definiteness".to_string(),
                score(Task::Definiteness, &gold, &de.labels)?,
            ),
        ]);
        let labels: BTreeMap<String, String> = merged.into_iter().map(|(id, l)| (id, l.to_string())).collect();
        (Task::Fourway, labels, Some(components))
    } else {
        ensure!(sets.len() == 1, "pass one prediction file, or two with --merge-binary");
        let set = sets.pop().expect("one set");
        let task = set.task.ok_or_else(|| anyhow!("prediction file is empty"))?;
        (task, set.labels, None)
    };

    let report = score(task, &gold, &labels)?;
    let subsets = match a.subset {
        None => None,
        Some(choice) => {
            let golds: Vec<&str> = labels.keys().map(|id| task.gold(gold[id.as_str()])).collect();
            let preds: Vec<&str> = labels.values().map(String::as_str).collect();
            let mask: Vec<bool> = labels.keys().map(|id| explicit_mask(task, gold[id.as_str()])).collect();
            let mut r = subset_eval(task, &golds, &preds, &mask)?;
            match choice {
                SubsetChoice::Explicit => r.implicit = None,
                SubsetChoice::Implicit => r.explicit = None,
                SubsetChoice::Both => {}
            }
            Some(r)
        }
    };
    let majority_baseline = if a.majority_baseline {
        let label = majority_label(&dataset, task)?;
        let preds: BTreeMap<String, String> = labels.keys().map(|id| (id.clone(), label.clone())).collect();
        Some(score(task, &gold, &preds)?)
    } else {
        None
    };

    ensure_parent(&a.out)?;
    let csv = a.confusion_csv.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    fs::write(&csv, report.confusion_csv())?;
    print_scores(&format!("{task}"), &report);
    if let Some(b) = &majority_baseline {
        print_scores("majority", b);
    }
    let out = EvaluationReport {
        meta,
        task,
        report,
        components,
        subsets,
        majority_baseline,
    };
    write_json(&a.out, &out)?;
    Ok(())
}

fn print_scores(name: &str, r: &MetricReport) {
    let s = |x: &Scores| format!("P {:.4} R {:.4} F1 {:.4}", x.precision, x.recall, x.f1);
    println!(
        "{name}\tn={}\tmacro {}\tweighted {}",
        r.instances,
        s(&r.macro_avg),
        s(&r.weighted)
    );
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub train_instances: usize,
    pub eval_instances: usize,
    pub accuracy: Option<f64>,
    #[serde(rename = "macro")]
    pub macro_avg: Scores,
    pub weighted: Scores,
}

pub fn context_sweep(a: &SweepArgs) -> Result<()> {
    let dataset = read_dataset(&a.dataset)?;
    let index = load_index(&a.corpus)?;
    let m = &a.model;
    let config = m.train_config();
    let rows: Vec<SweepRow> = (0..=a.k_max)
        .into_par_iter()
        .map(|k| {
            let train_set = instances(&dataset, &index, m.task, k, SplitChoice::Train)?;
            let eval_set = instances(&dataset, &index, m.task, k, a.eval_split)?;
            ensure!(
                !train_set.is_empty() && !eval_set.is_empty(),
                "sweep needs both train and evaluation records"
            );
            let model = train(&train_set, m.task, m.model_kind, &config)?;
            let golds: Vec<&str> = eval_set.iter().map(|i| i.label.as_str()).collect();
            let preds: Vec<String> = eval_set.iter().map(|i| model.predict(i).label).collect();
            let r = MetricReport::compute(m.task, &golds, &preds)?;
            Ok(SweepRow {
                k,
                train_instances: train_set.len(),
                eval_instances: eval_set.len(),
                accuracy: r.accuracy,
                macro_avg: r.macro_avg,
                weighted: r.weighted,
            })
        })
        .collect::<Result<_>>()?;
    ensure_parent(&a.out)?;
    let meta = Meta::new(
        "context-sweep",
        json!({ "config": config, "task": m.task, "model_kind": m.model_kind, "k_max": a.k_max }),
    )
    .seed(m.seed)
    .input("dataset", &a.dataset)?
    .input("corpus", &a.corpus)?;
    write_json(&a.out, &json!({ "meta": meta, "rows": rows }))?;
    println!("k\ttrain\teval\taccuracy\tmacro-F1\tweighted-F1");
    for r in &rows {
        println!(
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
            r.k,
            r.train_instances,
            r.eval_instances,
            r.accuracy.unwrap_or(f64::NAN),
            r.macro_avg.f1,
            r.weighted.f1
        );
    }
    Ok(())
}

pub fn assess_score(a: &AssessArgs) -> Result<()> {
    ensure!(!a.records.is_empty(), "pass at least one --records file");
    let dataset = read_dataset(&a.dataset)?;
    let labels: HashMap<String, DatasetLabels> = dataset.iter().map(|np| (np.id.clone(), np.into())).collect();
    let mut meta = Meta::new("assess-score", json!({})).input("dataset", &a.dataset)?;
    let mut records: Vec<AssessmentRecord> = Vec::new();
    for (i, p) in a.records.iter().enumerate() {
        for item in open_jsonl::<AssessmentRecord>(p)? {
            records.push(item.with_context(|| format!("reading {}", p.display()))?.1);
        }
        meta = meta.input(&format!("records_{i}"), p)?;
    }
    let report: AgreementReport = score_records(&records, &labels);
    print!("{}", report.to_table());
    if let Some(out) = &a.out {
        ensure_parent(out)?;
        write_json(out, &json!({ "meta": meta, "report": report }))?;
    }
    Ok(())
}

pub fn serve(a: &ServeArgs) -> Result<()> {
    let dataset = read_dataset(&a.dataset)?;
    let index = load_index(&a.corpus)?;
    let store = SessionStore::open(PathBuf::from(&a.sessions_dir), dataset, index)?;
    let addr = format!("{}:{}", a.host, a.serve_port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(server::serve(store, &addr))
}

pub fn run(cli: &crate::Cli) -> Result<()> {
    match &cli.command {
        Command::Align(a) => align(a),
        Command::Extract(a) => extract(a),
        Command::Match(a) => match_cmd(a),
        Command::Annotate(a) => annotate(a),
        Command::Stats(a) => stats(a),
        Command::Split(a) => split(a),
        Command::Train(a) => train_cmd(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::ContextSweep(a) => context_sweep(a),
        Command::AssessScore(a) => assess_score(a),
        Command::Serve(a) => serve(a),
    }
}
