//! Test fixtures and brute-force reference implementations shared by the
//! integration tests (the CLI acceptance suite includes this file too).
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zhnp::corpus::{Definiteness, NPSpan, ParallelSentence, Plurality, Side};
use zhnp::tree::ParseTree;

pub fn toy_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy")
}

fn leaves_and_tags(tree: &str) -> (Vec<String>, Vec<String>) {
    let t = ParseTree::parse(tree).expect("fixture tree parses");
    let toks = t.leaves().iter().map(|l| l.token.clone()).collect();
    let tags = t.tags().iter().map(|s| s.to_string()).collect();
    (toks, tags)
}

/// Sentence pair built from two bracketed trees.
pub fn sentence(id: &str, doc: &str, position: u64, en_tree: &str, zh_tree: &str) -> ParallelSentence {
    let (en_tokens, en_pos) = leaves_and_tags(en_tree);
    let (zh_tokens, zh_pos) = leaves_and_tags(zh_tree);
    ParallelSentence {
        id: id.into(),
        doc_id: doc.into(),
        position,
        en_tokens,
        en_pos,
        en_tree: en_tree.into(),
        zh_tokens,
        zh_pos,
        zh_tree: zh_tree.into(),
    }
}

/// Sentence pair from plain token lists with flat trees.
pub fn flat_sentence(id: &str, en: &[String], zh: &[String]) -> ParallelSentence {
    let tree = |ws: &[String]| {
        format!(
            "(S {})",
            ws.iter().map(|w| format!("(X {w})")).collect::<Vec<_>>().join(" ")
        )
    };
    ParallelSentence {
        id: id.into(),
        doc_id: "d".into(),
        position: 0,
        en_tokens: en.to_vec(),
        en_pos: vec!["X".into(); en.len()],
        en_tree: tree(en),
        zh_tokens: zh.to_vec(),
        zh_pos: vec!["X".into(); zh.len()],
        zh_tree: tree(zh),
    }
}

// ---------------------------------------------------------------- matching

pub fn span(side: Side, start: usize, end: usize) -> NPSpan {
    NPSpan {
        side,
        start,
        end,
        head: end - 1,
        node_path: vec![],
        is_pronoun: false,
        is_conjunction: false,
        is_proper: false,
    }
}

/// Best target for `src` by exhaustive counting: most links, then the
/// shorter span, then the leftmost.
fn oracle_best(src: &NPSpan, tgts: &[NPSpan], links: &BTreeSet<(usize, usize)>) -> Option<usize> {
    let overlaps: Vec<usize> = tgts
        .iter()
        .map(|t| {
            links
                .iter()
                .filter(|&&(i, j)| src.start <= i && i < src.end && t.start <= j && j < t.end)
                .count()
        })
        .collect();
    let top = *overlaps.iter().max()?;
    if top == 0 {
        return None;
    }
    (0..tgts.len())
        .filter(|&k| overlaps[k] == top)
        .min_by_key(|&k| (tgts[k].end - tgts[k].start, tgts[k].start))
}

pub type SpanPair = ((usize, usize), (usize, usize));

/// Mutually best (en, zh) pairs. `z2e` links are `(zh, en)`.
pub fn oracle_matches(
    en: &[NPSpan],
    zh: &[NPSpan],
    e2z: &BTreeSet<(usize, usize)>,
    z2e: &BTreeSet<(usize, usize)>,
) -> BTreeSet<SpanPair> {
    let mut out = BTreeSet::new();
    for (ei, e) in en.iter().enumerate() {
        let Some(zi) = oracle_best(e, zh, e2z) else { continue };
        if oracle_best(&zh[zi], en, z2e) == Some(ei) {
            out.insert(((e.start, e.end), (zh[zi].start, zh[zi].end)));
        }
    }
    out
}

/// Filtering applied to oracle pairs, written against flags looked up by
/// span coordinates.
pub fn oracle_filter(pairs: &BTreeSet<SpanPair>, en: &[NPSpan], zh: &[NPSpan]) -> BTreeSet<SpanPair> {
    let find =
        |nps: &[NPSpan], (s, e): (usize, usize)| nps.iter().find(|n| n.start == s && n.end == e).cloned().unwrap();
    let inside = |a: (usize, usize), b: (usize, usize)| b.0 <= a.0 && a.1 <= b.1 && (b.1 - b.0) > (a.1 - a.0);
    let stage1: Vec<SpanPair> = pairs
        .iter()
        .copied()
        .filter(|&(e, z)| !find(en, e).is_conjunction && !find(zh, z).is_conjunction)
        .collect();
    stage1
        .iter()
        .copied()
        .filter(|&(e, z)| !stage1.iter().any(|&(oe, oz)| inside(e, oe) || inside(z, oz)))
        .filter(|&(e, z)| !find(en, e).is_pronoun && !find(zh, z).is_pronoun)
        .collect()
}

pub struct MatchInstance {
    pub en: Vec<NPSpan>,
    pub zh: Vec<NPSpan>,
    pub e2z: BTreeSet<(usize, usize)>,
    pub z2e: BTreeSet<(usize, usize)>,
}

fn random_spans(rng: &mut ChaCha8Rng, side: Side, len: usize, max: usize) -> Vec<NPSpan> {
    let mut seen = BTreeSet::new();
    let want = rng.gen_range(0..=max);
    for _ in 0..want * 4 {
        if seen.len() == want {
            break;
        }
        let s = rng.gen_range(0..len);
        let e = rng.gen_range(s + 1..=len);
        seen.insert((s, e));
    }
    seen.into_iter()
        .map(|(s, e)| {
            let mut sp = span(side, s, e);
            sp.is_pronoun = e - s == 1 && rng.gen_bool(0.15);
            sp.is_conjunction = e - s >= 3 && rng.gen_bool(0.1);
            sp
        })
        .collect()
}

/// Random sentence: up to 20 tokens and 8 NPs per side.
pub fn random_instance(seed: u64) -> MatchInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ne, nz) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
    let density: f64 = rng.gen_range(0.02..0.3);
    let mut e2z = BTreeSet::new();
    let mut z2e = BTreeSet::new();
    for i in 0..ne {
        for j in 0..nz {
            if rng.gen_bool(density) {
                e2z.insert((i, j));
            }
            if rng.gen_bool(density) {
                z2e.insert((j, i));
            }
        }
    }
    MatchInstance {
        en: random_spans(&mut rng, Side::En, ne, 8),
        zh: random_spans(&mut rng, Side::Zh, nz, 8),
        e2z,
        z2e,
    }
}

// ---------------------------------------------------------------- alignment

/// Synthetic parallel corpus over a 50-word one-to-one dictionary. Each
/// Chinese sentence is a shuffled word-by-word translation. Returns the
/// pairs and, for each pair, the gold `(en, zh)` links.
pub fn bijective_corpus(pairs: usize, seed: u64) -> (Vec<ParallelSentence>, Vec<BTreeSet<(usize, usize)>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let en_vocab: Vec<String> = (0..50).map(|i| format!("w{i:02}")).collect();
    let zh_vocab: Vec<String> = (0..50).map(|i| format!("词{i:02}")).collect();
    let mut corpus = Vec::new();
    let mut gold = Vec::new();
    for p in 0..pairs {
        let len = rng.gen_range(4..=10);
        let words: Vec<usize> = rand::seq::index::sample(&mut rng, 50, len).into_vec();
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(&mut rng);
        // zh position k holds the translation of en position order[k]
        let en: Vec<String> = words.iter().map(|&w| en_vocab[w].clone()).collect();
        let zh: Vec<String> = order.iter().map(|&i| zh_vocab[words[i]].clone()).collect();
        gold.push(order.iter().enumerate().map(|(k, &i)| (i, k)).collect());
        corpus.push(flat_sentence(&format!("b{p}"), &en, &zh));
    }
    (corpus, gold)
}

// ---------------------------------------------------------------- projection

/// English NP fixtures: (tree, plural?, definite?). The outermost NP of
/// each tree is labelled.
pub const PROJECTION_FIXTURES: &[(&str, bool, bool)] = &[
    ("(NP (DT the) (NN dog))", false, true),
    ("(NP (DT The) (NN cat))", false, true),
    ("(NP (DT the) (NNS dogs))", true, true),
    ("(NP (NNS dogs))", true, false),
    ("(NP (DT a) (NN dog))", false, false),
    ("(NP (CD one) (NN dog))", false, false),
    ("(NP (CD two) (NNS dogs))", true, false),
    (
        "(NP (NP (CD two) (NNS cups)) (PP (IN of) (NP (NN coffee))))",
        true,
        false,
    ),
    ("(NP (CD 3) (NN kilo))", true, false),
    ("(NP (CD 1,000) (NN yuan))", true, false),
    ("(NP (CD 1) (NN hour))", false, false),
    ("(NP (NNP John))", false, true),
    ("(NP (NNP New) (NNP York))", false, true),
    ("(NP (NNPS Americans))", true, true),
    ("(NP (DT this) (NN book))", false, true),
    ("(NP (DT that) (NN idea))", false, true),
    ("(NP (DT these) (NNS books))", true, true),
    ("(NP (DT those) (NNS books))", true, true),
    ("(NP (DT some) (NN water))", false, false),
    ("(NP (JJ many) (NNS people))", true, false),
    ("(NP (DT a) (NN couple))", false, false),
    ("(NP (PRP$ my) (NN book))", false, false),
    (
        "(NP (NP (NN owner)) (PP (IN of) (NP (DT the) (NN house))))",
        false,
        true,
    ),
    (
        "(NP (NP (NN man)) (SBAR (WHNP (WDT that)) (S (VP (VBD left)))))",
        false,
        false,
    ),
];

pub fn labels(plural: bool, definite: bool) -> (Plurality, Definiteness) {
    (
        if plural { Plurality::Plural } else { Plurality::Singular },
        if definite {
            Definiteness::Definite
        } else {
            Definiteness::Indefinite
        },
    )
}

// ---------------------------------------------------------------- metrics

/// Precision, recall and F1 of one class, straight from the definitions.
pub fn hand_prf(counts: &[Vec<u64>], c: usize) -> (f64, f64, f64) {
    let tp = counts[c][c] as f64;
    let pred: f64 = counts.iter().map(|r| r[c] as f64).sum();
    let gold: f64 = counts[c].iter().map(|&v| v as f64).sum();
    let p = if pred > 0.0 { tp / pred } else { 0.0 };
    let r = if gold > 0.0 { tp / gold } else { 0.0 };
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f)
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

// ---------------------------------------------------------------- agreement

use std::collections::HashMap;
use zhnp::agreement::DatasetLabels;
use zhnp::corpus::{Answer, AssessmentRecord, Judgment};

pub fn a1(item: &str, annotator: &str, np: Answer, pl: Answer, def: Answer) -> AssessmentRecord {
    AssessmentRecord {
        item_id: item.into(),
        annotator_id: annotator.into(),
        judgment: Judgment::A1 {
            np_ok: np,
            plurality_ok: pl,
            definiteness_ok: def,
        },
        timestamp: 1_700_000_000,
    }
}

/// Ten items, all plural-definite in the dataset. On plurality both
/// annotators accept items 0-7, one accepts item 8 and neither accepts
/// item 9. Every NP and definiteness answer is yes.
pub fn a1_fixture() -> (Vec<AssessmentRecord>, HashMap<String, DatasetLabels>) {
    use Answer::{No, Yes};
    let mut records = Vec::new();
    let mut dataset = HashMap::new();
    for i in 0..10 {
        let item = format!("item{i}");
        let (x, y) = match i {
            0..=7 => (Yes, Yes),
            8 => (Yes, No),
            _ => (No, No),
        };
        records.push(a1(&item, "ann-a", Yes, x, Yes));
        records.push(a1(&item, "ann-b", Yes, y, Yes));
        dataset.insert(
            item,
            DatasetLabels {
                plurality: Plurality::Plural,
                definiteness: Definiteness::Definite,
            },
        );
    }
    (records, dataset)
}
