//! IBM Model 1 trained with EM.
//!
//! Each target word is generated by one source position chosen uniformly
//! from the source words plus a NULL token prepended at position 0.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use super::{normalize, AlignmentSet, Direction};
use crate::corpus::ParallelSentence;
use crate::error::{Error, Result};

pub const NULL_TOKEN: &str = "<NULL>";

/// Lexical translation probabilities `t(target | source)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    pub direction: Direction,
    src_vocab: Vec<String>,
    src_index: HashMap<String, u32>,
    tgt_vocab: Vec<String>,
    tgt_index: HashMap<String, u32>,
    probs: HashMap<(u32, u32), f64>,
}

fn intern(vocab: &mut Vec<String>, index: &mut HashMap<String, u32>, word: String) -> u32 {
    if let Some(&id) = index.get(&word) {
        return id;
    }
    let id = vocab.len() as u32;
    index.insert(word.clone(), id);
    vocab.push(word);
    id
}

impl TranslationTable {
    fn empty(direction: Direction) -> Self {
        let mut t = TranslationTable {
            direction,
            src_vocab: Vec::new(),
            src_index: HashMap::new(),
            tgt_vocab: Vec::new(),
            tgt_index: HashMap::new(),
            probs: HashMap::new(),
        };
        intern(&mut t.src_vocab, &mut t.src_index, NULL_TOKEN.to_string());
        t
    }

    /// `t(target | source)` for surface words; unknown pairs give 0.
    pub fn prob(&self, source: &str, target: &str) -> f64 {
        let s = if source == NULL_TOKEN {
            Some(0)
        } else {
            self.src_index.get(&normalize(self.direction.source(), source)).copied()
        };
        let t = self.tgt_index.get(&normalize(self.direction.target(), target)).copied();
        match (s, t) {
            (Some(s), Some(t)) => self.probs.get(&(s, t)).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Sets an entry directly; used to build tables by hand.
    pub fn set(&mut self, source: &str, target: &str, p: f64) {
        let s = if source == NULL_TOKEN {
            0
        } else {
            intern(
                &mut self.src_vocab,
                &mut self.src_index,
                normalize(self.direction.source(), source),
            )
        };
        let t = intern(
            &mut self.tgt_vocab,
            &mut self.tgt_index,
            normalize(self.direction.target(), target),
        );
        self.probs.insert((s, t), p);
    }

    pub fn from_entries<'a>(direction: Direction, entries: impl IntoIterator<Item = (&'a str, &'a str, f64)>) -> Self {
        let mut t = TranslationTable::empty(direction);
        for (s, w, p) in entries {
            t.set(s, w, p);
        }
        t
    }

    pub fn source_vocab_len(&self) -> usize {
        self.src_vocab.len()
    }

    pub fn target_vocab_len(&self) -> usize {
        self.tgt_vocab.len()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Per-source probability mass, keyed by source word.
    pub fn source_sums(&self) -> BTreeMap<&str, f64> {
        let mut sums = BTreeMap::new();
        for (&(s, _), &p) in &self.probs {
            *sums.entry(self.src_vocab[s as usize].as_str()).or_insert(0.0) += p;
        }
        sums
    }

    /// Entries sorted by `(source, target)` string.
    pub fn entries(&self) -> Vec<(&str, &str, f64)> {
        let mut out: Vec<_> = self
            .probs
            .iter()
            .map(|(&(s, t), &p)| {
                (
                    self.src_vocab[s as usize].as_str(),
                    self.tgt_vocab[t as usize].as_str(),
                    p,
                )
            })
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    /// Writes `src tgt prob` lines after a `#direction` header.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "#direction {}", self.direction)?;
        for (s, t, p) in self.entries() {
            writeln!(out, "{s} {t} {p}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut table: Option<TranslationTable> = None;
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let bad = |reason: String| Error::InvalidRecord {
                line: n + 1,
                id: "translation table".into(),
                reason,
            };
            if let Some(dir) = line.strip_prefix("#direction ") {
                table = Some(TranslationTable::empty(dir.trim().parse()?));
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let t = table.as_mut().ok_or_else(|| bad("missing #direction header".into()))?;
            let fields: Vec<&str> = line.split(' ').collect();
            let [s, w, p] = fields[..] else {
                return Err(bad(format!("expected 'src tgt prob', got {line:?}")));
            };
            let p: f64 = p.parse().map_err(|_| bad(format!("bad probability {p:?}")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(bad(format!("probability {p} outside [0, 1]")));
            }
            t.set(s, w, p);
        }
        table.ok_or_else(|| Error::config("empty translation table file"))
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingReport {
    /// Corpus log-likelihood before training and after each iteration.
    pub log_likelihoods: Vec<f64>,
    pub pairs_used: usize,
    pub skipped_empty: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Model1Trainer {
    pub iterations: usize,
}

/// Interned corpus: for every pair, the table slot of each `(i, j)` cell.
struct Prepared {
    /// `(source ids incl. NULL, slots row-major over [target][source])`
    pairs: Vec<(Vec<u32>, Vec<usize>)>,
    slot_src: Vec<u32>,
    slots: HashMap<(u32, u32), usize>,
    skipped: usize,
}

impl Model1Trainer {
    pub fn new(iterations: usize) -> Self {
        Model1Trainer { iterations }
    }

    pub fn train(
        &self,
        corpus: &[ParallelSentence],
        direction: Direction,
    ) -> Result<(TranslationTable, TrainingReport)> {
        if self.iterations == 0 {
            return Err(Error::config("iterations must be at least 1"));
        }
        let mut table = TranslationTable::empty(direction);
        let prep = prepare(corpus, &mut table)?;
        if prep.skipped > 0 {
            warn!("model 1 {direction}: skipped {} pairs with an empty side", prep.skipped);
        }

        // per-source uniform start over co-occurring targets
        let mut fanout = vec![0usize; table.src_vocab.len()];
        for &s in &prep.slot_src {
            fanout[s as usize] += 1;
        }
        let mut t: Vec<f64> = prep.slot_src.iter().map(|&s| 1.0 / fanout[s as usize] as f64).collect();

        let mut lls = Vec::with_capacity(self.iterations + 1);
        let mut counts = vec![0.0; t.len()];
        let mut totals = vec![0.0; table.src_vocab.len()];
        for _ in 0..self.iterations {
            counts.iter_mut().for_each(|c| *c = 0.0);
            totals.iter_mut().for_each(|c| *c = 0.0);
            let mut ll = 0.0;
            for (src, slots) in &prep.pairs {
                let l1 = src.len();
                for row in slots.chunks_exact(l1) {
                    let denom: f64 = row.iter().map(|&k| t[k]).sum();
                    ll += (denom / l1 as f64).ln();
                    for (&k, &s) in row.iter().zip(src) {
                        let post = t[k] / denom;
                        counts[k] += post;
                        totals[s as usize] += post;
                    }
                }
            }
            lls.push(ll);
            for (k, p) in t.iter_mut().enumerate() {
                *p = counts[k] / totals[prep.slot_src[k] as usize];
            }
        }
        lls.push(log_likelihood(&prep, &t));

        table.probs = prep.slots.iter().map(|(&key, &k)| (key, t[k])).collect();
        let report = TrainingReport {
            log_likelihoods: lls,
            pairs_used: prep.pairs.len(),
            skipped_empty: prep.skipped,
        };
        Ok((table, report))
    }
}

fn prepare(corpus: &[ParallelSentence], table: &mut TranslationTable) -> Result<Prepared> {
    let direction = table.direction;
    let mut prep = Prepared {
        pairs: Vec::new(),
        slot_src: Vec::new(),
        slots: HashMap::new(),
        skipped: 0,
    };
    for pair in corpus {
        let (src_words, tgt_words) = (pair.tokens(direction.source()), pair.tokens(direction.target()));
        if src_words.is_empty() || tgt_words.is_empty() {
            prep.skipped += 1;
            continue;
        }
        let mut src = vec![0u32];
        for w in src_words {
            src.push(intern(
                &mut table.src_vocab,
                &mut table.src_index,
                normalize(direction.source(), w),
            ));
        }
        let mut slots = Vec::with_capacity(src.len() * tgt_words.len());
        for w in tgt_words {
            let f = intern(
                &mut table.tgt_vocab,
                &mut table.tgt_index,
                normalize(direction.target(), w),
            );
            for &e in &src {
                let next = prep.slot_src.len();
                let k = *prep.slots.entry((e, f)).or_insert(next);
                if k == next {
                    prep.slot_src.push(e);
                }
                slots.push(k);
            }
        }
        prep.pairs.push((src, slots));
    }
    if prep.pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(prep)
}

fn log_likelihood(prep: &Prepared, t: &[f64]) -> f64 {
    prep.pairs
        .iter()
        .map(|(src, slots)| {
            slots
                .chunks_exact(src.len())
                .map(|row| (row.iter().map(|&k| t[k]).sum::<f64>() / src.len() as f64).ln())
                .sum::<f64>()
        })
        .sum()
}

pub fn train_model1(
    corpus: &[ParallelSentence],
    direction: Direction,
    iterations: usize,
) -> Result<(TranslationTable, TrainingReport)> {
    Model1Trainer::new(iterations).train(corpus, direction)
}

/// Log-likelihood of a corpus under a table (uniform alignment prior,
/// NULL included, length term omitted).
pub fn corpus_log_likelihood(table: &TranslationTable, corpus: &[ParallelSentence]) -> f64 {
    let d = table.direction;
    let mut ll = 0.0;
    for pair in corpus {
        let (src, tgt) = (pair.tokens(d.source()), pair.tokens(d.target()));
        if src.is_empty() || tgt.is_empty() {
            continue;
        }
        for w in tgt {
            let mass = table.prob(NULL_TOKEN, w) + src.iter().map(|s| table.prob(s, w)).sum::<f64>();
            ll += (mass / (src.len() + 1) as f64).ln();
        }
    }
    ll
}

/// Best source position for every target word; NULL winners and words
/// with no positive candidate produce no link. Ties go to the smallest
/// position, NULL first. Returns the alignment and the number of target
/// words left unaligned because the table knows nothing about them.
pub fn viterbi_align(table: &TranslationTable, pair: &ParallelSentence) -> (AlignmentSet, usize) {
    let d = table.direction;
    let (src, tgt) = (pair.tokens(d.source()), pair.tokens(d.target()));
    let mut set = AlignmentSet::new(d);
    let mut oov = 0;
    for (j, w) in tgt.iter().enumerate() {
        let mut best: Option<usize> = None;
        let mut best_p = table.prob(NULL_TOKEN, w);
        let mut any = best_p > 0.0;
        for (i, s) in src.iter().enumerate() {
            let p = table.prob(s, w);
            if p > 0.0 {
                any = true;
            }
            if p > best_p {
                best_p = p;
                best = Some(i);
            }
        }
        if !any {
            oov += 1;
        } else if let Some(i) = best {
            set.links.insert((i, j));
        }
    }
    (set, oov)
}
