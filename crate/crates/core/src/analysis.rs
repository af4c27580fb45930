//! Chinese-side analysis: explicit marking of plurality and definiteness,
//! the 们-suffix subset, corpus statistics and the train/dev/test split.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedNP, Definiteness, ParallelSentence, Plurality, SpanRef, Split};
use crate::error::{Error, Result};
use crate::hashing::stable_hash;

/// A numeral (CD) or measure word (M) inside the span.
pub fn explicit_plural(span: SpanRef, _tokens: &[String], pos: &[String]) -> bool {
    pos[span.start..span.end].iter().any(|t| t == "CD" || t == "M")
}

fn is_demonstrative(token: &str, tag: &str) -> bool {
    tag == "DT" && (token.starts_with('这') || token.starts_with('那'))
}

/// A proper name, a possessive `X 的` with X a pronoun or noun, or a numeral
/// or measure word preceded by a demonstrative.
pub fn explicit_definite(span: SpanRef, tokens: &[String], pos: &[String]) -> bool {
    let range = span.start..span.end;
    let proper = pos[range.clone()].iter().any(|t| t == "NR");
    let possessive = range.clone().any(|i| {
        pos[i] == "DEG" && tokens[i] == "的" && (span.start..i).any(|k| pos[k] == "PN" || pos[k].starts_with('N'))
    });
    let demonstrative = range
        .clone()
        .any(|i| (pos[i] == "CD" || pos[i] == "M") && (span.start..i).any(|k| is_demonstrative(&tokens[k], &pos[k])));
    proper || possessive || demonstrative
}

/// Words ending in 们 that are not nominal plural suffixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MenExclusions {
    pub words: HashSet<String>,
}

pub const MEN_PRONOUNS: [&str; 7] = ["我们", "你们", "您们", "他们", "她们", "它们", "咱们"];
pub const MEN_LEXICALIZED: [&str; 3] = ["哥们", "爷们", "娘们"];

impl Default for MenExclusions {
    fn default() -> Self {
        MenExclusions {
            words: MEN_PRONOUNS
                .iter()
                .chain(&MEN_LEXICALIZED)
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl MenExclusions {
    /// One word per line; blank lines and `#` comments ignored.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let words = fs::read_to_string(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect();
        Ok(MenExclusions { words })
    }

    pub fn is_men_noun(&self, token: &str) -> bool {
        token.ends_with('们') && !self.words.contains(token)
    }
}

/// Fills the Chinese-side flags of a projected record from its sentence.
pub fn annotate_chinese(np: &mut AnnotatedNP, pair: &ParallelSentence, exclusions: &MenExclusions) {
    np.explicit_plural = explicit_plural(np.zh_span, &pair.zh_tokens, &pair.zh_pos);
    np.explicit_definite = explicit_definite(np.zh_span, &pair.zh_tokens, &pair.zh_pos);
    np.men_suffix = exclusions.is_men_noun(&pair.zh_tokens[np.zh_span.head]);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenReport {
    pub count: usize,
    pub singular: usize,
    pub indefinite: usize,
    pub singular_rate: Option<f64>,
    pub indefinite_rate: Option<f64>,
}

fn rate(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// NPs whose head token carries the 们 suffix, with their label mix.
pub fn men_suffix_nps<'a>(dataset: &'a [AnnotatedNP], exclusions: &MenExclusions) -> (Vec<&'a AnnotatedNP>, MenReport) {
    let subset: Vec<&AnnotatedNP> = dataset
        .iter()
        .filter(|np| np.zh_head_token().is_some_and(|h| exclusions.is_men_noun(h)))
        .collect();
    let report = men_report(subset.iter().copied());
    (subset, report)
}

fn men_report<'a>(subset: impl Iterator<Item = &'a AnnotatedNP>) -> MenReport {
    let (mut count, mut singular, mut indefinite) = (0, 0, 0);
    for np in subset {
        count += 1;
        singular += usize::from(np.plurality == Plurality::Singular);
        indefinite += usize::from(np.definiteness == Definiteness::Indefinite);
    }
    MenReport {
        count,
        singular,
        indefinite,
        singular_rate: rate(singular, count),
        indefinite_rate: rate(indefinite, count),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub total: usize,
    pub singular: usize,
    pub plural: usize,
    pub definite: usize,
    pub indefinite: usize,
    pub singular_rate: Option<f64>,
    pub plural_rate: Option<f64>,
    pub definite_rate: Option<f64>,
    pub indefinite_rate: Option<f64>,
}

impl LabelCounts {
    fn add(&mut self, np: &AnnotatedNP) {
        self.total += 1;
        match np.plurality {
            Plurality::Singular => self.singular += 1,
            Plurality::Plural => self.plural += 1,
        }
        match np.definiteness {
            Definiteness::Definite => self.definite += 1,
            Definiteness::Indefinite => self.indefinite += 1,
        }
    }

    fn finish(&mut self) {
        self.singular_rate = rate(self.singular, self.total);
        self.plural_rate = rate(self.plural, self.total);
        self.definite_rate = rate(self.definite, self.total);
        self.indefinite_rate = rate(self.indefinite, self.total);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitTable {
    pub train: LabelCounts,
    pub dev: LabelCounts,
    pub test: LabelCounts,
    pub unsplit: LabelCounts,
}

impl SplitTable {
    fn get_mut(&mut self, split: Split) -> &mut LabelCounts {
        match split {
            Split::Train => &mut self.train,
            Split::Dev => &mut self.dev,
            Split::Test => &mut self.test,
            Split::Unsplit => &mut self.unsplit,
        }
    }
}

/// Dataset statistics. Rates are `None` when their denominator is zero.
/// Explicitness rates are reported per NP and per sentence (a sentence
/// counts when at least one of its NPs is explicit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub splits: SplitTable,
    pub overall: LabelCounts,
    pub explicit_plural_count: usize,
    pub explicit_definite_count: usize,
    pub explicit_plural_rate: Option<f64>,
    pub explicit_definite_rate: Option<f64>,
    pub sentences: usize,
    pub sentence_explicit_plural_rate: Option<f64>,
    pub sentence_explicit_definite_rate: Option<f64>,
    pub men_count: usize,
    pub men_singular_rate: Option<f64>,
    pub men_indefinite_rate: Option<f64>,
}

pub fn corpus_stats(dataset: &[AnnotatedNP]) -> CorpusStats {
    let mut splits = SplitTable::default();
    let mut overall = LabelCounts::default();
    let (mut ep, mut ed) = (0, 0);
    // sentence -> (any explicit plural, any explicit definite)
    let mut per_sentence: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for np in dataset {
        splits.get_mut(np.split).add(np);
        overall.add(np);
        ep += usize::from(np.explicit_plural);
        ed += usize::from(np.explicit_definite);
        let e = per_sentence.entry(np.sent_id.as_str()).or_default();
        e.0 |= np.explicit_plural;
        e.1 |= np.explicit_definite;
    }
    for s in [Split::Train, Split::Dev, Split::Test, Split::Unsplit] {
        splits.get_mut(s).finish();
    }
    overall.finish();
    let sentences = per_sentence.len();
    let sp = per_sentence.values().filter(|v| v.0).count();
    let sd = per_sentence.values().filter(|v| v.1).count();
    let men = men_report(dataset.iter().filter(|np| np.men_suffix));
    CorpusStats {
        total: dataset.len(),
        splits,
        overall,
        explicit_plural_count: ep,
        explicit_definite_count: ed,
        explicit_plural_rate: rate(ep, dataset.len()),
        explicit_definite_rate: rate(ed, dataset.len()),
        sentences,
        sentence_explicit_plural_rate: rate(sp, sentences),
        sentence_explicit_definite_rate: rate(sd, sentences),
        men_count: men.count,
        men_singular_rate: men.singular_rate,
        men_indefinite_rate: men.indefinite_rate,
    }
}

/// Train/dev/test proportions, written `8:1:1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRatios(pub [u32; 3]);

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios([8, 1, 1])
    }
}

impl FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u32> = s
            .split(':')
            .map(|p| p.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::config(format!("bad ratios {s:?}; expected e.g. 8:1:1")))?;
        match parts[..] {
            [a, b, c] if a > 0 && b > 0 && c > 0 => Ok(SplitRatios([a, b, c])),
            _ => Err(Error::config(format!("ratios {s:?} must be three positive integers"))),
        }
    }
}

impl fmt::Display for SplitRatios {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "{a}:{b}:{c}")
    }
}

impl SplitRatios {
    /// Largest-remainder allocation of `n` records.
    pub fn targets(&self, n: usize) -> [usize; 3] {
        let sum: u64 = self.0.iter().map(|&r| r as u64).sum();
        let exact: Vec<(usize, u64)> = self
            .0
            .iter()
            .map(|&r| {
                let num = n as u64 * r as u64;
                ((num / sum) as usize, num % sum)
            })
            .collect();
        let mut out = [exact[0].0, exact[1].0, exact[2].0];
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| exact[b].1.cmp(&exact[a].1).then(a.cmp(&b)));
        let left = n - out.iter().sum::<usize>();
        for &i in order.iter().take(left) {
            out[i] += 1;
        }
        out
    }
}

/// Assigns every record to train, dev or test.
///
/// Records are grouped by sentence so a sentence never straddles splits.
/// Groups are ordered by a seeded hash of the sentence id; test and then dev
/// are filled first-fit up to their target sizes and the remainder goes to
/// train. The result does not depend on input order.
pub fn split_dataset(dataset: &mut [AnnotatedNP], ratios: SplitRatios, seed: u64) {
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
    for np in dataset.iter() {
        *groups.entry(np.sent_id.as_str()).or_default() += 1;
    }
    let mut order: Vec<(u64, &str, usize)> = groups
        .into_iter()
        .map(|(sid, size)| (stable_hash(seed, sid), sid, size))
        .collect();
    order.sort();

    let [_, dev_target, test_target] = ratios.targets(dataset.len());
    let mut assignment: BTreeMap<String, Split> = BTreeMap::new();
    let fill = |split: Split, target: usize, assignment: &mut BTreeMap<String, Split>| {
        let mut room = target;
        for &(_, sid, size) in &order {
            if room == 0 {
                break;
            }
            if size <= room && !assignment.contains_key(sid) {
                assignment.insert(sid.to_string(), split);
                room -= size;
            }
        }
    };
    fill(Split::Test, test_target, &mut assignment);
    fill(Split::Dev, dev_target, &mut assignment);
    for np in dataset.iter_mut() {
        np.split = assignment.get(&np.sent_id).copied().unwrap_or(Split::Train);
    }
}
