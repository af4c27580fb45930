//! Shared domain types and the line-oriented JSON formats used by every
//! pipeline stage.
//!
//! Every file is UTF-8 with one JSON object per line. Token indices are
//! 0-based and spans are half-open `[start, end)`.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::ParseTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    En,
    Zh,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::En => "en",
            Side::Zh => "zh",
        })
    }
}

/// One aligned English–Chinese sentence pair with its tagging and parse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelSentence {
    pub id: String,
    pub doc_id: String,
    pub position: u64,
    pub en_tokens: Vec<String>,
    pub en_pos: Vec<String>,
    pub en_tree: String,
    pub zh_tokens: Vec<String>,
    pub zh_pos: Vec<String>,
    pub zh_tree: String,
}

impl ParallelSentence {
    pub fn tokens(&self, side: Side) -> &[String] {
        match side {
            Side::En => &self.en_tokens,
            Side::Zh => &self.zh_tokens,
        }
    }

    pub fn pos(&self, side: Side) -> &[String] {
        match side {
            Side::En => &self.en_pos,
            Side::Zh => &self.zh_pos,
        }
    }

    pub fn tree_text(&self, side: Side) -> &str {
        match side {
            Side::En => &self.en_tree,
            Side::Zh => &self.zh_tree,
        }
    }

    /// Parses the bracketed tree of one side.
    pub fn tree(&self, side: Side) -> Result<ParseTree> {
        ParseTree::parse(self.tree_text(side))
    }

    /// Checks the per-record invariants: equal token/tag lengths and a tree
    /// whose leaf count matches the token count on each side.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for side in [Side::En, Side::Zh] {
            let (toks, tags) = (self.tokens(side), self.pos(side));
            if toks.len() != tags.len() {
                return Err(format!("{side} has {} tokens but {} POS tags", toks.len(), tags.len()));
            }
            let tree = self.tree(side).map_err(|e| format!("{side} tree: {e}"))?;
            let leaves = tree.leaf_count();
            if leaves != toks.len() {
                return Err(format!("{side} tree has {leaves} leaves but {} tokens", toks.len()));
            }
        }
        Ok(())
    }
}

/// A noun-phrase span in one side of a sentence pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NPSpan {
    pub side: Side,
    pub start: usize,
    pub end: usize,
    pub head: usize,
    /// Child-index path from the root to the NP node.
    pub node_path: Vec<usize>,
    pub is_pronoun: bool,
    pub is_conjunction: bool,
    pub is_proper: bool,
}

impl NPSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    /// True when `other` lies inside this span and is strictly smaller.
    pub fn properly_contains(&self, other: &NPSpan) -> bool {
        self.start <= other.start && other.end <= self.end && self.len() > other.len()
    }

    pub fn coords(&self) -> SpanRef {
        SpanRef {
            start: self.start,
            end: self.end,
            head: self.head,
        }
    }
}

/// Span coordinates as persisted in dataset records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpanRef {
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

impl SpanRef {
    fn check(&self, what: &str) -> std::result::Result<(), String> {
        if self.start >= self.end {
            return Err(format!("{what} span [{}, {}) is empty", self.start, self.end));
        }
        if self.head < self.start || self.head >= self.end {
            return Err(format!(
                "{what} head {} outside span [{}, {})",
                self.head, self.start, self.end
            ));
        }
        Ok(())
    }
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "kebab-case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::UnknownLabel {
                        label: s.to_string(),
                        expected: $name::ALL.iter().map(|l| l.as_str().to_string()).collect(),
                    }),
                }
            }
        }
    };
}

label_enum!(Plurality {
    Singular => "singular",
    Plural => "plural",
});

label_enum!(Definiteness {
    Definite => "definite",
    Indefinite => "indefinite",
});

label_enum!(
    /// Joint label; the variant order is the fixed class order of the 4-way task.
    FourWay {
        IndefiniteSingular => "indefinite-singular",
        IndefinitePlural => "indefinite-plural",
        DefiniteSingular => "definite-singular",
        DefinitePlural => "definite-plural",
    }
);

label_enum!(Split {
    Train => "train",
    Dev => "dev",
    Test => "test",
    Unsplit => "unsplit",
});

impl Plurality {
    pub fn opposite(self) -> Self {
        match self {
            Plurality::Singular => Plurality::Plural,
            Plurality::Plural => Plurality::Singular,
        }
    }
}

impl Definiteness {
    pub fn opposite(self) -> Self {
        match self {
            Definiteness::Definite => Definiteness::Indefinite,
            Definiteness::Indefinite => Definiteness::Definite,
        }
    }
}

impl FourWay {
    pub fn from_parts(definiteness: Definiteness, plurality: Plurality) -> Self {
        match (definiteness, plurality) {
            (Definiteness::Indefinite, Plurality::Singular) => FourWay::IndefiniteSingular,
            (Definiteness::Indefinite, Plurality::Plural) => FourWay::IndefinitePlural,
            (Definiteness::Definite, Plurality::Singular) => FourWay::DefiniteSingular,
            (Definiteness::Definite, Plurality::Plural) => FourWay::DefinitePlural,
        }
    }

    pub fn plurality(self) -> Plurality {
        match self {
            FourWay::IndefiniteSingular | FourWay::DefiniteSingular => Plurality::Singular,
            FourWay::IndefinitePlural | FourWay::DefinitePlural => Plurality::Plural,
        }
    }

    pub fn definiteness(self) -> Definiteness {
        match self {
            FourWay::IndefiniteSingular | FourWay::IndefinitePlural => Definiteness::Indefinite,
            FourWay::DefiniteSingular | FourWay::DefinitePlural => Definiteness::Definite,
        }
    }
}

// Split is declared through label_enum!, which has no variant attributes.
#[allow(clippy::derivable_impls)]
impl Default for Split {
    fn default() -> Self {
        Split::Unsplit
    }
}

/// A Chinese NP with labels projected from its English counterpart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedNP {
    pub id: String,
    pub sent_id: String,
    pub zh_span: SpanRef,
    pub zh_text: String,
    pub en_span: SpanRef,
    pub en_text: String,
    pub plurality: Plurality,
    pub definiteness: Definiteness,
    pub explicit_plural: bool,
    pub explicit_definite: bool,
    pub men_suffix: bool,
    #[serde(default)]
    pub split: Split,
}

impl AnnotatedNP {
    pub fn make_id(sent_id: &str, zh: SpanRef) -> String {
        format!("{sent_id}:{}-{}", zh.start, zh.end)
    }

    pub fn four_way(&self) -> FourWay {
        FourWay::from_parts(self.definiteness, self.plurality)
    }

    pub fn zh_tokens(&self) -> impl Iterator<Item = &str> {
        self.zh_text.split(' ')
    }

    /// Surface form of the Chinese head token.
    pub fn zh_head_token(&self) -> Option<&str> {
        self.zh_tokens().nth(self.zh_span.head - self.zh_span.start)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        self.zh_span.check("zh")?;
        self.en_span.check("en")?;
        let n = self.zh_tokens().count();
        if n != self.zh_span.end - self.zh_span.start {
            return Err(format!(
                "zh_text has {n} tokens but span [{}, {}) covers {}",
                self.zh_span.start,
                self.zh_span.end,
                self.zh_span.end - self.zh_span.start
            ));
        }
        Ok(())
    }

    /// Checks `zh_text` against the sentence the record points into.
    pub fn check_against(&self, pair: &ParallelSentence) -> std::result::Result<(), String> {
        let SpanRef { start, end, .. } = self.zh_span;
        if end > pair.zh_tokens.len() {
            return Err(format!(
                "zh span end {end} beyond sentence length {}",
                pair.zh_tokens.len()
            ));
        }
        let expected = pair.zh_tokens[start..end].join(" ");
        if expected != self.zh_text {
            return Err(format!(
                "zh_text {:?} does not match tokens {:?}",
                self.zh_text, expected
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    A1,
    A2,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::A1 => "A1",
            Protocol::A2 => "A2",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A1" | "a1" => Ok(Protocol::A1),
            "A2" | "a2" => Ok(Protocol::A2),
            _ => Err(Error::UnknownLabel {
                label: s.to_string(),
                expected: vec!["A1".into(), "A2".into()],
            }),
        }
    }
}

/// A yes/no answer, or an explicit skip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Judgment {
    /// Three yes/no questions about the stored labels.
    A1 {
        np_ok: Answer,
        plurality_ok: Answer,
        definiteness_ok: Answer,
    },
    /// Direct labels; `None` means the annotator skipped the dimension.
    A2 {
        plurality_label: Option<Plurality>,
        definiteness_label: Option<Definiteness>,
    },
}

/// One human judgment on one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RecordLine", into = "RecordLine")]
pub struct AssessmentRecord {
    pub item_id: String,
    pub annotator_id: String,
    pub judgment: Judgment,
    /// UTC seconds.
    pub timestamp: u64,
}

impl AssessmentRecord {
    pub fn protocol(&self) -> Protocol {
        match self.judgment {
            Judgment::A1 { .. } => Protocol::A1,
            Judgment::A2 { .. } => Protocol::A2,
        }
    }
}

/// Flat wire form of [`AssessmentRecord`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordLine {
    pub item_id: String,
    pub annotator_id: String,
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub np_ok: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plurality_ok: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definiteness_ok: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plurality_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definiteness_label: Option<String>,
    pub timestamp: u64,
}

fn parse_choice<T: FromStr<Err = Error>>(field: &str, v: Option<String>) -> Result<Option<T>> {
    match v.as_deref() {
        None => Err(Error::validation(format!("A2 record is missing {field}"))),
        Some("none") => Ok(None),
        Some(s) => s.parse().map(Some),
    }
}

impl TryFrom<RecordLine> for AssessmentRecord {
    type Error = Error;

    fn try_from(line: RecordLine) -> Result<Self> {
        let judgment = match line.protocol {
            Protocol::A1 => {
                if line.plurality_label.is_some() || line.definiteness_label.is_some() {
                    return Err(Error::validation("A1 record carries direct label fields"));
                }
                let need = |name: &str, v: Option<Answer>| {
                    v.ok_or_else(|| Error::validation(format!("A1 record is missing {name}")))
                };
                Judgment::A1 {
                    np_ok: need("np_ok", line.np_ok)?,
                    plurality_ok: need("plurality_ok", line.plurality_ok)?,
                    definiteness_ok: need("definiteness_ok", line.definiteness_ok)?,
                }
            }
            Protocol::A2 => {
                if line.np_ok.is_some() || line.plurality_ok.is_some() || line.definiteness_ok.is_some() {
                    return Err(Error::validation("A2 record carries yes/no fields"));
                }
                Judgment::A2 {
                    plurality_label: parse_choice("plurality_label", line.plurality_label)?,
                    definiteness_label: parse_choice("definiteness_label", line.definiteness_label)?,
                }
            }
        };
        Ok(AssessmentRecord {
            item_id: line.item_id,
            annotator_id: line.annotator_id,
            judgment,
            timestamp: line.timestamp,
        })
    }
}

impl From<AssessmentRecord> for RecordLine {
    fn from(r: AssessmentRecord) -> Self {
        let mut line = RecordLine {
            item_id: r.item_id,
            annotator_id: r.annotator_id,
            protocol: Protocol::A1,
            np_ok: None,
            plurality_ok: None,
            definiteness_ok: None,
            plurality_label: None,
            definiteness_label: None,
            timestamp: r.timestamp,
        };
        match r.judgment {
            Judgment::A1 {
                np_ok,
                plurality_ok,
                definiteness_ok,
            } => {
                line.np_ok = Some(np_ok);
                line.plurality_ok = Some(plurality_ok);
                line.definiteness_ok = Some(definiteness_ok);
            }
            Judgment::A2 {
                plurality_label,
                definiteness_label,
            } => {
                line.protocol = Protocol::A2;
                line.plurality_label = Some(plurality_label.map_or("none", |p| p.as_str()).to_string());
                line.definiteness_label = Some(definiteness_label.map_or("none", |d| d.as_str()).to_string());
            }
        }
        line
    }
}

/// Streams JSON objects from a line-oriented file, tagging errors with
/// their 1-based line number. Whitespace-only lines are skipped.
pub struct JsonLines<R, T> {
    lines: std::io::Lines<R>,
    line_no: usize,
    _marker: PhantomData<T>,
}

impl<R: BufRead, T: DeserializeOwned> JsonLines<R, T> {
    pub fn new(reader: R) -> Self {
        JsonLines {
            lines: reader.lines(),
            line_no: 0,
            _marker: PhantomData,
        }
    }
}

impl<R: BufRead, T: DeserializeOwned> Iterator for JsonLines<R, T> {
    type Item = Result<(usize, T)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let line_no = self.line_no;
            return Some(
                serde_json::from_str(&line)
                    .map(|v| (line_no, v))
                    .map_err(|source| Error::Json { line: line_no, source }),
            );
        }
    }
}

pub fn open_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<JsonLines<BufReader<File>, T>> {
    Ok(JsonLines::new(BufReader::new(File::open(path)?)))
}

/// Writes one JSON object per line and returns the number of lines.
pub fn write_jsonl<T: Serialize>(records: impl IntoIterator<Item = T>, path: impl AsRef<Path>) -> Result<usize> {
    let mut out = BufWriter::new(File::create(path)?);
    let n = write_jsonl_to(records, &mut out)?;
    out.flush()?;
    Ok(n)
}

pub fn write_jsonl_to<T: Serialize, W: Write>(records: impl IntoIterator<Item = T>, out: &mut W) -> Result<usize> {
    let mut n = 0;
    for rec in records {
        serde_json::to_writer(&mut *out, &rec).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
        n += 1;
    }
    Ok(n)
}

/// Validating stream over a parallel corpus file.
pub struct CorpusReader<R> {
    inner: JsonLines<R, ParallelSentence>,
    seen_positions: HashSet<(String, u64)>,
    seen_ids: HashSet<String>,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        CorpusReader {
            inner: JsonLines::new(reader),
            seen_positions: HashSet::new(),
            seen_ids: HashSet::new(),
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<ParallelSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, sent) = match self.inner.next()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        let invalid = |reason: String| Error::InvalidRecord {
            line,
            id: sent.id.clone(),
            reason,
        };
        if let Err(reason) = sent.validate() {
            return Some(Err(invalid(reason)));
        }
        if !self.seen_ids.insert(sent.id.clone()) {
            return Some(Err(Error::DuplicateId { line, id: sent.id }));
        }
        if !self.seen_positions.insert((sent.doc_id.clone(), sent.position)) {
            return Some(Err(invalid(format!(
                "position {} repeated in document {}",
                sent.position, sent.doc_id
            ))));
        }
        Some(Ok(sent))
    }
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<CorpusReader<BufReader<File>>> {
    Ok(CorpusReader::new(BufReader::new(File::open(path)?)))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<ParallelSentence>> {
    read_corpus(path)?.collect()
}

pub fn write_dataset<'a>(records: impl IntoIterator<Item = &'a AnnotatedNP>, path: impl AsRef<Path>) -> Result<usize> {
    write_jsonl(records, path)
}

/// Reads and validates a dataset file; ids must be unique.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<AnnotatedNP>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in open_jsonl::<AnnotatedNP>(path)? {
        let (line, rec) = item?;
        rec.validate().map_err(|reason| Error::InvalidRecord {
            line,
            id: rec.id.clone(),
            reason,
        })?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId { line, id: rec.id });
        }
        out.push(rec);
    }
    Ok(out)
}
