use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedNP, ParallelSentence};
use crate::error::{Error, Result};

pub const MARKER: &str = "*";
/// Stand-in for a literal `*` token so the two markers stay unambiguous.
const ESCAPED_MARKER: &str = "＊";

/// Token sequence with the target NP wrapped in `*` markers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedInstance {
    pub id: String,
    pub tokens: Vec<String>,
    pub label: String,
    pub context_size: usize,
}

impl MarkedInstance {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let marks: Vec<usize> = self
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == MARKER)
            .map(|(i, _)| i)
            .collect();
        match marks[..] {
            [a, b] if b > a + 1 => Ok(()),
            [_, _] => Err("no tokens between the markers".into()),
            _ => Err(format!("expected 2 markers, found {}", marks.len())),
        }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Sentences grouped by document in position order.
#[derive(Debug, Clone, Default)]
pub struct CorpusIndex {
    sentences: Vec<ParallelSentence>,
    docs: HashMap<String, Vec<usize>>,
    /// sentence id -> (doc id, rank within doc)
    locate: HashMap<String, (String, usize)>,
}

impl CorpusIndex {
    pub fn new(sentences: Vec<ParallelSentence>) -> Self {
        let mut docs: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, s) in sentences.iter().enumerate() {
            docs.entry(s.doc_id.clone()).or_default().push(i);
        }
        let mut locate = HashMap::new();
        for (doc, members) in docs.iter_mut() {
            members.sort_by_key(|&i| sentences[i].position);
            for (rank, &i) in members.iter().enumerate() {
                locate.insert(sentences[i].id.clone(), (doc.clone(), rank));
            }
        }
        CorpusIndex {
            sentences,
            docs,
            locate,
        }
    }

    pub fn get(&self, sent_id: &str) -> Option<&ParallelSentence> {
        let (doc, rank) = self.locate.get(sent_id)?;
        Some(&self.sentences[self.docs[doc][*rank]])
    }

    pub fn sentences(&self) -> &[ParallelSentence] {
        &self.sentences
    }

    /// Up to `k` neighbours on each side of the sentence, within its document.
    pub fn window(
        &self,
        sent_id: &str,
        k: usize,
    ) -> Option<(Vec<&ParallelSentence>, &ParallelSentence, Vec<&ParallelSentence>)> {
        let (doc, rank) = self.locate.get(sent_id)?;
        let members = &self.docs[doc];
        let before = members[rank.saturating_sub(k)..*rank]
            .iter()
            .map(|&i| &self.sentences[i])
            .collect();
        let after_end = (*rank + 1 + k).min(members.len());
        let after = members[*rank + 1..after_end]
            .iter()
            .map(|&i| &self.sentences[i])
            .collect();
        Some((before, &self.sentences[members[*rank]], after))
    }
}

fn push_tokens(out: &mut Vec<String>, tokens: &[String]) {
    out.extend(tokens.iter().map(|t| {
        if t == MARKER {
            ESCAPED_MARKER.to_string()
        } else {
            t.clone()
        }
    }));
}

/// `k` Chinese sentences before the target, the target with its NP marked,
/// and `k` sentences after, stopping at document boundaries.
pub fn build_context(
    record: &AnnotatedNP,
    index: &CorpusIndex,
    k: usize,
    label: impl Into<String>,
) -> Result<MarkedInstance> {
    let (before, target, after) = index
        .window(&record.sent_id, k)
        .ok_or_else(|| Error::UnknownSentence(record.sent_id.clone()))?;
    let span = record.zh_span;
    if span.end > target.zh_tokens.len() {
        return Err(Error::validation(format!(
            "record {} span [{}, {}) exceeds sentence {} of length {}",
            record.id,
            span.start,
            span.end,
            target.id,
            target.zh_tokens.len()
        )));
    }
    let mut tokens = Vec::new();
    for s in before {
        push_tokens(&mut tokens, &s.zh_tokens);
    }
    push_tokens(&mut tokens, &target.zh_tokens[..span.start]);
    tokens.push(MARKER.to_string());
    push_tokens(&mut tokens, &target.zh_tokens[span.start..span.end]);
    tokens.push(MARKER.to_string());
    push_tokens(&mut tokens, &target.zh_tokens[span.end..]);
    for s in after {
        push_tokens(&mut tokens, &s.zh_tokens);
    }
    Ok(MarkedInstance {
        id: record.id.clone(),
        tokens,
        label: label.into(),
        context_size: k,
    })
}
