//! Plurality and definiteness of an English NP, projected onto its matched
//! Chinese NP.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedNP, Definiteness, NPSpan, ParallelSentence, Plurality, Split};
use crate::error::{Error, Result};
use crate::matcher::NPMatch;

const UNITS: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 8] = [
    "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];
const DEMONSTRATIVES: [&str; 4] = ["this", "that", "these", "those"];

/// English number words. Digit strings (optionally with `,` grouping) are
/// parsed when `parse_digits` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberLexicon {
    words: HashMap<String, u64>,
    pub parse_digits: bool,
}

impl Default for NumberLexicon {
    fn default() -> Self {
        let mut words: HashMap<String, u64> = UNITS
            .iter()
            .enumerate()
            .map(|(v, w)| (w.to_string(), v as u64))
            .collect();
        words.extend(TENS.iter().zip((20..).step_by(10)).map(|(w, v)| (w.to_string(), v)));
        words.insert("hundred".into(), 100);
        words.insert("thousand".into(), 1_000);
        words.insert("million".into(), 1_000_000);
        NumberLexicon {
            words,
            parse_digits: true,
        }
    }
}

impl NumberLexicon {
    /// Loads `word value` lines; blank lines and `#` comments are ignored.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut words = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::InvalidRecord {
                line: n + 1,
                id: "number lexicon".into(),
                reason: format!("expected 'word value', got {line:?}"),
            };
            let (w, v) = line.split_once(char::is_whitespace).ok_or_else(bad)?;
            let v: u64 = v.trim().parse().map_err(|_| bad())?;
            words.insert(w.to_lowercase(), v);
        }
        if words.get("one") != Some(&1) {
            return Err(Error::config("number lexicon must map \"one\" to 1"));
        }
        Ok(NumberLexicon {
            words,
            parse_digits: true,
        })
    }

    pub fn value(&self, token: &str) -> Option<u64> {
        if let Some(&v) = self.words.get(&token.to_lowercase()) {
            return Some(v);
        }
        if !self.parse_digits {
            return None;
        }
        let digits = token.replace(',', "");
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) && !token.starts_with(',') {
            digits.parse().ok()
        } else {
            None
        }
    }
}

/// Configuration file keys.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectorSettings {
    #[serde(default)]
    pub possessive_definite: bool,
    #[serde(default)]
    pub number_lexicon_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct LabelProjector {
    pub lexicon: NumberLexicon,
    /// Treat possessive determiners (`my`, `Lisi 's`) as definiteness cues.
    pub possessive_definite: bool,
}

impl LabelProjector {
    pub fn from_settings(settings: &ProjectorSettings) -> Result<Self> {
        let lexicon = match &settings.number_lexicon_path {
            Some(p) => NumberLexicon::from_file(p)?,
            None => NumberLexicon::default(),
        };
        Ok(LabelProjector {
            lexicon,
            possessive_definite: settings.possessive_definite,
        })
    }

    pub fn numeral_value(&self, token: &str) -> Option<u64> {
        self.lexicon.value(token)
    }

    /// Plural when the head is tagged NNS/NNPS or a CD token in the span
    /// denotes a quantity above one.
    pub fn plurality_of(&self, span: &NPSpan, tokens: &[String], pos: &[String]) -> Plurality {
        let head_tag = pos[span.head].as_str();
        if head_tag == "NNS" || head_tag == "NNPS" {
            return Plurality::Plural;
        }
        let counted =
            (span.start..span.end).any(|i| pos[i] == "CD" && self.numeral_value(&tokens[i]).is_some_and(|v| v > 1));
        if counted {
            Plurality::Plural
        } else {
            Plurality::Singular
        }
    }

    /// Definite on the article "the", a demonstrative determiner, or a proper
    /// name anywhere in the span.
    pub fn definiteness_of(&self, span: &NPSpan, tokens: &[String], pos: &[String]) -> Definiteness {
        if span.is_proper {
            return Definiteness::Definite;
        }
        let cue = (span.start..span.end).any(|i| {
            let word = tokens[i].to_lowercase();
            let tag = pos[i].as_str();
            word == "the"
                || (tag == "DT" && DEMONSTRATIVES.contains(&word.as_str()))
                || (self.possessive_definite && (tag == "PRP$" || tag == "POS"))
        });
        if cue {
            Definiteness::Definite
        } else {
            Definiteness::Indefinite
        }
    }

    /// Builds the dataset record for a surviving match. Explicitness and the
    /// 们 flag are left false for the Chinese-side analysis to fill in.
    pub fn project(&self, m: &NPMatch, pair: &ParallelSentence) -> AnnotatedNP {
        let (en, zh) = (&m.en_span, &m.zh_span);
        let zh_coords = zh.coords();
        AnnotatedNP {
            id: AnnotatedNP::make_id(&pair.id, zh_coords),
            sent_id: pair.id.clone(),
            zh_span: zh_coords,
            zh_text: pair.zh_tokens[zh.start..zh.end].join(" "),
            en_span: en.coords(),
            en_text: pair.en_tokens[en.start..en.end].join(" "),
            plurality: self.plurality_of(en, &pair.en_tokens, &pair.en_pos),
            definiteness: self.definiteness_of(en, &pair.en_tokens, &pair.en_pos),
            explicit_plural: false,
            explicit_definite: false,
            men_suffix: false,
            split: Split::Unsplit,
        }
    }
}
