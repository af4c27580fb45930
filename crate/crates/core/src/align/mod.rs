//! Directional word alignments: a built-in IBM Model 1 aligner and
//! Pharaoh-format ingestion.

mod model1;
mod pharaoh;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{ParallelSentence, Side};
use crate::error::{Error, Result};

pub use model1::{
    corpus_log_likelihood, train_model1, viterbi_align, Model1Trainer, TrainingReport, TranslationTable, NULL_TOKEN,
};
pub use pharaoh::{format_pharaoh, read_pharaoh, read_pharaoh_file, write_pharaoh_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "en2zh")]
    EnToZh,
    #[serde(rename = "zh2en")]
    ZhToEn,
}

impl Direction {
    pub fn source(self) -> Side {
        match self {
            Direction::EnToZh => Side::En,
            Direction::ZhToEn => Side::Zh,
        }
    }

    pub fn target(self) -> Side {
        match self {
            Direction::EnToZh => Side::Zh,
            Direction::ZhToEn => Side::En,
        }
    }

    pub fn lengths(self, pair: &ParallelSentence) -> (usize, usize) {
        (pair.tokens(self.source()).len(), pair.tokens(self.target()).len())
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::EnToZh => "en2zh",
            Direction::ZhToEn => "zh2en",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "en2zh" | "e2z" => Ok(Direction::EnToZh),
            "zh2en" | "z2e" => Ok(Direction::ZhToEn),
            _ => Err(Error::config(format!("unknown direction {s:?}"))),
        }
    }
}

/// Word links `(source index, target index)` for one sentence pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentSet {
    pub direction: Direction,
    pub links: BTreeSet<(usize, usize)>,
}

impl AlignmentSet {
    pub fn new(direction: Direction) -> Self {
        AlignmentSet {
            direction,
            links: BTreeSet::new(),
        }
    }

    pub fn from_links(direction: Direction, links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        AlignmentSet {
            direction,
            links: links.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn check_bounds(&self, src_len: usize, tgt_len: usize) -> Result<()> {
        for (position, &(i, j)) in self.links.iter().enumerate() {
            if i >= src_len || j >= tgt_len {
                return Err(Error::AlignmentRange {
                    position,
                    link: format!("{i}-{j}"),
                    src_len,
                    tgt_len,
                });
            }
        }
        Ok(())
    }
}

/// Lexical key used by the aligner: English is case-folded, Chinese is not.
pub(crate) fn normalize(side: Side, word: &str) -> String {
    match side {
        Side::En => word.to_lowercase(),
        Side::Zh => word.to_string(),
    }
}
