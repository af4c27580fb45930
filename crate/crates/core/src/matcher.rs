//! Two-step NP matching over directional alignments, and the filters that
//! decide which matched NPs enter the dataset.
//!
//! 1. For each direction every source NP is paired with the target NP that
//!    receives the most alignment links from it.
//! 2. A match is kept only when the two NPs are paired in both directions.
//!
//! Links are counted as `(i, j)` tuples. Ties prefer the shorter target span,
//! then the leftmost one.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::align::AlignmentSet;
use crate::corpus::NPSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing {
    /// Index into the target NP list.
    pub target: usize,
    pub overlap: usize,
    pub tie: bool,
}

/// Source NP index → best target NP. Source NPs without any link into a
/// target NP are absent.
pub type PairMap = BTreeMap<usize, Pairing>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NPMatch {
    pub en_span: NPSpan,
    pub zh_span: NPSpan,
    pub overlap_e2z: usize,
    pub overlap_z2e: usize,
    pub tie_flag: bool,
}

/// One line of the match debug file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub sent_id: String,
    #[serde(flatten)]
    pub m: NPMatch,
}

fn prefer(a: &NPSpan, b: &NPSpan) -> Ordering {
    a.len().cmp(&b.len()).then(a.start.cmp(&b.start))
}

pub fn pair_nps(src_nps: &[NPSpan], tgt_nps: &[NPSpan], alignment: &AlignmentSet) -> PairMap {
    let mut out = PairMap::new();
    for (si, src) in src_nps.iter().enumerate() {
        let targets: Vec<usize> = alignment
            .links
            .range((src.start, 0)..(src.end, 0))
            .map(|&(_, j)| j)
            .collect();
        if targets.is_empty() {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        let mut tie = false;
        for (ti, tgt) in tgt_nps.iter().enumerate() {
            let overlap = targets.iter().filter(|&&j| tgt.contains_index(j)).count();
            if overlap == 0 {
                continue;
            }
            match best {
                None => best = Some((ti, overlap)),
                Some((bi, bo)) => match overlap.cmp(&bo) {
                    Ordering::Greater => {
                        best = Some((ti, overlap));
                        tie = false;
                    }
                    Ordering::Equal => {
                        tie = true;
                        if prefer(tgt, &tgt_nps[bi]) == Ordering::Less {
                            best = Some((ti, overlap));
                        }
                    }
                    Ordering::Less => {}
                },
            }
        }
        if let Some((target, overlap)) = best {
            out.insert(si, Pairing { target, overlap, tie });
        }
    }
    out
}

/// Keeps the pairs that agree in both directions, ordered by English NP.
pub fn match_nps(en_nps: &[NPSpan], zh_nps: &[NPSpan], pairs_e2z: &PairMap, pairs_z2e: &PairMap) -> Vec<NPMatch> {
    pairs_e2z
        .iter()
        .filter_map(|(&e, fwd)| {
            let back = pairs_z2e.get(&fwd.target)?;
            (back.target == e).then(|| NPMatch {
                en_span: en_nps[e].clone(),
                zh_span: zh_nps[fwd.target].clone(),
                overlap_e2z: fwd.overlap,
                overlap_z2e: back.overlap,
                tie_flag: fwd.tie || back.tie,
            })
        })
        .collect()
}

/// Drops coordinated NPs, then any match nested inside another surviving
/// match on either side, then pronoun NPs.
pub fn post_filter(matches: &[NPMatch]) -> Vec<NPMatch> {
    let no_conj: Vec<&NPMatch> = matches
        .iter()
        .filter(|m| !m.en_span.is_conjunction && !m.zh_span.is_conjunction)
        .collect();
    no_conj
        .iter()
        .filter(|m| {
            !no_conj
                .iter()
                .any(|o| o.en_span.properly_contains(&m.en_span) || o.zh_span.properly_contains(&m.zh_span))
        })
        .filter(|m| !m.en_span.is_pronoun && !m.zh_span.is_pronoun)
        .map(|m| (*m).clone())
        .collect()
}

/// Full per-sentence matching: both pairings, mutual matching, filtering.
pub fn match_sentence(en_nps: &[NPSpan], zh_nps: &[NPSpan], e2z: &AlignmentSet, z2e: &AlignmentSet) -> Vec<NPMatch> {
    let fwd = pair_nps(en_nps, zh_nps, e2z);
    let back = pair_nps(zh_nps, en_nps, z2e);
    post_filter(&match_nps(en_nps, zh_nps, &fwd, &back))
}
