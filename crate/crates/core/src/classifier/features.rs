use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

/// Sparse n-gram counts keyed by `"{order}|{tok_1}_..._{tok_n}"`.
pub type FeatureVector = BTreeMap<String, u32>;

pub const DEFAULT_ORDERS: [usize; 4] = [1, 2, 3, 4];

/// Word n-grams of every requested order over the whole token sequence,
/// markers included.
pub fn featurize(tokens: &[String], orders: &[usize]) -> FeatureVector {
    let mut out = FeatureVector::new();
    for &n in orders {
        if n == 0 || n > tokens.len() {
            continue;
        }
        for gram in tokens.windows(n) {
            *out.entry(format!("{n}|{}", gram.join("_"))).or_insert(0) += 1;
        }
    }
    out
}

/// Feature strings retained for training, in sorted order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub features: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Keeps features whose total count over `vectors` reaches `min_freq`.
    pub fn build<'a>(vectors: impl IntoIterator<Item = &'a FeatureVector>, min_freq: u32) -> Self {
        let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
        for v in vectors {
            for (f, &c) in v {
                *totals.entry(f.as_str()).or_insert(0) += c as u64;
            }
        }
        let features = totals
            .into_iter()
            .filter(|&(_, c)| c >= min_freq.max(1) as u64)
            .map(|(f, _)| f.to_string())
            .collect();
        Vocabulary::from_features(features)
    }

    pub fn from_features(features: Vec<String>) -> Self {
        let index = features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as u32))
            .collect();
        Vocabulary { features, index }
    }

    /// Restores the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as u32))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn get(&self, feature: &str) -> Option<u32> {
        self.index.get(feature).copied()
    }

    /// Sparse `(index, value)` pairs sorted by index; out-of-vocabulary
    /// features are dropped. With `normalize`, values are scaled to unit L2
    /// norm.
    pub fn vectorize(&self, fv: &FeatureVector, normalize: bool) -> SparseVec {
        let mut v: SparseVec = fv
            .iter()
            .filter_map(|(f, &c)| self.get(f).map(|i| (i, c as f64)))
            .collect();
        v.sort_by_key(|&(i, _)| i);
        if normalize {
            let norm = v.iter().map(|&(_, x)| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|(_, x)| *x /= norm);
            }
        }
        v
    }
}

pub type SparseVec = Vec<(u32, f64)>;
