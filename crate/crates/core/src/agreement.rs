//! Agreement statistics for two-annotator assessments: Acc=2, Acc>=1,
//! percentage agreement and Cohen's kappa.
//!
//! Yes/no answers are first translated into labels relative to the
//! dataset's own label, so kappa is always computed over labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedNP, Answer, AssessmentRecord, Definiteness, Judgment, Plurality, Protocol};

pub const NP_LABEL: &str = "np";
pub const NOT_NP_LABEL: &str = "not-np";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Np,
    Plurality,
    Definiteness,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Np, Dimension::Plurality, Dimension::Definiteness];

    pub fn title(self) -> &'static str {
        match self {
            Dimension::Np => "NP identification",
            Dimension::Plurality => "Plurality",
            Dimension::Definiteness => "Definiteness",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

/// The automatic labels an item was assessed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetLabels {
    pub plurality: Plurality,
    pub definiteness: Definiteness,
}

impl From<&AnnotatedNP> for DatasetLabels {
    fn from(np: &AnnotatedNP) -> Self {
        DatasetLabels {
            plurality: np.plurality,
            definiteness: np.definiteness,
        }
    }
}

impl DatasetLabels {
    pub fn label(&self, dim: Dimension) -> &'static str {
        match dim {
            Dimension::Np => NP_LABEL,
            Dimension::Plurality => self.plurality.as_str(),
            Dimension::Definiteness => self.definiteness.as_str(),
        }
    }

    fn opposite(&self, dim: Dimension) -> &'static str {
        match dim {
            Dimension::Np => NOT_NP_LABEL,
            Dimension::Plurality => self.plurality.opposite().as_str(),
            Dimension::Definiteness => self.definiteness.opposite().as_str(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Translated {
    Label(&'static str),
    /// The annotator answered "none" or skipped the dimension.
    Skipped,
    /// The protocol does not ask about this dimension.
    NotAsked,
}

/// A1: yes means the dataset label, no its opposite. A2: direct labels
/// pass through; A2 has no NP question.
pub fn translate_decisions(record: &AssessmentRecord, dim: Dimension, dataset: &DatasetLabels) -> Translated {
    match record.judgment {
        Judgment::A1 {
            np_ok,
            plurality_ok,
            definiteness_ok,
        } => {
            let answer = match dim {
                Dimension::Np => np_ok,
                Dimension::Plurality => plurality_ok,
                Dimension::Definiteness => definiteness_ok,
            };
            match answer {
                Answer::Yes => Translated::Label(dataset.label(dim)),
                Answer::No => Translated::Label(dataset.opposite(dim)),
                Answer::None => Translated::Skipped,
            }
        }
        Judgment::A2 {
            plurality_label,
            definiteness_label,
        } => match dim {
            Dimension::Np => Translated::NotAsked,
            Dimension::Plurality => plurality_label.map_or(Translated::Skipped, |p| Translated::Label(p.as_str())),
            Dimension::Definiteness => {
                definiteness_label.map_or(Translated::Skipped, |d| Translated::Label(d.as_str()))
            }
        },
    }
}

/// Two annotators' labels for one item plus the dataset label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemPair {
    pub item_id: String,
    pub gold: String,
    pub first: String,
    pub second: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Items with at least one skipped answer for the dimension.
    pub skipped_items: usize,
    pub skipped_answers: usize,
    /// Items without exactly two records.
    pub wrong_record_count: usize,
    /// Items absent from the dataset.
    pub unknown_items: usize,
}

/// Groups the records of one protocol by item and pairs the two
/// annotators' translated labels, ordered by annotator id.
pub fn pair_items(
    records: &[AssessmentRecord],
    protocol: Protocol,
    dim: Dimension,
    dataset: &HashMap<String, DatasetLabels>,
) -> (Vec<ItemPair>, Diagnostics) {
    let mut by_item: BTreeMap<&str, Vec<&AssessmentRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.protocol() == protocol) {
        by_item.entry(r.item_id.as_str()).or_default().push(r);
    }
    let mut diag = Diagnostics::default();
    let mut pairs = Vec::new();
    for (item, mut recs) in by_item {
        let Some(gold) = dataset.get(item) else {
            diag.unknown_items += 1;
            continue;
        };
        if recs.len() != 2 {
            diag.wrong_record_count += 1;
            continue;
        }
        recs.sort_by(|a, b| a.annotator_id.cmp(&b.annotator_id));
        let labels: Vec<Translated> = recs.iter().map(|r| translate_decisions(r, dim, gold)).collect();
        match (labels[0], labels[1]) {
            (Translated::Label(a), Translated::Label(b)) => pairs.push(ItemPair {
                item_id: item.to_string(),
                gold: gold.label(dim).to_string(),
                first: a.to_string(),
                second: b.to_string(),
            }),
            (Translated::NotAsked, _) | (_, Translated::NotAsked) => {}
            (a, b) => {
                diag.skipped_items += 1;
                diag.skipped_answers += [a, b].iter().filter(|t| **t == Translated::Skipped).count();
            }
        }
    }
    (pairs, diag)
}

fn fraction(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `(Acc=2, Acc>=1)`; `None` when there are no items.
pub fn acc_k(pairs: &[ItemPair]) -> (Option<f64>, Option<f64>) {
    let hits = |p: &ItemPair| (p.first == p.gold) as usize + (p.second == p.gold) as usize;
    let both = pairs.iter().filter(|p| hits(p) == 2).count();
    let any = pairs.iter().filter(|p| hits(p) >= 1).count();
    (fraction(both, pairs.len()), fraction(any, pairs.len()))
}

pub fn percent_agreement(pairs: &[ItemPair]) -> Option<f64> {
    fraction(pairs.iter().filter(|p| p.first == p.second).count(), pairs.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    /// `None` when undefined; `note` then says why.
    pub value: Option<f64>,
    pub observed: Option<f64>,
    pub expected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Cohen's kappa from a square contingency table (`table[a][b]` counts
/// items the first annotator labelled `a` and the second `b`).
pub fn kappa_from_table(table: &[Vec<u64>]) -> Kappa {
    let n: u64 = table.iter().flatten().sum();
    if n == 0 {
        return Kappa {
            value: None,
            observed: None,
            expected: None,
            note: Some("no items".into()),
        };
    }
    let n = n as f64;
    let k = table.len();
    let po = (0..k).map(|i| table[i][i]).sum::<u64>() as f64 / n;
    let pe = (0..k)
        .map(|i| {
            let row: u64 = table[i].iter().sum();
            let col: u64 = table.iter().map(|r| r[i]).sum();
            (row as f64 / n) * (col as f64 / n)
        })
        .sum::<f64>();
    let (value, note) = if (1.0 - pe).abs() < 1e-15 {
        (
            None,
            Some("chance agreement is 1: both annotators used one identical label throughout".into()),
        )
    } else {
        (Some((po - pe) / (1.0 - pe)), None)
    };
    Kappa {
        value,
        observed: Some(po),
        expected: Some(pe),
        note,
    }
}

pub fn cohens_kappa<L: Ord + Clone>(pairs: &[(L, L)]) -> Kappa {
    let labels: Vec<L> = pairs
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx = |l: &L| labels.binary_search(l).expect("label collected above");
    let mut table = vec![vec![0u64; labels.len()]; labels.len()];
    for (a, b) in pairs {
        table[idx(a)][idx(b)] += 1;
    }
    kappa_from_table(&table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionRow {
    pub dimension: Dimension,
    pub items: usize,
    pub acc_both: Option<f64>,
    pub acc_any: Option<f64>,
    pub iaa_percent: Option<f64>,
    pub iaa_kappa: Kappa,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub protocol: Protocol,
    pub records: usize,
    pub rows: Vec<DimensionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub protocols: Vec<ProtocolReport>,
}

pub fn score_dimension(
    records: &[AssessmentRecord],
    protocol: Protocol,
    dim: Dimension,
    dataset: &HashMap<String, DatasetLabels>,
) -> DimensionRow {
    let (pairs, diagnostics) = pair_items(records, protocol, dim, dataset);
    let (acc_both, acc_any) = acc_k(&pairs);
    let label_pairs: Vec<(&str, &str)> = pairs.iter().map(|p| (p.first.as_str(), p.second.as_str())).collect();
    DimensionRow {
        dimension: dim,
        items: pairs.len(),
        acc_both,
        acc_any,
        iaa_percent: percent_agreement(&pairs),
        iaa_kappa: cohens_kappa(&label_pairs),
        diagnostics,
    }
}

/// One block per protocol present in `records`. A2 has no NP row.
pub fn score_records(records: &[AssessmentRecord], dataset: &HashMap<String, DatasetLabels>) -> AgreementReport {
    let present: BTreeSet<Protocol> = records.iter().map(AssessmentRecord::protocol).collect();
    let protocols = present
        .into_iter()
        .map(|protocol| {
            let dims: &[Dimension] = match protocol {
                Protocol::A1 => &Dimension::ALL,
                Protocol::A2 => &Dimension::ALL[1..],
            };
            ProtocolReport {
                protocol,
                records: records.iter().filter(|r| r.protocol() == protocol).count(),
                rows: dims
                    .iter()
                    .map(|&d| score_dimension(records, protocol, d, dataset))
                    .collect(),
            }
        })
        .collect();
    AgreementReport { protocols }
}

fn pct(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{:.2}", 100.0 * v))
}

impl AgreementReport {
    /// Plain-text table: one line per protocol and dimension.
    pub fn to_table(&self) -> String {
        let mut out = String::from("protocol\ttask\titems\tAcc=2\tAcc>=1\tIAA(%)\tIAA(kappa)\n");
        for p in &self.protocols {
            for r in &p.rows {
                let kappa = r.iaa_kappa.value.map_or("undefined".into(), |k| format!("{k:.3}"));
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    p.protocol,
                    r.dimension,
                    r.items,
                    pct(r.acc_both),
                    pct(r.acc_any),
                    pct(r.iaa_percent),
                    kappa
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1(item: &str, who: &str, np: Answer, pl: Answer, de: Answer) -> AssessmentRecord {
        AssessmentRecord {
            item_id: item.into(),
            annotator_id: who.into(),
            judgment: Judgment::A1 {
                np_ok: np,
                plurality_ok: pl,
                definiteness_ok: de,
            },
            timestamp: 0,
        }
    }

    const PLURAL_DEF: DatasetLabels = DatasetLabels {
        plurality: Plurality::Plural,
        definiteness: Definiteness::Definite,
    };

    #[test]
    fn translation() {
        let r = a1("i", "x", Answer::Yes, Answer::Yes, Answer::No);
        assert_eq!(
            translate_decisions(&r, Dimension::Plurality, &PLURAL_DEF),
            Translated::Label("plural")
        );
        assert_eq!(
            translate_decisions(&r, Dimension::Definiteness, &PLURAL_DEF),
            Translated::Label("indefinite")
        );
        let r = a1("i", "x", Answer::Yes, Answer::No, Answer::None);
        assert_eq!(
            translate_decisions(&r, Dimension::Plurality, &PLURAL_DEF),
            Translated::Label("singular")
        );
        assert_eq!(
            translate_decisions(&r, Dimension::Definiteness, &PLURAL_DEF),
            Translated::Skipped
        );
        let r = AssessmentRecord {
            item_id: "i".into(),
            annotator_id: "x".into(),
            judgment: Judgment::A2 {
                plurality_label: None,
                definiteness_label: Some(Definiteness::Definite),
            },
            timestamp: 0,
        };
        assert_eq!(
            translate_decisions(&r, Dimension::Definiteness, &PLURAL_DEF),
            Translated::Label("definite")
        );
        assert_eq!(
            translate_decisions(&r, Dimension::Np, &PLURAL_DEF),
            Translated::NotAsked
        );
    }

    #[test]
    fn kappa_closed_form() {
        let k = kappa_from_table(&[vec![20, 5], vec![10, 15]]);
        assert!((k.observed.unwrap() - 0.7).abs() < 1e-12);
        assert!((k.expected.unwrap() - 0.5).abs() < 1e-12);
        assert!((k.value.unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn kappa_edges() {
        let perfect = [("a", "a"), ("b", "b"), ("a", "a")];
        assert_eq!(cohens_kappa(&perfect).value, Some(1.0));
        let constant = [("a", "a"), ("a", "a")];
        let k = cohens_kappa(&constant);
        assert!(k.value.is_none() && k.note.is_some());
        assert!(cohens_kappa::<&str>(&[]).value.is_none());
    }

    #[test]
    fn acc_and_agreement() {
        let mk = |g: &str, a: &str, b: &str| ItemPair {
            item_id: String::new(),
            gold: g.into(),
            first: a.into(),
            second: b.into(),
        };
        let pairs = [mk("p", "p", "p"), mk("p", "p", "s"), mk("p", "s", "s")];
        let (both, any) = acc_k(&pairs);
        assert_eq!(both, Some(1.0 / 3.0));
        assert_eq!(any, Some(2.0 / 3.0));
        assert_eq!(percent_agreement(&pairs), Some(2.0 / 3.0));
        assert_eq!(acc_k(&[]), (None, None));
    }

    #[test]
    fn grouping_diagnostics() {
        let dataset: HashMap<String, DatasetLabels> =
            ["i1", "i2", "i3"].iter().map(|s| (s.to_string(), PLURAL_DEF)).collect();
        let y = Answer::Yes;
        let records = vec![
            a1("i1", "b", y, y, y),
            a1("i1", "a", y, Answer::No, y),
            a1("i2", "a", y, Answer::None, y),
            a1("i2", "b", y, y, y),
            a1("i3", "a", y, y, y),
            a1("zz", "a", y, y, y),
        ];
        let (pairs, diag) = pair_items(&records, Protocol::A1, Dimension::Plurality, &dataset);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].first, "singular");
        assert_eq!(pairs[0].second, "plural");
        assert_eq!(diag.skipped_items, 1);
        assert_eq!(diag.wrong_record_count, 1);
        assert_eq!(diag.unknown_items, 1);
        let report = score_records(&records, &dataset);
        assert_eq!(report.protocols.len(), 1);
        assert_eq!(report.protocols[0].rows.len(), 3);
        assert!(report.to_table().lines().count() == 4);
    }
}
