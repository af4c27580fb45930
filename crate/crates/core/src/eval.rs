//! Confusion matrices, precision/recall/F1, merged binary predictions and
//! explicit/implicit subset scoring.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::Task;
use crate::corpus::{open_jsonl, Definiteness, FourWay, Plurality};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// `counts[gold][pred]`
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        assert_eq!(counts.len(), classes.len());
        assert!(counts.iter().all(|r| r.len() == classes.len()));
        ConfusionMatrix { classes, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }

    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| (0..self.classes.len()).map(|i| self.counts[i][i]).sum::<u64>() as f64 / total as f64)
    }

    /// Element-wise sum; both matrices must share the class list.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.classes, other.classes);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.iter_mut().zip(b).for_each(|(a, b)| *a += b);
        }
    }

    /// CSV with a header row of predicted labels and one row per gold label.
    pub fn to_csv(&self, axis_labels: &[String]) -> String {
        let mut out = String::from("gold\\pred");
        for l in axis_labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in axis_labels.iter().zip(&self.counts) {
            out.push_str(l);
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Short axis labels: S/P, D/I, and I-S, I-P, D-S, D-P for the joint task.
pub fn axis_labels(classes: &[String]) -> Vec<String> {
    classes
        .iter()
        .map(|c| match c.as_str() {
            "singular" => "S".into(),
            "plural" => "P".into(),
            "definite" => "D".into(),
            "indefinite" => "I".into(),
            "indefinite-singular" => "I-S".into(),
            "indefinite-plural" => "I-P".into(),
            "definite-singular" => "D-S".into(),
            "definite-plural" => "D-P".into(),
            other => other.to_string(),
        })
        .collect()
}

pub fn confusion<G: AsRef<str>, P: AsRef<str>>(
    golds: &[G],
    preds: &[P],
    classes: &[String],
) -> Result<ConfusionMatrix> {
    if golds.len() != preds.len() {
        return Err(Error::LengthMismatch {
            golds: golds.len(),
            preds: preds.len(),
        });
    }
    let index = |label: &str| {
        classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_string(),
                expected: classes.to_vec(),
            })
    };
    let mut m = ConfusionMatrix::new(classes.to_vec());
    for (g, p) in golds.iter().zip(preds) {
        let (g, p) = (index(g.as_ref())?, index(p.as_ref())?);
        m.counts[g][p] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    Macro,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Some component had a zero denominator and was set to 0.
    pub zero_division: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn per_class(m: &ConfusionMatrix) -> Vec<ClassScores> {
    (0..m.classes.len())
        .map(|c| {
            let tp = m.counts[c][c];
            let (p, zp) = ratio(tp, m.predicted(c));
            let (r, zr) = ratio(tp, m.support(c));
            let (f1, zf) = if p + r > 0.0 {
                (2.0 * p * r / (p + r), false)
            } else {
                (0.0, true)
            };
            ClassScores {
                class: m.classes[c].clone(),
                precision: p,
                recall: r,
                f1,
                support: m.support(c),
                zero_division: zp || zr || zf,
            }
        })
        .collect()
}

/// Macro: unweighted mean over classes. Weighted: mean weighted by gold
/// support (all zeros when the matrix is empty).
pub fn prf(m: &ConfusionMatrix, averaging: Averaging) -> Scores {
    let pcs = per_class(m);
    let weights: Vec<f64> = match averaging {
        Averaging::Macro => vec![1.0 / pcs.len().max(1) as f64; pcs.len()],
        Averaging::Weighted => {
            let total = m.total();
            pcs.iter()
                .map(|c| {
                    if total == 0 {
                        0.0
                    } else {
                        c.support as f64 / total as f64
                    }
                })
                .collect()
        }
    };
    let avg = |f: fn(&ClassScores) -> f64| pcs.iter().zip(&weights).map(|(c, w)| w * f(c)).sum::<f64>();
    Scores {
        precision: avg(|c| c.precision),
        recall: avg(|c| c.recall),
        f1: avg(|c| c.f1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: Task,
    pub instances: u64,
    pub accuracy: Option<f64>,
    pub per_class: Vec<ClassScores>,
    #[serde(rename = "macro")]
    pub macro_avg: Scores,
    pub weighted: Scores,
    pub zero_division: bool,
    pub confusion: ConfusionMatrix,
}

impl MetricReport {
    pub fn from_confusion(task: Task, m: ConfusionMatrix) -> Self {
        let per_class = per_class(&m);
        MetricReport {
            task,
            instances: m.total(),
            accuracy: m.accuracy(),
            zero_division: per_class.iter().any(|c| c.zero_division),
            per_class,
            macro_avg: prf(&m, Averaging::Macro),
            weighted: prf(&m, Averaging::Weighted),
            confusion: m,
        }
    }

    pub fn compute<G: AsRef<str>, P: AsRef<str>>(task: Task, golds: &[G], preds: &[P]) -> Result<Self> {
        Ok(Self::from_confusion(task, confusion(golds, preds, &task.classes())?))
    }

    pub fn confusion_csv(&self) -> String {
        self.confusion.to_csv(&axis_labels(&self.confusion.classes))
    }
}

/// Pairs plurality and definiteness predictions by id into joint labels.
pub fn merge_binary(
    plurality: &BTreeMap<String, Plurality>,
    definiteness: &BTreeMap<String, Definiteness>,
) -> Result<BTreeMap<String, FourWay>> {
    let p: BTreeSet<&String> = plurality.keys().collect();
    let d: BTreeSet<&String> = definiteness.keys().collect();
    if p != d {
        return Err(Error::IdMismatch {
            missing_first: d.difference(&p).map(|s| s.to_string()).collect(),
            missing_second: p.difference(&d).map(|s| s.to_string()).collect(),
        });
    }
    Ok(plurality
        .iter()
        .map(|(id, &pl)| (id.clone(), FourWay::from_parts(definiteness[id], pl)))
        .collect())
}

/// Sums a joint confusion matrix over one dimension. `keep` is the task
/// whose axes survive (plurality or definiteness).
pub fn marginalize(m: &ConfusionMatrix, keep: Task) -> Result<ConfusionMatrix> {
    if m.classes != Task::Fourway.classes() {
        return Err(Error::validation("marginalization needs a 4-way confusion matrix"));
    }
    let project = |label: &str| -> usize {
        let fw = FourWay::from_str(label).expect("4-way class");
        match keep {
            Task::Plurality => Plurality::ALL.iter().position(|&p| p == fw.plurality()).unwrap(),
            _ => Definiteness::ALL.iter().position(|&d| d == fw.definiteness()).unwrap(),
        }
    };
    if keep == Task::Fourway {
        return Err(Error::validation("cannot marginalize onto the 4-way task"));
    }
    let mut out = ConfusionMatrix::new(keep.classes());
    for (g, row) in m.counts.iter().enumerate() {
        for (p, &c) in row.iter().enumerate() {
            out.counts[project(&m.classes[g])][project(&m.classes[p])] += c;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    /// `None` when the subset is empty.
    pub explicit: Option<MetricReport>,
    pub implicit: Option<MetricReport>,
    pub explicit_count: usize,
    pub implicit_count: usize,
}

pub fn subset_eval<G: AsRef<str>, P: AsRef<str>>(
    task: Task,
    golds: &[G],
    preds: &[P],
    mask: &[bool],
) -> Result<SubsetReport> {
    if golds.len() != preds.len() || golds.len() != mask.len() {
        return Err(Error::LengthMismatch {
            golds: golds.len(),
            preds: preds.len().min(mask.len()),
        });
    }
    let part = |want: bool| -> Result<(Option<MetricReport>, usize)> {
        let idx: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] == want).collect();
        if idx.is_empty() {
            return Ok((None, 0));
        }
        let g: Vec<&str> = idx.iter().map(|&i| golds[i].as_ref()).collect();
        let p: Vec<&str> = idx.iter().map(|&i| preds[i].as_ref()).collect();
        Ok((Some(MetricReport::compute(task, &g, &p)?), idx.len()))
    };
    let (explicit, explicit_count) = part(true)?;
    let (implicit, implicit_count) = part(false)?;
    Ok(SubsetReport {
        explicit,
        implicit,
        explicit_count,
        implicit_count,
    })
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionLine {
    pub id: String,
    pub task: Task,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    pub task: Option<Task>,
    pub labels: BTreeMap<String, String>,
}

impl PredictionSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Reads and validates a prediction file. Every line must share one task
/// and carry a label from that task's class set.
pub fn import_predictions(path: impl AsRef<Path>) -> Result<PredictionSet> {
    let mut set = PredictionSet::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for item in open_jsonl::<PredictionLine>(path)? {
        let (line, p) = item?;
        if let Some(task) = set.task {
            if task != p.task {
                return Err(Error::InvalidRecord {
                    line,
                    id: p.id,
                    reason: format!("task {} differs from earlier lines ({task})", p.task),
                });
            }
        }
        set.task = Some(p.task);
        let classes = p.task.classes();
        if !classes.contains(&p.label) {
            return Err(Error::InvalidRecord {
                line,
                id: p.id,
                reason: format!("unknown label {:?} for task {}", p.label, p.task),
            });
        }
        if let Some(&first) = seen.get(&p.id) {
            return Err(Error::DuplicateId {
                line,
                id: format!("{} (first seen on line {first})", p.id),
            });
        }
        seen.insert(p.id.clone(), line);
        set.labels.insert(p.id, p.label);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn confusion_basics() {
        let c = classes(&["s", "p"]);
        let m = confusion(&["s", "p"], &["s", "p"], &c).unwrap();
        assert_eq!(m.counts, [[1, 0], [0, 1]]);
        let m = confusion(&["s"], &["p"], &c).unwrap();
        assert_eq!(m.counts, [[0, 1], [0, 0]]);
        let err = confusion(&["x"], &["s"], &c).unwrap_err();
        assert!(err.to_string().contains("\"x\""), "{err}");
    }

    #[test]
    fn perfect_diagonal() {
        let m = ConfusionMatrix::from_counts(
            classes(&["a", "b", "c"]),
            vec![vec![3, 0, 0], vec![0, 2, 0], vec![0, 0, 5]],
        );
        for avg in [Averaging::Macro, Averaging::Weighted] {
            assert_eq!(
                prf(&m, avg),
                Scores {
                    precision: 1.0,
                    recall: 1.0,
                    f1: 1.0
                }
            );
        }
    }

    #[test]
    fn empty_class_contributes_zero() {
        let m = ConfusionMatrix::from_counts(classes(&["a", "b"]), vec![vec![4, 0], vec![0, 0]]);
        let pcs = per_class(&m);
        assert!(pcs[1].zero_division);
        assert_eq!((pcs[1].precision, pcs[1].recall, pcs[1].f1), (0.0, 0.0, 0.0));
        assert_eq!(prf(&m, Averaging::Macro).f1, 0.5);
        assert_eq!(prf(&m, Averaging::Weighted).f1, 1.0);
    }

    #[test]
    fn merge_pairs_and_mismatch() {
        let p: BTreeMap<_, _> = [("a".to_string(), Plurality::Plural)].into();
        let d: BTreeMap<_, _> = [("a".to_string(), Definiteness::Definite)].into();
        assert_eq!(merge_binary(&p, &d).unwrap()["a"], FourWay::DefinitePlural);
        let d2: BTreeMap<_, _> = [("b".to_string(), Definiteness::Definite)].into();
        match merge_binary(&p, &d2).unwrap_err() {
            Error::IdMismatch {
                missing_first,
                missing_second,
            } => {
                assert_eq!(missing_first, ["b"]);
                assert_eq!(missing_second, ["a"]);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn subsets() {
        let r = subset_eval(
            Task::Plurality,
            &["singular", "plural"],
            &["singular", "plural"],
            &[true, true],
        )
        .unwrap();
        assert!(r.implicit.is_none());
        assert_eq!(r.explicit.unwrap().macro_avg.f1, 1.0);
        let r = subset_eval(
            Task::Plurality,
            &["singular", "plural"],
            &["singular", "plural"],
            &[true, false],
        )
        .unwrap();
        assert_eq!(r.explicit.unwrap().accuracy, Some(1.0));
        assert_eq!(r.implicit.unwrap().accuracy, Some(1.0));
    }

    #[test]
    fn csv_axes() {
        let m = confusion(&["definite-plural"], &["indefinite-singular"], &Task::Fourway.classes()).unwrap();
        let csv = m.to_csv(&axis_labels(&m.classes));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "gold\\pred,I-S,I-P,D-S,D-P");
        assert_eq!(lines[4], "D-P,1,0,0,0");
    }

    fn write(lines: &[&str]) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn import_valid_and_invalid() {
        let f = write(&[
            r#"{"id":"a","task":"plurality","label":"plural"}"#,
            r#"{"id":"b","task":"plurality","label":"singular","scores":{"singular":0.9,"plural":0.1}}"#,
            r#"{"id":"c","task":"plurality","label":"plural"}"#,
        ]);
        assert_eq!(import_predictions(f.path()).unwrap().len(), 3);

        let f = write(&[
            r#"{"id":"a","task":"plurality","label":"plural"}"#,
            r#"{"id":"a","task":"plurality","label":"plural"}"#,
        ]);
        assert!(matches!(
            import_predictions(f.path()),
            Err(Error::DuplicateId { line: 2, .. })
        ));

        let f = write(&[r#"{"id":"a","task":"plurality","label":"both"}"#]);
        assert!(matches!(
            import_predictions(f.path()),
            Err(Error::InvalidRecord { line: 1, .. })
        ));

        let f = write(&[r#"{"id":"a","task":"plurality"}"#]);
        let err = import_predictions(f.path()).unwrap_err();
        assert!(matches!(err, Error::Json { line: 1, .. }), "{err:?}");
        assert!(err.to_string().contains("label"), "{err}");
    }
}
