//! Feature-based classifiers for plurality, definiteness and the joint
//! 4-way label, from `*`-marked Chinese contexts.

mod context;
mod features;
pub mod linear;

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use context::{build_context, CorpusIndex, MarkedInstance, MARKER};
pub use features::{featurize, FeatureVector, SparseVec, Vocabulary, DEFAULT_ORDERS};
pub use linear::{fit_logistic, fit_svm, hinge_objective, logistic_objective, OptimConfig, Params};

use crate::corpus::{AnnotatedNP, Definiteness, FourWay, Plurality};
use crate::error::{Error, Result};
use crate::eval::{confusion, prf, Averaging};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Plurality,
    Definiteness,
    Fourway,
}

impl Task {
    /// Fixed class order; prediction ties resolve to the earliest class.
    pub fn classes(self) -> Vec<String> {
        let names: Vec<&str> = match self {
            Task::Plurality => Plurality::ALL.iter().map(|l| l.as_str()).collect(),
            Task::Definiteness => Definiteness::ALL.iter().map(|l| l.as_str()).collect(),
            Task::Fourway => FourWay::ALL.iter().map(|l| l.as_str()).collect(),
        };
        names.into_iter().map(String::from).collect()
    }

    pub fn gold(self, np: &AnnotatedNP) -> &'static str {
        match self {
            Task::Plurality => np.plurality.as_str(),
            Task::Definiteness => np.definiteness.as_str(),
            Task::Fourway => np.four_way().as_str(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Plurality => "plurality",
            Task::Definiteness => "definiteness",
            Task::Fourway => "fourway",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plurality" => Ok(Task::Plurality),
            "definiteness" => Ok(Task::Definiteness),
            "fourway" | "4way" | "four-way" => Ok(Task::Fourway),
            _ => Err(Error::config(format!("unknown task {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Logistic,
    LinearSvm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::LinearSvm => "linear-svm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" | "lr" => Ok(ModelKind::Logistic),
            "linear-svm" | "svm" => Ok(ModelKind::LinearSvm),
            _ => Err(Error::config(format!("unknown model kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub min_freq: u32,
    pub orders: Vec<usize>,
    /// Scale each feature vector to unit L2 norm.
    pub normalize: bool,
    /// Recorded for provenance; training itself has no random component.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2.0,
            epochs: 1000,
            l2: 1e-4,
            min_freq: 2,
            orders: DEFAULT_ORDERS.to_vec(),
            normalize: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn optim(&self) -> OptimConfig {
        OptimConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    pub class: usize,
    pub scores: Vec<f64>,
}

/// A trained model with everything needed to featurize new instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub task: Task,
    pub kind: ModelKind,
    pub classes: Vec<String>,
    pub context_size: usize,
    pub config: TrainConfig,
    pub vocabulary: Vocabulary,
    pub params: Params,
    pub final_loss: f64,
}

impl LinearModel {
    pub fn vectorize(&self, instance: &MarkedInstance) -> SparseVec {
        let fv = featurize(&instance.tokens, &self.config.orders);
        self.vocabulary.vectorize(&fv, self.config.normalize)
    }

    /// Highest-scoring class; exact ties go to the earliest class. Logistic
    /// scores are class probabilities, SVM scores are raw margins.
    pub fn predict(&self, instance: &MarkedInstance) -> Prediction {
        let raw = self.params.scores(&self.vectorize(instance));
        let class = argmax(&raw);
        let scores = match self.kind {
            ModelKind::Logistic => softmax(&raw),
            ModelKind::LinearSvm => raw,
        };
        Prediction {
            label: self.classes[class].clone(),
            class,
            scores,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, self).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut model: LinearModel =
            serde_json::from_reader(reader).map_err(|source| Error::Json { line: 1, source })?;
        model.vocabulary.reindex();
        let dim = model.vocabulary.len();
        if model.params.weights.len() != model.classes.len()
            || model.params.weights.iter().any(|w| w.len() != dim)
            || model.params.bias.len() != model.classes.len()
        {
            return Err(Error::validation(
                "model weights do not match its vocabulary and classes",
            ));
        }
        Ok(model)
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

fn label_indices(instances: &[MarkedInstance], classes: &[String]) -> Result<Vec<usize>> {
    instances
        .iter()
        .map(|inst| {
            classes
                .iter()
                .position(|c| *c == inst.label)
                .ok_or_else(|| Error::UnknownLabel {
                    label: inst.label.clone(),
                    expected: classes.to_vec(),
                })
        })
        .collect()
}

/// Fits a model on labelled instances. The vocabulary comes from these
/// instances only.
pub fn train(instances: &[MarkedInstance], task: Task, kind: ModelKind, config: &TrainConfig) -> Result<LinearModel> {
    let classes = task.classes();
    let ys = label_indices(instances, &classes)?;
    let mut present: Vec<usize> = ys.clone();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        let only = present.first().map_or("none".to_string(), |&c| classes[c].clone());
        return Err(Error::SingleClass(only));
    }
    let fvs: Vec<FeatureVector> = instances.iter().map(|i| featurize(&i.tokens, &config.orders)).collect();
    let vocabulary = Vocabulary::build(&fvs, config.min_freq);
    let xs: Vec<SparseVec> = fvs
        .iter()
        .map(|fv| vocabulary.vectorize(fv, config.normalize))
        .collect();
    let (params, history) = match kind {
        ModelKind::Logistic => fit_logistic(&xs, &ys, classes.len(), vocabulary.len(), &config.optim())?,
        ModelKind::LinearSvm => fit_svm(&xs, &ys, classes.len(), vocabulary.len(), &config.optim())?,
    };
    Ok(LinearModel {
        task,
        kind,
        classes,
        context_size: instances.first().map_or(0, |i| i.context_size),
        config: config.clone(),
        vocabulary,
        params,
        final_loss: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Macro-F1 of a model on labelled instances.
pub fn macro_f1(model: &LinearModel, instances: &[MarkedInstance]) -> Result<f64> {
    let golds: Vec<&str> = instances.iter().map(|i| i.label.as_str()).collect();
    let preds: Vec<String> = instances.iter().map(|i| model.predict(i).label).collect();
    let preds: Vec<&str> = preds.iter().map(String::as_str).collect();
    let m = confusion(&golds, &preds, &model.classes)?;
    Ok(prf(&m, Averaging::Macro).f1)
}

/// Grid search over L2 strengths; keeps the model with the best dev
/// macro-F1 (earliest grid value on ties). Returns the model and the
/// `(l2, dev macro-F1)` trace.
pub fn tune_l2(
    train_set: &[MarkedInstance],
    dev_set: &[MarkedInstance],
    task: Task,
    kind: ModelKind,
    base: &TrainConfig,
    grid: &[f64],
) -> Result<(LinearModel, Vec<(f64, f64)>)> {
    if grid.is_empty() {
        return Err(Error::config("empty l2 grid"));
    }
    let mut best: Option<(f64, LinearModel)> = None;
    let mut trace = Vec::new();
    for &l2 in grid {
        let cfg = TrainConfig { l2, ..base.clone() };
        let model = train(train_set, task, kind, &cfg)?;
        let f1 = macro_f1(&model, dev_set)?;
        trace.push((l2, f1));
        if best.as_ref().is_none_or(|(b, _)| f1 > *b) {
            best = Some((f1, model));
        }
    }
    Ok((best.expect("grid is non-empty").1, trace))
}
