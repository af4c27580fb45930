//! Human-assessment sessions: deterministic sampling, annotator
//! assignment, item serving and append-only record storage.
//!
//! Each session lives in its own directory holding `session.json` (config
//! and plan, written once) and `records.jsonl` (appended per submission).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::classifier::CorpusIndex;
use crate::corpus::{open_jsonl, AnnotatedNP, AssessmentRecord, Protocol};
use crate::error::{Error, Result};
use crate::hashing::stable_hash;

fn default_per_item() -> usize {
    2
}

fn default_context_size() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    /// Chosen by the server when absent.
    #[serde(default)]
    pub id: Option<String>,
    pub protocol: Protocol,
    pub sample_size: usize,
    pub annotators: Vec<String>,
    #[serde(default = "default_per_item")]
    pub annotators_per_item: usize,
    #[serde(default)]
    pub seed: u64,
    /// Show neighbouring sentences with each item.
    #[serde(default)]
    pub include_context: bool,
    #[serde(default = "default_context_size")]
    pub context_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub id: String,
    pub config: SessionConfig,
    /// Sampled dataset ids in serving order.
    pub items: Vec<String>,
    /// Annotator id -> indices into `items`, ascending.
    pub assignments: BTreeMap<String, Vec<usize>>,
}

/// The `sample_size` ids with the smallest seeded hash, in hash order.
pub fn sample_items<'a>(ids: impl IntoIterator<Item = &'a str>, sample_size: usize, seed: u64) -> Result<Vec<String>> {
    let mut keyed: Vec<(u64, &str)> = ids.into_iter().map(|id| (stable_hash(seed, id), id)).collect();
    if sample_size == 0 {
        return Err(Error::validation("sample_size must be at least 1"));
    }
    if sample_size > keyed.len() {
        return Err(Error::validation(format!(
            "sample_size {sample_size} exceeds the {} available items",
            keyed.len()
        )));
    }
    keyed.sort_unstable();
    Ok(keyed
        .into_iter()
        .take(sample_size)
        .map(|(_, id)| id.to_string())
        .collect())
}

/// Item `i` goes to annotators `(i * k + r) mod m` for `r < k`, which are
/// distinct whenever `k <= m`.
pub fn assign(items: usize, annotators: &[String], per_item: usize) -> Result<BTreeMap<String, Vec<usize>>> {
    let m = annotators.len();
    if per_item == 0 || per_item > m {
        return Err(Error::validation(format!(
            "annotators_per_item must be between 1 and the {m} registered annotators"
        )));
    }
    let mut out: BTreeMap<String, Vec<usize>> = annotators.iter().map(|a| (a.clone(), Vec::new())).collect();
    for i in 0..items {
        for r in 0..per_item {
            let a = &annotators[(i * per_item + r) % m];
            out.get_mut(a).expect("registered").push(i);
        }
    }
    Ok(out)
}

impl SessionPlan {
    pub fn build(config: SessionConfig, dataset: &[AnnotatedNP]) -> Result<Self> {
        let unique: HashSet<&String> = config.annotators.iter().collect();
        if unique.len() != config.annotators.len() {
            return Err(Error::validation("annotator ids must be distinct"));
        }
        if config.annotators.iter().any(|a| a.is_empty()) {
            return Err(Error::validation("annotator ids must be non-empty"));
        }
        let items = sample_items(dataset.iter().map(|np| np.id.as_str()), config.sample_size, config.seed)?;
        let assignments = assign(items.len(), &config.annotators, config.annotators_per_item)?;
        let id = match &config.id {
            Some(id) => {
                if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                    return Err(Error::validation("session id may only contain [A-Za-z0-9_-]"));
                }
                id.clone()
            }
            None => {
                let key = serde_json::to_string(&config).expect("config serializes");
                format!("{}-{:016x}", config.protocol, stable_hash(config.seed, &key))
            }
        };
        Ok(SessionPlan {
            id,
            config,
            items,
            assignments,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub key: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub before: Vec<Vec<String>>,
    pub after: Vec<Vec<String>>,
}

/// What an annotator sees for one item. A2 payloads carry no labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemPayload {
    pub session_id: String,
    pub item_id: String,
    pub protocol: Protocol,
    pub tokens: Vec<String>,
    pub np_span: Span,
    pub np_text: String,
    /// Position in this annotator's queue, 0-based.
    pub position: usize,
    pub total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub questions: Option<Vec<Question>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<Context>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NextItem {
    Item(Box<ItemPayload>),
    Done { session_id: String, completed: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatorProgress {
    pub assigned: usize,
    pub completed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStatus {
    pub id: String,
    pub protocol: Protocol,
    pub items: usize,
    pub records: usize,
    pub annotators: BTreeMap<String, AnnotatorProgress>,
    pub complete: bool,
}

fn a1_questions(np: &AnnotatedNP) -> Vec<Question> {
    vec![
        Question {
            key: "np_ok".into(),
            text: "Is the highlighted noun phrase correctly identified?".into(),
        },
        Question {
            key: "plurality_ok".into(),
            text: format!("Is this a {} phrase?", np.plurality),
        },
        Question {
            key: "definiteness_ok".into(),
            text: format!("Is this a {} phrase?", np.definiteness),
        },
    ]
}

struct Session {
    plan: SessionPlan,
    dir: PathBuf,
    records: Vec<AssessmentRecord>,
    submitted: HashSet<(String, String)>,
    /// Per annotator: next queue position to consider.
    cursor: HashMap<String, usize>,
    /// Per annotator: items already handed out.
    served: HashMap<String, HashSet<usize>>,
}

impl Session {
    fn queue(&self, annotator: &str) -> Result<&[usize]> {
        self.plan
            .assignments
            .get(annotator)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Unauthorized {
                session: self.plan.id.clone(),
                annotator: annotator.to_string(),
            })
    }

    fn is_done(&self, annotator: &str, item: usize) -> bool {
        self.submitted
            .contains(&(self.plan.items[item].clone(), annotator.to_string()))
    }

    fn completed(&self, annotator: &str) -> usize {
        self.records.iter().filter(|r| r.annotator_id == annotator).count()
    }

    fn status(&self) -> SessionStatus {
        let annotators: BTreeMap<String, AnnotatorProgress> = self
            .plan
            .assignments
            .iter()
            .map(|(a, q)| {
                (
                    a.clone(),
                    AnnotatorProgress {
                        assigned: q.len(),
                        completed: self.completed(a),
                    },
                )
            })
            .collect();
        SessionStatus {
            id: self.plan.id.clone(),
            protocol: self.plan.config.protocol,
            items: self.plan.items.len(),
            records: self.records.len(),
            complete: annotators.values().all(|p| p.assigned == p.completed),
            annotators,
        }
    }
}

/// All sessions under one root directory, over one dataset and corpus.
pub struct SessionStore {
    root: PathBuf,
    dataset: HashMap<String, AnnotatedNP>,
    dataset_order: Vec<AnnotatedNP>,
    corpus: CorpusIndex,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

const PLAN_FILE: &str = "session.json";
const RECORDS_FILE: &str = "records.jsonl";

impl SessionStore {
    /// Opens `root`, creating it if needed, and reloads every session
    /// found there.
    pub fn open(root: impl Into<PathBuf>, dataset: Vec<AnnotatedNP>, corpus: CorpusIndex) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        let store = SessionStore {
            dataset: dataset.iter().map(|np| (np.id.clone(), np.clone())).collect(),
            dataset_order: dataset,
            corpus,
            sessions: Mutex::new(HashMap::new()),
            root,
        };
        let mut dirs: Vec<PathBuf> = fs::read_dir(&store.root)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(PLAN_FILE).is_file())
            .collect();
        dirs.sort();
        for dir in dirs {
            let session = store.reload(&dir)?;
            store
                .sessions
                .lock()
                .expect("session map lock")
                .insert(session.plan.id.clone(), Arc::new(Mutex::new(session)));
        }
        Ok(store)
    }

    fn reload(&self, dir: &Path) -> Result<Session> {
        let plan: SessionPlan = serde_json::from_reader(File::open(dir.join(PLAN_FILE))?)
            .map_err(|source| Error::Json { line: 1, source })?;
        let mut session = Session {
            plan,
            dir: dir.to_path_buf(),
            records: Vec::new(),
            submitted: HashSet::new(),
            cursor: HashMap::new(),
            served: HashMap::new(),
        };
        let path = dir.join(RECORDS_FILE);
        if path.exists() {
            for item in open_jsonl::<AssessmentRecord>(&path)? {
                let (_, r) = item?;
                session.submitted.insert((r.item_id.clone(), r.annotator_id.clone()));
                session.records.push(r);
            }
        }
        // Items served but never answered before the restart are served again.
        for (annotator, queue) in &session.plan.assignments {
            let served: HashSet<usize> = queue
                .iter()
                .copied()
                .filter(|&i| session.is_done(annotator, i))
                .collect();
            session.served.insert(annotator.clone(), served);
        }
        Ok(session)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .lock()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::SessionNotFound(id.to_string()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .lock()
            .expect("session map lock")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    pub fn create(&self, config: SessionConfig) -> Result<SessionPlan> {
        let plan = SessionPlan::build(config, &self.dataset_order)?;
        let mut sessions = self.sessions.lock().expect("session map lock");
        if sessions.contains_key(&plan.id) {
            return Err(Error::Conflict(format!("session {} already exists", plan.id)));
        }
        let dir = self.root.join(&plan.id);
        fs::create_dir_all(&dir)?;
        let tmp = dir.join("session.json.tmp");
        {
            let mut f = File::create(&tmp)?;
            serde_json::to_writer_pretty(&mut f, &plan).map_err(|e| Error::Io(e.into()))?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, dir.join(PLAN_FILE))?;
        File::create(dir.join(RECORDS_FILE))?;
        let session = Session {
            plan: plan.clone(),
            dir,
            records: Vec::new(),
            submitted: HashSet::new(),
            cursor: HashMap::new(),
            served: HashMap::new(),
        };
        sessions.insert(plan.id.clone(), Arc::new(Mutex::new(session)));
        Ok(plan)
    }

    pub fn plan(&self, id: &str) -> Result<SessionPlan> {
        Ok(self.get(id)?.lock().expect("session lock").plan.clone())
    }

    pub fn status(&self, id: &str) -> Result<SessionStatus> {
        Ok(self.get(id)?.lock().expect("session lock").status())
    }

    /// The annotator's next unanswered item in plan order, or `Done`.
    pub fn next_item(&self, id: &str, annotator: &str) -> Result<NextItem> {
        let handle = self.get(id)?;
        let mut s = handle.lock().expect("session lock");
        let queue = s.queue(annotator)?.to_vec();
        let start = s.cursor.get(annotator).copied().unwrap_or(0);
        let served = s.served.get(annotator).cloned().unwrap_or_default();
        let Some(pos) = (start..queue.len()).find(|&p| !served.contains(&queue[p]) && !s.is_done(annotator, queue[p]))
        else {
            return Ok(NextItem::Done {
                session_id: s.plan.id.clone(),
                completed: s.completed(annotator),
            });
        };
        let item = queue[pos];
        let payload = self.payload(&s.plan, item, pos, queue.len())?;
        s.cursor.insert(annotator.to_string(), pos + 1);
        s.served.entry(annotator.to_string()).or_default().insert(item);
        Ok(NextItem::Item(Box::new(payload)))
    }

    fn payload(&self, plan: &SessionPlan, item: usize, position: usize, total: usize) -> Result<ItemPayload> {
        let item_id = &plan.items[item];
        let np = self
            .dataset
            .get(item_id)
            .ok_or_else(|| Error::validation(format!("item {item_id} is not in the loaded dataset")))?;
        let (before, sentence, after) = self
            .corpus
            .window(&np.sent_id, plan.config.context_size)
            .ok_or_else(|| Error::UnknownSentence(np.sent_id.clone()))?;
        let context = plan.config.include_context.then(|| Context {
            before: before.iter().map(|s| s.zh_tokens.clone()).collect(),
            after: after.iter().map(|s| s.zh_tokens.clone()).collect(),
        });
        Ok(ItemPayload {
            session_id: plan.id.clone(),
            item_id: item_id.clone(),
            protocol: plan.config.protocol,
            tokens: sentence.zh_tokens.clone(),
            np_span: Span {
                start: np.zh_span.start,
                end: np.zh_span.end,
            },
            np_text: np.zh_text.clone(),
            position,
            total,
            questions: (plan.config.protocol == Protocol::A1).then(|| a1_questions(np)),
            context,
        })
    }

    /// Validates and durably appends one record.
    pub fn submit(&self, id: &str, record: AssessmentRecord) -> Result<SessionStatus> {
        let handle = self.get(id)?;
        let mut s = handle.lock().expect("session lock");
        let queue = s.queue(&record.annotator_id)?;
        if record.protocol() != s.plan.config.protocol {
            return Err(Error::validation(format!(
                "session {} uses protocol {}, record has {}",
                s.plan.id,
                s.plan.config.protocol,
                record.protocol()
            )));
        }
        let Some(item) = s.plan.items.iter().position(|i| *i == record.item_id) else {
            return Err(Error::validation(format!(
                "item {} is not part of session {}",
                record.item_id, s.plan.id
            )));
        };
        if !queue.contains(&item) {
            return Err(Error::validation(format!(
                "item {} is not assigned to annotator {}",
                record.item_id, record.annotator_id
            )));
        }
        let key = (record.item_id.clone(), record.annotator_id.clone());
        if s.submitted.contains(&key) {
            return Err(Error::Conflict(format!(
                "annotator {} already judged item {}",
                record.annotator_id, record.item_id
            )));
        }
        if !s
            .served
            .get(&record.annotator_id)
            .is_some_and(|set| set.contains(&item))
        {
            return Err(Error::validation(format!(
                "item {} has not been served to annotator {}",
                record.item_id, record.annotator_id
            )));
        }
        let mut line = serde_json::to_vec(&record).map_err(|e| Error::Io(e.into()))?;
        line.push(b'\n');
        let mut f = OpenOptions::new()
            .append(true)
            .create(true)
            .open(s.dir.join(RECORDS_FILE))?;
        f.write_all(&line)?;
        f.sync_data()?;
        s.submitted.insert(key);
        s.records.push(record);
        Ok(s.status())
    }

    /// The records file as stored, one record per line.
    pub fn export(&self, id: &str) -> Result<String> {
        let handle = self.get(id)?;
        let s = handle.lock().expect("session lock");
        Ok(fs::read_to_string(s.dir.join(RECORDS_FILE))?)
    }

    pub fn records(&self, id: &str) -> Result<Vec<AssessmentRecord>> {
        Ok(self.get(id)?.lock().expect("session lock").records.clone())
    }
}
