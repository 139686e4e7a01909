//! Line-delimited dataset files.
//!
//! The first line is a header record; every other line is one example. State
//! objects carry a kind tag: `{"int":4}`, `{"str":"bedroom"}`, `{"sym":"ON"}`
//! or `{"ent":"room1"}`. `type` triples are implied by the entity list and
//! never written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{validate_state, DomainRegistry, Example, MethodCall};
use crate::evaluation::Dataset;
use crate::knowledge::{Entity, State, Value, TYPE_RELATION};

pub const DATASET_FORMAT: &str = "zsparse-dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub format: String,
    pub version: u32,
}

impl Default for Header {
    fn default() -> Self {
        Header {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaggedValue {
    #[serde(rename = "int")]
    Int(i64),
    #[serde(rename = "str")]
    Str(String),
    #[serde(rename = "sym")]
    Sym(String),
    #[serde(rename = "ent")]
    Ent(String),
}

impl From<&Value> for TaggedValue {
    fn from(v: &Value) -> Self {
        match v {
            Value::Int(i) => TaggedValue::Int(*i),
            Value::Text(t) => TaggedValue::Str(t.to_string()),
            Value::Sym(s) => TaggedValue::Sym(s.to_string()),
            Value::Entity(e) => TaggedValue::Ent(e.id.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityRecord {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub entities: Vec<EntityRecord>,
    #[serde(default)]
    pub triples: Vec<(String, String, TaggedValue)>,
}

impl StateRecord {
    pub fn from_state(state: &State) -> Self {
        StateRecord {
            entities: state
                .entities()
                .iter()
                .map(|e| EntityRecord {
                    id: e.id.to_string(),
                    ty: e.ty.to_string(),
                })
                .collect(),
            triples: state
                .triples()
                .iter()
                .filter(|t| t.relation.name() != TYPE_RELATION)
                .map(|t| (t.subject.id.to_string(), t.relation.name().to_string(), (&t.object).into()))
                .collect(),
        }
    }

    pub fn to_state(&self, domain_id: &str) -> Result<State, String> {
        let mut b = State::builder(domain_id);
        let mut by_id: BTreeMap<&str, Entity> = BTreeMap::new();
        for e in &self.entities {
            let ent = b.entity(&e.id, &e.ty);
            if by_id.insert(&e.id, ent).is_some() {
                return Err(format!("duplicate entity `{}`", e.id));
            }
        }
        let lookup = |id: &str| by_id.get(id).cloned().ok_or_else(|| format!("unknown entity `{id}`"));
        for (s, r, o) in &self.triples {
            if r == TYPE_RELATION {
                return Err("`type` triples are implied by the entity list".into());
            }
            let object = match o {
                TaggedValue::Int(i) => Value::Int(*i),
                TaggedValue::Str(t) => Value::text(t.as_str()),
                TaggedValue::Sym(t) => Value::sym(t.as_str()),
                TaggedValue::Ent(id) => Value::Entity(lookup(id)?),
            };
            b.add(&lookup(s)?, r, object);
        }
        b.build().map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub id: String,
    pub domain: String,
    pub utterance: String,
    pub initial: StateRecord,
    pub desired: StateRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl Record {
    pub fn from_example(ex: &Example, split: Option<Split>) -> Self {
        Record {
            id: ex.id.clone(),
            domain: ex.domain_id.clone(),
            utterance: ex.utterance.clone(),
            initial: StateRecord::from_state(&ex.initial),
            desired: StateRecord::from_state(&ex.desired),
            split,
        }
    }

    /// Resolves the domain id through `registry` and checks both states
    /// against the domain.
    pub fn to_example(&self, registry: &DomainRegistry) -> Result<Example, String> {
        let domain = registry
            .get(&self.domain)
            .ok_or_else(|| format!("unknown domain `{}`", self.domain))?;
        let initial = self.initial.to_state(&domain.id).map_err(|e| format!("initial: {e}"))?;
        let desired = self.desired.to_state(&domain.id).map_err(|e| format!("desired: {e}"))?;
        validate_state(domain, &initial).map_err(|e| format!("initial: {e}"))?;
        validate_state(domain, &desired).map_err(|e| format!("desired: {e}"))?;
        Ok(Example {
            id: self.id.clone(),
            domain_id: domain.id.clone(),
            initial,
            utterance: self.utterance.clone(),
            desired,
        })
    }
}

/// A malformed dataset line.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}:{line}: {message}")]
pub struct DataError {
    pub path: PathBuf,
    pub line: usize,
    pub message: String,
}

pub fn write_records<'a>(path: &Path, records: impl IntoIterator<Item = &'a Record>) -> std::io::Result<()> {
    let mut out = serde_json::to_string(&Header::default()).map_err(std::io::Error::other)?;
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(std::io::Error::other)?);
        out.push('\n');
    }
    crate::write_atomic(path, out.as_bytes())
}

pub fn write_examples(path: &Path, examples: &[(Example, Option<Split>)]) -> std::io::Result<()> {
    let records: Vec<Record> = examples.iter().map(|(e, s)| Record::from_example(e, *s)).collect();
    write_records(path, &records)
}

/// Records of a dataset file. Blank lines are skipped.
pub fn read_records(path: &Path) -> Result<Vec<Record>, DataError> {
    let err = |line, message: String| DataError {
        path: path.to_path_buf(),
        line,
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(0, e.to_string()))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((n, first)) = lines.next() else {
        return Err(err(1, "missing header record".into()));
    };
    let header: Header = serde_json::from_str(first).map_err(|e| err(n + 1, format!("header: {e}")))?;
    if header.format != DATASET_FORMAT || header.version != DATASET_VERSION {
        return Err(err(
            n + 1,
            format!("unsupported format {} version {}", header.format, header.version),
        ));
    }
    lines
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| err(n + 1, e.to_string())))
        .collect()
}

/// Examples with their optional split markers.
pub fn read_examples(path: &Path, registry: &DomainRegistry) -> Result<Vec<(Example, Option<Split>)>, DataError> {
    let records = read_records(path)?;
    let mut seen = std::collections::BTreeSet::new();
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let err = |message| DataError {
                path: path.to_path_buf(),
                line: i + 2,
                message,
            };
            if !seen.insert(r.id.clone()) {
                return Err(err(format!("duplicate id `{}`", r.id)));
            }
            Ok((r.to_example(registry).map_err(|m| err(format!("{}: {m}", r.id)))?, r.split))
        })
        .collect()
}

/// Groups examples by domain. With split markers on every record those
/// decide; otherwise the first `train_per_domain` of each domain train.
pub fn to_dataset(examples: Vec<(Example, Option<Split>)>, train_per_domain: usize) -> Result<Dataset, String> {
    let marked = examples.iter().filter(|(_, s)| s.is_some()).count();
    if marked == 0 {
        let mut by_domain: BTreeMap<String, Vec<Example>> = BTreeMap::new();
        for (e, _) in examples {
            by_domain.entry(e.domain_id.clone()).or_default().push(e);
        }
        return Ok(Dataset::split(by_domain, train_per_domain));
    }
    if marked != examples.len() {
        return Err(format!("{marked} of {} records carry a split; mark all or none", examples.len()));
    }
    let mut ds = Dataset::default();
    for (e, s) in examples {
        let side = match s {
            Some(Split::Test) => &mut ds.test,
            _ => &mut ds.train,
        };
        side.entry(e.domain_id.clone()).or_default().push(e);
    }
    Ok(ds)
}

/// The gold call of a generated example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldRecord {
    pub id: String,
    pub method: String,
    pub arguments: Vec<Vec<TaggedValue>>,
}

impl GoldRecord {
    pub fn new(id: &str, call: &MethodCall) -> Self {
        GoldRecord {
            id: id.into(),
            method: call.method.to_string(),
            arguments: call
                .arguments
                .iter()
                .map(|a| a.iter().map(TaggedValue::from).collect())
                .collect(),
        }
    }
}

/// Sidecar path for the gold calls of `dataset`: `x.jsonl` → `x.gold.jsonl`.
pub fn gold_path(dataset: &Path) -> PathBuf {
    let stem = dataset.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    dataset.with_file_name(format!("{stem}.gold.jsonl"))
}

/// Writes the gold sidecar. There is deliberately no reader in the library:
/// nothing that trains or evaluates may see gold calls.
pub fn write_gold(path: &Path, gold: &[GoldRecord]) -> std::io::Result<()> {
    let mut out = String::new();
    for g in gold {
        let line = serde_json::to_string(g).map_err(std::io::Error::other)?;
        let _ = writeln!(out, "{line}");
    }
    crate::write_atomic(path, out.as_bytes())
}
