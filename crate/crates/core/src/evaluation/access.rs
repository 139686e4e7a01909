//! Records which domains' data, descriptions and logic each experiment phase
//! touches.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::domain::{ApplicationLogic, Domain, DomainException, DomainRegistry, Example, GenerationRanges, MethodCall};
use crate::knowledge::State;

use super::{Dataset, EvaluationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Tuning,
    Training,
    Testing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessKind {
    TrainExamples,
    TestExamples,
    /// The domain definition, including its description phrases.
    Definition,
    /// One application-logic invocation.
    Logic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessCount {
    pub phase: Phase,
    pub domain: String,
    pub kind: AccessKind,
    pub count: usize,
}

impl fmt::Display for AccessCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {} {:?} x{}", self.phase, self.domain, self.kind, self.count)
    }
}

#[derive(Debug)]
struct Inner {
    phase: Phase,
    counts: BTreeMap<(Phase, String, AccessKind), usize>,
}

/// Shared access counter with a current phase.
#[derive(Debug, Clone)]
pub struct AccessLog(Arc<Mutex<Inner>>);

impl Default for AccessLog {
    fn default() -> Self {
        AccessLog(Arc::new(Mutex::new(Inner {
            phase: Phase::Tuning,
            counts: BTreeMap::new(),
        })))
    }
}

impl AccessLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_phase(&self, phase: Phase) {
        self.0.lock().expect("access log poisoned").phase = phase;
    }

    pub fn record(&self, domain: &str, kind: AccessKind) {
        let mut inner = self.0.lock().expect("access log poisoned");
        let phase = inner.phase;
        *inner.counts.entry((phase, domain.to_string(), kind)).or_insert(0) += 1;
    }

    pub fn counts(&self) -> Vec<AccessCount> {
        let inner = self.0.lock().expect("access log poisoned");
        inner
            .counts
            .iter()
            .map(|((phase, domain, kind), count)| AccessCount {
                phase: *phase,
                domain: domain.clone(),
                kind: *kind,
                count: *count,
            })
            .collect()
    }
}

struct LoggedLogic {
    inner: Arc<dyn ApplicationLogic>,
    domain: String,
    log: AccessLog,
}

impl ApplicationLogic for LoggedLogic {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        self.log.record(&self.domain, AccessKind::Logic);
        self.inner.invoke(state, call)
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        self.inner.initial_state(ranges, rng)
    }
}

/// The only way experiment code reaches domains and examples.
pub struct Monitored<'a> {
    registry: &'a DomainRegistry,
    dataset: &'a Dataset,
    log: AccessLog,
}

impl<'a> Monitored<'a> {
    pub fn new(registry: &'a DomainRegistry, dataset: &'a Dataset, log: AccessLog) -> Self {
        Monitored { registry, dataset, log }
    }

    pub fn log(&self) -> &AccessLog {
        &self.log
    }

    /// The domain with its logic wrapped so that invocations are counted.
    pub fn domain(&self, id: &str) -> Result<Arc<Domain>, EvaluationError> {
        let d = self
            .registry
            .get(id)
            .ok_or_else(|| EvaluationError::UnknownDomain(id.to_string()))?;
        self.log.record(&d.id, AccessKind::Definition);
        Ok(Arc::new(d.with_logic(Arc::new(LoggedLogic {
            inner: d.logic().clone(),
            domain: d.id.clone(),
            log: self.log.clone(),
        }))))
    }

    pub fn train_examples(&self, id: &str) -> Result<&'a [Example], EvaluationError> {
        self.log.record(id, AccessKind::TrainExamples);
        self.dataset
            .train
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| EvaluationError::MissingData(id.to_string()))
    }

    pub fn test_examples(&self, id: &str) -> Result<&'a [Example], EvaluationError> {
        self.log.record(id, AccessKind::TestExamples);
        Ok(self.dataset.test.get(id).map(Vec::as_slice).unwrap_or(&[]))
    }
}
