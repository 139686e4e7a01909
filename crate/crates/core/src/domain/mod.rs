//! Domains: entity types, relations, interface methods and their application
//! logic, plus random generation of (initial state, desired state) pairs.

pub mod builtin;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knowledge::{Entity, State, Value, INDEX_RELATION, TYPE_RELATION};

/// What the objects of a relation look like.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectKind {
    Entity(String),
    Int,
    Text,
    Sym(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSpec {
    pub name: String,
    pub subjects: Vec<String>,
    pub object: ObjectKind,
}

impl RelationSpec {
    pub fn new(name: &str, subjects: &[&str], object: ObjectKind) -> Self {
        RelationSpec {
            name: name.to_string(),
            subjects: subjects.iter().map(|s| s.to_string()).collect(),
            object,
        }
    }

    pub fn is_integer_valued(&self) -> bool {
        self.object == ObjectKind::Int
    }

    pub fn is_entity_valued(&self) -> bool {
        matches!(self.object, ObjectKind::Entity(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParameterSpec {
    EntityCollection(String),
    SingleEntity(String),
    IntegerArg,
    EnumArg(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceMethod {
    pub name: String,
    pub parameters: Vec<ParameterSpec>,
    pub description_phrases: Vec<String>,
}

impl InterfaceMethod {
    pub fn new(name: &str, parameters: Vec<ParameterSpec>, phrases: &[&str]) -> Self {
        InterfaceMethod {
            name: name.to_string(),
            parameters,
            description_phrases: phrases.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.parameters.len()
    }
}

/// An interface method applied to an argument list. Every argument is a set
/// of values; single-valued parameters receive singleton sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodCall {
    pub method: Arc<str>,
    pub arguments: Vec<BTreeSet<Value>>,
}

impl MethodCall {
    pub fn new(method: &str, arguments: Vec<BTreeSet<Value>>) -> Self {
        MethodCall {
            method: method.into(),
            arguments,
        }
    }
}

impl fmt::Display for MethodCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.method)?;
        for (i, arg) in self.arguments.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("{")?;
            for (j, v) in arg.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("}")?;
        }
        f.write_str(")")
    }
}

/// Raised by application logic when it rejects a call.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{0}")]
pub struct DomainException(pub String);

impl DomainException {
    pub fn new(msg: impl Into<String>) -> Self {
        DomainException(msg.into())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("domain `{domain}` has no method `{method}`")]
    UnknownMethod { domain: String, method: String },
    #[error("`{method}` takes {expected} arguments, got {got}")]
    Arity {
        method: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of `{method}`: {reason}")]
    BadArgument {
        method: String,
        index: usize,
        reason: String,
    },
    #[error("application logic rejected the call: {0}")]
    Rejected(#[from] DomainException),
}

/// Deterministic per-domain behaviour.
pub trait ApplicationLogic: Send + Sync {
    /// Applies a (conforming) call. Must not depend on anything but its inputs.
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException>;

    /// Draws a random, structurally valid initial state.
    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State;
}

/// Named inclusive integer ranges used by state generation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenerationRanges(BTreeMap<String, (i64, i64)>);

impl GenerationRanges {
    pub fn new(ranges: &[(&str, i64, i64)]) -> Self {
        GenerationRanges(
            ranges
                .iter()
                .map(|&(k, lo, hi)| (k.to_string(), (lo, hi)))
                .collect(),
        )
    }

    pub fn get(&self, key: &str) -> (i64, i64) {
        *self
            .0
            .get(key)
            .unwrap_or_else(|| panic!("generation range `{key}` is not configured"))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn sample(&self, key: &str, rng: &mut dyn RngCore) -> i64 {
        let (lo, hi) = self.get(key);
        rng.gen_range(lo..=hi)
    }

    pub fn sample_usize(&self, key: &str, rng: &mut dyn RngCore) -> usize {
        self.sample(key, rng).max(0) as usize
    }

    /// Overrides known keys; unknown keys are rejected.
    pub fn merged(&self, overrides: &GenerationRanges) -> Result<GenerationRanges, String> {
        let mut out = self.clone();
        for (k, &(lo, hi)) in &overrides.0 {
            if !self.0.contains_key(k) {
                return Err(format!("unknown generation range `{k}`"));
            }
            if lo > hi {
                return Err(format!("generation range `{k}` has min > max"));
            }
            out.0.insert(k.clone(), (lo, hi));
        }
        Ok(out)
    }
}

/// A domain definition together with its application logic.
#[derive(Clone)]
pub struct Domain {
    pub id: String,
    pub entity_types: Vec<String>,
    pub relations: Vec<RelationSpec>,
    pub methods: Vec<InterfaceMethod>,
    /// Extra phrases per relation name, used by the feature lexicon.
    pub relation_synonyms: BTreeMap<String, Vec<String>>,
    pub generation: GenerationRanges,
    logic: Arc<dyn ApplicationLogic>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("id", &self.id)
            .field("entity_types", &self.entity_types)
            .field("methods", &self.methods.iter().map(|m| &m.name).collect::<Vec<_>>())
            .finish()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DefinitionError {
    #[error("method `{0}` must have between 1 and 3 description phrases")]
    DescriptionPhrases(String),
    #[error("method name `{0}` is declared twice")]
    DuplicateMethod(String),
    #[error("relation `{0}` is reserved")]
    ReservedRelation(String),
    #[error("`{0}` refers to undeclared entity type `{1}`")]
    UnknownType(String, String),
}

impl Domain {
    pub fn new(
        id: &str,
        entity_types: &[&str],
        relations: Vec<RelationSpec>,
        methods: Vec<InterfaceMethod>,
        generation: GenerationRanges,
        logic: Arc<dyn ApplicationLogic>,
    ) -> Result<Domain, DefinitionError> {
        let types: Vec<String> = entity_types.iter().map(|s| s.to_string()).collect();
        let mut names = BTreeSet::new();
        for m in &methods {
            if m.description_phrases.is_empty() || m.description_phrases.len() > 3 {
                return Err(DefinitionError::DescriptionPhrases(m.name.clone()));
            }
            if !names.insert(m.name.clone()) {
                return Err(DefinitionError::DuplicateMethod(m.name.clone()));
            }
            for p in &m.parameters {
                if let ParameterSpec::EntityCollection(t) | ParameterSpec::SingleEntity(t) = p {
                    if !types.contains(t) {
                        return Err(DefinitionError::UnknownType(m.name.clone(), t.clone()));
                    }
                }
            }
        }
        for r in &relations {
            if r.name == TYPE_RELATION {
                return Err(DefinitionError::ReservedRelation(r.name.clone()));
            }
            for t in &r.subjects {
                if !types.contains(t) {
                    return Err(DefinitionError::UnknownType(r.name.clone(), t.clone()));
                }
            }
        }
        Ok(Domain {
            id: id.to_string(),
            entity_types: types,
            relations,
            methods,
            relation_synonyms: BTreeMap::new(),
            generation,
            logic,
        })
    }

    pub fn with_synonyms(mut self, relation: &str, phrases: &[&str]) -> Self {
        self.relation_synonyms
            .entry(relation.to_string())
            .or_default()
            .extend(phrases.iter().map(|s| s.to_string()));
        self
    }

    /// Same definition, different logic (e.g. an instrumented wrapper).
    pub fn with_logic(&self, logic: Arc<dyn ApplicationLogic>) -> Domain {
        Domain {
            logic,
            ..self.clone()
        }
    }

    pub fn logic(&self) -> &Arc<dyn ApplicationLogic> {
        &self.logic
    }

    pub fn method(&self, name: &str) -> Option<&InterfaceMethod> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSpec> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Every enumeration symbol that may appear in a state or a call.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for r in &self.relations {
            if let ObjectKind::Sym(syms) = &r.object {
                out.extend(syms.iter().cloned());
            }
        }
        for m in &self.methods {
            for p in &m.parameters {
                if let ParameterSpec::EnumArg(syms) = p {
                    out.extend(syms.iter().cloned());
                }
            }
        }
        out
    }

    /// Checks `call` against its method signature and the state's entities.
    pub fn check_call(&self, state: &State, call: &MethodCall) -> Result<(), DomainError> {
        let method = self
            .method(&call.method)
            .ok_or_else(|| DomainError::UnknownMethod {
                domain: self.id.clone(),
                method: call.method.to_string(),
            })?;
        if method.arity() != call.arguments.len() {
            return Err(DomainError::Arity {
                method: method.name.clone(),
                expected: method.arity(),
                got: call.arguments.len(),
            });
        }
        for (index, (spec, arg)) in method.parameters.iter().zip(&call.arguments).enumerate() {
            check_argument(spec, arg, state).map_err(|reason| DomainError::BadArgument {
                method: method.name.clone(),
                index,
                reason,
            })?;
        }
        Ok(())
    }

    /// Validates and applies `call`. Never mutates `state`.
    pub fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainError> {
        self.check_call(state, call)?;
        Ok(self.logic.invoke(state, call)?)
    }
}

/// Whether `arg` fills a parameter of kind `spec`.
pub fn check_argument(spec: &ParameterSpec, arg: &BTreeSet<Value>, state: &State) -> Result<(), String> {
    if arg.is_empty() {
        return Err("empty argument".into());
    }
    let entity_of = |v: &Value, ty: &str| -> Result<(), String> {
        match v {
            Value::Entity(e) if &*e.ty == ty && state.entities().contains(e) => Ok(()),
            Value::Entity(e) if &*e.ty == ty => Err(format!("entity `{}` is not in the state", e.id)),
            other => Err(format!("`{other}` is not a {ty}")),
        }
    };
    match spec {
        ParameterSpec::EntityCollection(ty) => arg.iter().try_for_each(|v| entity_of(v, ty)),
        ParameterSpec::SingleEntity(ty) => {
            if arg.len() != 1 {
                return Err(format!("expected a single {ty}, got {}", arg.len()));
            }
            entity_of(arg.iter().next().unwrap(), ty)
        }
        ParameterSpec::IntegerArg => match single(arg)? {
            Value::Int(_) => Ok(()),
            other => Err(format!("`{other}` is not an integer")),
        },
        ParameterSpec::EnumArg(allowed) => match single(arg)? {
            Value::Sym(s) if allowed.iter().any(|a| a == &**s) => Ok(()),
            other => Err(format!("`{other}` is not one of {allowed:?}")),
        },
    }
}

fn single(arg: &BTreeSet<Value>) -> Result<&Value, String> {
    if arg.len() != 1 {
        return Err(format!("expected a single value, got {}", arg.len()));
    }
    Ok(arg.iter().next().unwrap())
}

/// Domains keyed by id. Lookup is case-insensitive.
#[derive(Debug, Clone, Default)]
pub struct DomainRegistry {
    domains: BTreeMap<String, Arc<Domain>>,
}

impl DomainRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The seven built-in domains.
    pub fn builtin() -> Self {
        let mut reg = DomainRegistry::new();
        for d in builtin::builtin_domains() {
            reg.register(d);
        }
        reg
    }

    pub fn register(&mut self, domain: Domain) {
        self.domains
            .insert(domain.id.to_lowercase(), Arc::new(domain));
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Domain>> {
        self.domains.get(&id.to_lowercase())
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.domains.values().map(|d| d.id.as_str())
    }

    pub fn domains(&self) -> impl Iterator<Item = &Arc<Domain>> {
        self.domains.values()
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }
}

/// An `(initial state, utterance, desired state)` training or test example.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub domain_id: String,
    pub initial: State,
    pub utterance: String,
    pub desired: State,
}

/// Output of [`generate_state_pair`].
#[derive(Debug, Clone)]
pub struct StatePair {
    pub initial: State,
    pub call: MethodCall,
    pub desired: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationLimits {
    /// Argument draws per initial state before it is discarded.
    pub max_argument_draws: usize,
    /// Initial states tried before giving up.
    pub max_restarts: usize,
}

impl Default for GenerationLimits {
    fn default() -> Self {
        GenerationLimits {
            max_argument_draws: 1000,
            max_restarts: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerationStats {
    /// Initial states discarded after exhausting their argument draws.
    pub restarts: usize,
    pub argument_draws: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerationError {
    #[error("domain `{domain}` has no method `{method}`")]
    UnknownMethod { domain: String, method: String },
    #[error("no state-changing call for `{method}` after {restarts} initial states")]
    Exhausted { method: String, restarts: usize },
}

pub fn generate_initial_state(domain: &Domain, rng: &mut dyn RngCore) -> State {
    domain.logic.initial_state(&domain.generation, rng)
}

/// Draws random arguments for `method` from the entities of `state`.
/// Returns `None` when some parameter cannot be filled.
pub fn random_call(
    domain: &Domain,
    method: &InterfaceMethod,
    state: &State,
    rng: &mut dyn RngCore,
) -> Option<MethodCall> {
    let mut arguments = Vec::with_capacity(method.arity());
    for p in &method.parameters {
        let arg: BTreeSet<Value> = match p {
            ParameterSpec::EntityCollection(ty) => {
                let pool: Vec<&Entity> = state.entities_of_type(ty).collect();
                if pool.is_empty() {
                    return None;
                }
                let mut picked: BTreeSet<Value> = pool
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|e| Value::Entity((*e).clone()))
                    .collect();
                if picked.is_empty() {
                    picked.insert(Value::Entity((*pool.choose(rng)?).clone()));
                }
                picked
            }
            ParameterSpec::SingleEntity(ty) => {
                let pool: Vec<&Entity> = state.entities_of_type(ty).collect();
                BTreeSet::from([Value::Entity((*pool.choose(rng)?).clone())])
            }
            ParameterSpec::IntegerArg => {
                let (lo, hi) = if domain.generation.contains("int_arg") {
                    domain.generation.get("int_arg")
                } else {
                    (1, 10)
                };
                BTreeSet::from([Value::Int(rng.gen_range(lo..=hi))])
            }
            ParameterSpec::EnumArg(allowed) => {
                BTreeSet::from([Value::sym(allowed.choose(rng)?.as_str())])
            }
        };
        arguments.push(arg);
    }
    Some(MethodCall::new(&method.name, arguments))
}

/// Random initial state, random arguments, invoke; retry arguments when the
/// call fails or changes nothing, and discard the initial state after
/// `max_argument_draws` failed draws.
pub fn generate_state_pair(
    domain: &Domain,
    method: &str,
    rng: &mut dyn RngCore,
) -> Result<StatePair, GenerationError> {
    generate_state_pair_with(domain, method, rng, GenerationLimits::default(), |d, r| {
        generate_initial_state(d, r)
    })
    .map(|(pair, _)| pair)
}

/// [`generate_state_pair`] with explicit limits and initial-state source.
pub fn generate_state_pair_with<F>(
    domain: &Domain,
    method: &str,
    rng: &mut dyn RngCore,
    limits: GenerationLimits,
    mut initial_state: F,
) -> Result<(StatePair, GenerationStats), GenerationError>
where
    F: FnMut(&Domain, &mut dyn RngCore) -> State,
{
    let m = domain
        .method(method)
        .ok_or_else(|| GenerationError::UnknownMethod {
            domain: domain.id.clone(),
            method: method.to_string(),
        })?;
    let mut stats = GenerationStats::default();
    for _ in 0..limits.max_restarts {
        let initial = initial_state(domain, rng);
        for _ in 0..limits.max_argument_draws {
            stats.argument_draws += 1;
            let Some(call) = random_call(domain, m, &initial, rng) else {
                continue;
            };
            match domain.invoke(&initial, &call) {
                Ok(desired) if desired != initial => {
                    return Ok((
                        StatePair {
                            initial,
                            call,
                            desired,
                        },
                        stats,
                    ));
                }
                _ => {}
            }
        }
        stats.restarts += 1;
    }
    Err(GenerationError::Exhausted {
        method: method.to_string(),
        restarts: stats.restarts,
    })
}

/// Checks the invariants every generated state must satisfy: declared
/// relations only, and contiguous 1-based `index` values per ordered group.
pub fn validate_state(domain: &Domain, state: &State) -> Result<(), String> {
    for t in state.triples() {
        let name = t.relation.name();
        if name == TYPE_RELATION {
            continue;
        }
        let spec = domain
            .relation(name)
            .ok_or_else(|| format!("undeclared relation `{name}`"))?;
        if !spec.subjects.iter().any(|s| s == &*t.subject.ty) {
            return Err(format!("`{name}` is not declared for {}", t.subject.ty));
        }
        let ok = match (&spec.object, &t.object) {
            (ObjectKind::Int, Value::Int(_)) | (ObjectKind::Text, Value::Text(_)) => true,
            (ObjectKind::Entity(ty), Value::Entity(e)) => &*e.ty == ty,
            (ObjectKind::Sym(allowed), Value::Sym(s)) => allowed.iter().any(|a| a == &**s),
            _ => false,
        };
        if !ok {
            return Err(format!("bad object `{}` for `{name}`", t.object));
        }
    }
    for e in state.entities() {
        if !domain.entity_types.iter().any(|t| t == &*e.ty) {
            return Err(format!("undeclared entity type `{}`", e.ty));
        }
    }
    Ok(())
}

/// Values of the `index` relation among `members`, sorted.
pub fn index_values<'a>(state: &State, members: impl IntoIterator<Item = &'a Entity>) -> Vec<i64> {
    let mut out: Vec<i64> = members
        .into_iter()
        .filter_map(|e| state.int_object(e, INDEX_RELATION))
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn description_phrase_bounds() {
        let logic = builtin::lighting::logic();
        let too_many = InterfaceMethod::new("m", vec![], &["a", "b", "c", "d"]);
        let err = Domain::new("x", &[], vec![], vec![too_many], GenerationRanges::default(), logic.clone());
        assert_eq!(err.unwrap_err(), DefinitionError::DescriptionPhrases("m".into()));
        let none = InterfaceMethod::new("m", vec![], &[]);
        assert!(Domain::new("x", &[], vec![], vec![none], GenerationRanges::default(), logic).is_err());
    }

    #[test]
    fn duplicate_method_rejected() {
        let logic = builtin::lighting::logic();
        let m = InterfaceMethod::new("m", vec![], &["a"]);
        let err = Domain::new("x", &[], vec![], vec![m.clone(), m], GenerationRanges::default(), logic);
        assert_eq!(err.unwrap_err(), DefinitionError::DuplicateMethod("m".into()));
    }

    #[test]
    fn degenerate_range_forces_count() {
        let reg = DomainRegistry::builtin();
        let mut list = (**reg.get("list").unwrap()).clone();
        list.generation = list
            .generation
            .merged(&GenerationRanges::new(&[("elements", 5, 5)]))
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let s = generate_initial_state(&list, &mut rng);
            assert_eq!(s.entities().len(), 5);
        }
    }

    #[test]
    fn unknown_range_override_rejected() {
        let reg = DomainRegistry::builtin();
        let list = reg.get("list").unwrap();
        assert!(list
            .generation
            .merged(&GenerationRanges::new(&[("nope", 1, 2)]))
            .is_err());
    }

    #[test]
    fn registry_lookup_is_case_insensitive() {
        let reg = DomainRegistry::builtin();
        assert!(reg.get("Lighting").is_some());
        assert!(reg.get("LIGHTING").is_some());
        assert!(reg.get("Spreadsheet").is_none());
        assert_eq!(reg.len(), 7);
    }
}
