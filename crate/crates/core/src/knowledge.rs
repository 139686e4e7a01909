//! Entities, relations, triples and immutable application states.
//!
//! A [`State`] is a snapshot of an application: a set of domain entities and
//! a set of `(subject, relation, object)` triples over them. States double as
//! the knowledge base that logical forms are executed against.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

/// Relation that maps every entity to its entity-type symbol.
pub const TYPE_RELATION: &str = "type";
/// Ordinal position of an entity inside an ordered collection (1-based).
pub const INDEX_RELATION: &str = "index";

/// A domain-specific entity, e.g. `room1` of type `Room`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entity {
    pub id: Arc<str>,
    pub ty: Arc<str>,
}

impl Entity {
    pub fn new(id: impl Into<Arc<str>>, ty: impl Into<Arc<str>>) -> Self {
        Entity {
            id: id.into(),
            ty: ty.into(),
        }
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

/// Anything that can appear in a triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Entity(Entity),
    Int(i64),
    Text(Arc<str>),
    /// Enumeration symbol such as `ON`, `LOADED` or `DEVELOPER`.
    Sym(Arc<str>),
}

impl Value {
    pub fn text(s: impl Into<Arc<str>>) -> Self {
        Value::Text(s.into())
    }

    pub fn sym(s: impl Into<Arc<str>>) -> Self {
        Value::Sym(s.into())
    }

    pub fn entity(id: impl Into<Arc<str>>, ty: impl Into<Arc<str>>) -> Self {
        Value::Entity(Entity::new(id, ty))
    }

    pub fn as_entity(&self) -> Option<&Entity> {
        match self {
            Value::Entity(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }
}

impl From<Entity> for Value {
    fn from(e: Entity) -> Self {
        Value::Entity(e)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Entity(e) => write!(f, "{}", e),
            Value::Int(i) => write!(f, "{}", i),
            Value::Text(t) => write!(f, "{}", t),
            Value::Sym(s) => write!(f, "{}", s),
        }
    }
}

/// A relation name such as `floor` or `lightMode`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation(Arc<str>);

impl Relation {
    pub fn new(name: impl Into<Arc<str>>) -> Self {
        Relation(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_type(&self) -> bool {
        &*self.0 == TYPE_RELATION
    }
}

impl From<&str> for Relation {
    fn from(s: &str) -> Self {
        Relation::new(s)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Entity,
    pub relation: Relation,
    pub object: Value,
}

impl Triple {
    pub fn new(subject: Entity, relation: impl Into<Relation>, object: impl Into<Value>) -> Self {
        Triple {
            subject,
            relation: relation.into(),
            object: object.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KnowledgeError {
    #[error("cannot compare states of domain `{0}` and `{1}`")]
    CrossDomain(String, String),
    #[error("triple references unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("duplicate entity id `{0}`")]
    DuplicateEntity(String),
}

#[derive(Debug, Default)]
struct Indexes {
    objects: BTreeMap<(Entity, Relation), BTreeSet<Value>>,
    subjects: BTreeMap<(Relation, Value), BTreeSet<Value>>,
}

#[derive(Debug)]
struct StateInner {
    domain_id: Arc<str>,
    entities: BTreeSet<Entity>,
    triples: BTreeSet<Triple>,
    indexes: OnceLock<Indexes>,
}

/// Immutable application state. Cloning is cheap.
///
/// The `type` triple of every entity is maintained automatically.
#[derive(Debug, Clone)]
pub struct State(Arc<StateInner>);

impl State {
    pub fn builder(domain_id: impl Into<Arc<str>>) -> StateBuilder {
        StateBuilder {
            domain_id: domain_id.into(),
            entities: BTreeSet::new(),
            triples: BTreeSet::new(),
        }
    }

    pub fn empty(domain_id: impl Into<Arc<str>>) -> State {
        State::builder(domain_id).build_unchecked()
    }

    /// Starts a builder holding a copy of this state.
    pub fn to_builder(&self) -> StateBuilder {
        StateBuilder {
            domain_id: self.0.domain_id.clone(),
            entities: self.0.entities.clone(),
            triples: self.0.triples.clone(),
        }
    }

    pub fn domain_id(&self) -> &str {
        &self.0.domain_id
    }

    pub fn entities(&self) -> &BTreeSet<Entity> {
        &self.0.entities
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.0.triples
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.0.entities.iter().find(|e| &*e.id == id)
    }

    pub fn entities_of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a Entity> + 'a {
        self.0.entities.iter().filter(move |e| &*e.ty == ty)
    }

    fn indexes(&self) -> &Indexes {
        self.0.indexes.get_or_init(|| {
            let mut idx = Indexes::default();
            for t in &self.0.triples {
                idx.objects
                    .entry((t.subject.clone(), t.relation.clone()))
                    .or_default()
                    .insert(t.object.clone());
                idx.subjects
                    .entry((t.relation.clone(), t.object.clone()))
                    .or_default()
                    .insert(Value::Entity(t.subject.clone()));
            }
            idx
        })
    }

    /// `{ o | (subject, relation, o) ∈ KB }`.
    pub fn query_objects(&self, subject: &Value, relation: &Relation) -> BTreeSet<Value> {
        let Value::Entity(subject) = subject else {
            return BTreeSet::new();
        };
        self.indexes()
            .objects
            .get(&(subject.clone(), relation.clone()))
            .cloned()
            .unwrap_or_default()
    }

    /// `{ s | (s, relation, object) ∈ KB }`.
    pub fn query_subjects(&self, relation: &Relation, object: &Value) -> BTreeSet<Value> {
        self.indexes()
            .subjects
            .get(&(relation.clone(), object.clone()))
            .cloned()
            .unwrap_or_default()
    }

    /// First object of `(subject, relation, ·)`, if any.
    pub fn object(&self, subject: &Entity, relation: &str) -> Option<&Value> {
        self.indexes()
            .objects
            .get(&(subject.clone(), Relation::new(relation)))
            .and_then(|s| s.iter().next())
    }

    pub fn int_object(&self, subject: &Entity, relation: &str) -> Option<i64> {
        self.object(subject, relation).and_then(Value::as_int)
    }

    /// All Text values appearing as objects.
    pub fn text_values(&self) -> BTreeSet<Arc<str>> {
        self.0
            .triples
            .iter()
            .filter_map(|t| match &t.object {
                Value::Text(s) => Some(s.clone()),
                _ => None,
            })
            .collect()
    }
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.0.domain_id == other.0.domain_id
            && self.0.entities == other.0.entities
            && self.0.triples == other.0.triples
    }
}

impl Eq for State {}

/// Set equality of entities and triples. Errors when the domains differ.
pub fn states_equal(a: &State, b: &State) -> Result<bool, KnowledgeError> {
    if a.domain_id() != b.domain_id() {
        return Err(KnowledgeError::CrossDomain(
            a.domain_id().to_string(),
            b.domain_id().to_string(),
        ));
    }
    if Arc::ptr_eq(&a.0, &b.0) {
        return Ok(true);
    }
    Ok(a.0.entities == b.0.entities && a.0.triples == b.0.triples)
}

/// Mutable staging area for a [`State`].
#[derive(Debug, Clone)]
pub struct StateBuilder {
    domain_id: Arc<str>,
    entities: BTreeSet<Entity>,
    triples: BTreeSet<Triple>,
}

impl StateBuilder {
    /// Adds an entity together with its `type` triple.
    pub fn add_entity(&mut self, entity: Entity) -> &mut Self {
        self.triples.insert(Triple::new(
            entity.clone(),
            TYPE_RELATION,
            Value::Sym(entity.ty.clone()),
        ));
        self.entities.insert(entity);
        self
    }

    pub fn entity(&mut self, id: &str, ty: &str) -> Entity {
        let e = Entity::new(id, ty);
        self.add_entity(e.clone());
        e
    }

    /// Inserting an existing triple is a no-op.
    pub fn add(&mut self, subject: &Entity, relation: &str, object: impl Into<Value>) -> &mut Self {
        self.triples
            .insert(Triple::new(subject.clone(), relation, object.into()));
        self
    }

    /// Replaces every object of `(subject, relation, ·)` with `object`.
    pub fn set(&mut self, subject: &Entity, relation: &str, object: impl Into<Value>) -> &mut Self {
        self.clear(subject, relation);
        self.add(subject, relation, object)
    }

    pub fn clear(&mut self, subject: &Entity, relation: &str) -> &mut Self {
        self.triples
            .retain(|t| !(t.subject == *subject && t.relation.name() == relation));
        self
    }

    pub fn remove_triple(&mut self, subject: &Entity, relation: &str, object: &Value) -> &mut Self {
        self.triples
            .remove(&Triple::new(subject.clone(), relation, object.clone()));
        self
    }

    /// Removes the entity and every triple it participates in, on either side.
    pub fn remove_entity(&mut self, entity: &Entity) -> &mut Self {
        self.entities.remove(entity);
        let as_value = Value::Entity(entity.clone());
        self.triples
            .retain(|t| t.subject != *entity && t.object != as_value);
        self
    }

    pub fn entities(&self) -> &BTreeSet<Entity> {
        &self.entities
    }

    pub fn objects(&self, subject: &Entity, relation: &str) -> Vec<Value> {
        self.triples
            .iter()
            .filter(|t| t.subject == *subject && t.relation.name() == relation)
            .map(|t| t.object.clone())
            .collect()
    }

    pub fn int_object(&self, subject: &Entity, relation: &str) -> Option<i64> {
        self.objects(subject, relation).iter().find_map(Value::as_int)
    }

    /// Re-numbers the `index` relation of `members` to 1..=n in the given order.
    pub fn reindex<'a>(&mut self, members: impl IntoIterator<Item = &'a Entity>) -> &mut Self {
        for (i, e) in members.into_iter().enumerate() {
            self.set(e, INDEX_RELATION, Value::Int(i as i64 + 1));
        }
        self
    }

    /// Validates that every triple refers to a known entity.
    pub fn build(self) -> Result<State, KnowledgeError> {
        for t in &self.triples {
            if !self.entities.contains(&t.subject) {
                return Err(KnowledgeError::UnknownEntity(t.subject.id.to_string()));
            }
            if let Value::Entity(o) = &t.object {
                if !self.entities.contains(o) {
                    return Err(KnowledgeError::UnknownEntity(o.id.to_string()));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.entities {
            if !seen.insert(e.id.clone()) {
                return Err(KnowledgeError::DuplicateEntity(e.id.to_string()));
            }
        }
        Ok(self.build_unchecked())
    }

    pub fn build_unchecked(self) -> State {
        State(Arc::new(StateInner {
            domain_id: self.domain_id,
            entities: self.entities,
            triples: self.triples,
            indexes: OnceLock::new(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lighting() -> (State, Entity) {
        let mut b = State::builder("lighting");
        let room1 = b.entity("room1", "Room");
        b.add(&room1, "name", Value::text("bedroom"))
            .add(&room1, "floor", Value::Int(2))
            .add(&room1, "lightMode", Value::sym("ON"));
        (b.build().unwrap(), room1)
    }

    #[test]
    fn query_objects_reads_triples() {
        let (s, room1) = lighting();
        let floors = s.query_objects(&room1.clone().into(), &"floor".into());
        assert_eq!(floors, BTreeSet::from([Value::Int(2)]));
        let empty = State::empty("lighting");
        assert!(empty
            .query_objects(&room1.into(), &"floor".into())
            .is_empty());
    }

    #[test]
    fn two_rooms_same_floor() {
        let mut b = State::builder("lighting");
        let r1 = b.entity("room1", "Room");
        let r2 = b.entity("room2", "Room");
        b.add(&r1, "floor", 2i64).add(&r2, "floor", 2i64);
        let s = b.build().unwrap();
        assert_eq!(
            s.query_objects(&r2.clone().into(), &"floor".into()),
            BTreeSet::from([Value::Int(2)])
        );
        assert_eq!(
            s.query_subjects(&"floor".into(), &Value::Int(2)),
            BTreeSet::from([Value::Entity(r1), Value::Entity(r2)])
        );
    }

    #[test]
    fn query_subjects_cases() {
        let (s, room1) = lighting();
        assert_eq!(
            s.query_subjects(&"floor".into(), &Value::Int(2)),
            BTreeSet::from([Value::Entity(room1)])
        );
        assert!(s
            .query_subjects(&"lightMode".into(), &Value::sym("OFF"))
            .is_empty());

        let mut b = State::builder("container");
        let c1 = b.entity("c1", "ShippingContainer");
        let c2 = b.entity("c2", "ShippingContainer");
        b.add(&c1, "length", 3i64).add(&c2, "length", 3i64);
        let s = b.build().unwrap();
        assert_eq!(s.query_subjects(&"length".into(), &Value::Int(3)).len(), 2);
    }

    #[test]
    fn equality_is_order_insensitive() {
        let (a, _) = lighting();
        assert!(states_equal(&a, &a).unwrap());

        let mut b = State::builder("lighting");
        let room1 = b.entity("room1", "Room");
        b.add(&room1, "lightMode", Value::sym("ON"))
            .add(&room1, "floor", Value::Int(2))
            .add(&room1, "name", Value::text("bedroom"));
        let b = b.build().unwrap();
        assert!(states_equal(&a, &b).unwrap());

        let mut c = a.to_builder();
        c.set(&room1, "lightMode", Value::sym("OFF"));
        assert!(!states_equal(&a, &c.build().unwrap()).unwrap());
    }

    #[test]
    fn cross_domain_comparison_errors() {
        let a = State::empty("lighting");
        let b = State::empty("list");
        assert!(matches!(
            states_equal(&a, &b),
            Err(KnowledgeError::CrossDomain(_, _))
        ));
    }

    #[test]
    fn duplicate_insertions_are_idempotent() {
        let mut b = State::builder("list");
        let e = b.entity("e1", "Element");
        b.add(&e, "value", 4i64).add(&e, "value", 4i64);
        let s = b.build().unwrap();
        assert_eq!(s.triples().len(), 2); // value + type
    }

    #[test]
    fn remove_entity_drops_incident_triples() {
        let mut b = State::builder("workforce");
        let boss = b.entity("e1", "Employee");
        let dev = b.entity("e2", "Employee");
        b.add(&dev, "manager", boss.clone());
        b.remove_entity(&boss);
        let s = b.build().unwrap();
        assert_eq!(s.entities().len(), 1);
        assert!(s.query_objects(&dev.into(), &"manager".into()).is_empty());
    }

    #[test]
    fn dangling_triples_rejected() {
        let mut b = State::builder("workforce");
        let boss = Entity::new("e1", "Employee");
        let dev = b.entity("e2", "Employee");
        b.add(&dev, "manager", boss);
        assert!(matches!(b.build(), Err(KnowledgeError::UnknownEntity(_))));
    }

    fn arb_state() -> impl Strategy<Value = State> {
        proptest::collection::vec((0usize..4, 0usize..3, 0i64..3), 0..10).prop_map(|triples| {
            let mut b = State::builder("toy");
            let ents: Vec<Entity> = (0..4).map(|i| b.entity(&format!("x{i}"), "Item")).collect();
            for (s, r, o) in triples {
                b.add(&ents[s], ["a", "b", "c"][r], o);
            }
            b.build().unwrap()
        })
    }

    proptest! {
        #[test]
        fn equality_is_an_equivalence(a in arb_state(), b in arb_state(), c in arb_state()) {
            prop_assert!(states_equal(&a, &a).unwrap());
            prop_assert_eq!(states_equal(&a, &b).unwrap(), states_equal(&b, &a).unwrap());
            if states_equal(&a, &b).unwrap() && states_equal(&b, &c).unwrap() {
                prop_assert!(states_equal(&a, &c).unwrap());
            }
        }

        #[test]
        fn subject_and_object_queries_agree(s in arb_state()) {
            for t in s.triples() {
                let subj = Value::Entity(t.subject.clone());
                prop_assert!(s.query_objects(&subj, &t.relation).contains(&t.object));
                prop_assert!(s.query_subjects(&t.relation, &t.object).contains(&subj));
            }
            for e in s.entities() {
                let subj = Value::Entity(e.clone());
                for r in ["a", "b", "c"] {
                    let rel = Relation::from(r);
                    for o in s.query_objects(&subj, &rel) {
                        prop_assert!(s.query_subjects(&rel, &o).contains(&subj));
                    }
                }
            }
        }
    }
}
