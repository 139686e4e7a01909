//! Phrases that can evoke each predicate of a domain.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::text::{split_identifier, stem, tokenize, NAME_STOPWORDS};
use crate::domain::Domain;
use crate::knowledge::{Value, TYPE_RELATION};
use crate::logical_form::{LogicalForm, SuperlativeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredicateKind {
    Method,
    Relation,
    Type,
    Operator,
    Value,
}

impl PredicateKind {
    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::Method => "method",
            PredicateKind::Relation => "relation",
            PredicateKind::Type => "type",
            PredicateKind::Operator => "operator",
            PredicateKind::Value => "value",
        }
    }
}

/// A symbol of the logical-form language. Value predicates are named by
/// their printed literal, which never reaches a feature name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub kind: PredicateKind,
    pub name: Arc<str>,
}

impl Predicate {
    pub fn new(kind: PredicateKind, name: &str) -> Self {
        Predicate {
            kind,
            name: name.into(),
        }
    }

    pub fn value(v: &Value) -> Self {
        Predicate::new(PredicateKind::Value, &LogicalForm::Value(v.clone()).to_string())
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.name(), self.name)
    }
}

pub const AND: &str = "and";
pub const FORWARD: &str = "forward";

/// Every predicate occurring in `lf`, with repetitions.
pub fn predicates_of(lf: &LogicalForm, out: &mut Vec<Predicate>) {
    match lf {
        LogicalForm::Value(v) => out.push(Predicate::value(v)),
        LogicalForm::TypeSet(t) => out.push(Predicate::new(PredicateKind::Type, t)),
        LogicalForm::ReverseJoin(r, z) => {
            out.push(Predicate::new(PredicateKind::Relation, r.name()));
            predicates_of(z, out);
        }
        LogicalForm::ForwardJoin(r, z) => {
            out.push(Predicate::new(PredicateKind::Relation, r.name()));
            out.push(Predicate::new(PredicateKind::Operator, FORWARD));
            predicates_of(z, out);
        }
        LogicalForm::Intersect(a, b) => {
            out.push(Predicate::new(PredicateKind::Operator, AND));
            predicates_of(a, out);
            predicates_of(b, out);
        }
        LogicalForm::Superlative { kind, set, key } => {
            out.push(Predicate::new(PredicateKind::Operator, kind.name()));
            out.push(Predicate::new(PredicateKind::Relation, key.name()));
            predicates_of(set, out);
        }
        LogicalForm::Call(m, args) => {
            out.push(Predicate::new(PredicateKind::Method, m));
            for a in args {
                predicates_of(a, out);
            }
        }
    }
}

/// Where a lexicon phrase came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Via {
    /// Tokens of the predicate's own name.
    Name,
    /// A method description phrase.
    Desc,
    /// Operator word lists and configured relation synonyms.
    Builtin,
}

impl Via {
    pub fn name(self) -> &'static str {
        match self {
            Via::Name => "name",
            Via::Desc => "desc",
            Via::Builtin => "builtin",
        }
    }
}

pub const ARGMAX_PHRASES: [&str; 6] = ["largest", "longest", "biggest", "most", "last", "highest"];
pub const ARGMIN_PHRASES: [&str; 5] = ["smallest", "shortest", "first", "least", "lowest"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<Predicate, BTreeMap<String, Via>>,
}

impl Lexicon {
    /// Builds the lexicon of `domain`. With `stemming`, phrases are stemmed
    /// token by token.
    pub fn build(domain: &Domain, stemming: bool) -> Lexicon {
        let mut lex = Lexicon::default();
        for m in &domain.methods {
            let p = Predicate::new(PredicateKind::Method, &m.name);
            lex.add_name(&p, &m.name, stemming);
            for phrase in &m.description_phrases {
                lex.add(&p, phrase, Via::Desc, stemming);
            }
        }
        for r in &domain.relations {
            let p = Predicate::new(PredicateKind::Relation, &r.name);
            lex.add_name(&p, &r.name, stemming);
            for syn in domain.relation_synonyms.get(&r.name).into_iter().flatten() {
                lex.add(&p, syn, Via::Builtin, stemming);
            }
        }
        for t in &domain.entity_types {
            lex.add_name(&Predicate::new(PredicateKind::Type, t), t, stemming);
        }
        for sym in domain.symbols() {
            lex.add_name(&Predicate::value(&Value::sym(sym.as_str())), &sym, stemming);
        }
        let ops = [
            (SuperlativeKind::Argmax.name(), &ARGMAX_PHRASES[..]),
            (SuperlativeKind::Argmin.name(), &ARGMIN_PHRASES[..]),
        ];
        for (op, phrases) in ops {
            let p = Predicate::new(PredicateKind::Operator, op);
            for phrase in phrases {
                lex.add(&p, phrase, Via::Builtin, stemming);
            }
        }
        lex
    }

    fn add(&mut self, p: &Predicate, phrase: &str, via: Via, stemming: bool) {
        let toks: Vec<String> = tokenize(phrase)
            .into_iter()
            .map(|t| if stemming { stem(&t) } else { t })
            .collect();
        if toks.is_empty() {
            return;
        }
        let entry = self.entries.entry(p.clone()).or_default();
        let slot = entry.entry(toks.join(" ")).or_insert(via);
        *slot = (*slot).min(via);
    }

    /// Unigrams and bigrams of the name's tokens, skipping stopwords.
    fn add_name(&mut self, p: &Predicate, name: &str, stemming: bool) {
        let toks = split_identifier(name);
        for (i, t) in toks.iter().enumerate() {
            if NAME_STOPWORDS.contains(&t.as_str()) {
                continue;
            }
            self.add(p, t, Via::Name, stemming);
            if let Some(next) = toks.get(i + 1) {
                if !NAME_STOPWORDS.contains(&next.as_str()) {
                    self.add(p, &format!("{t} {next}"), Via::Name, stemming);
                }
            }
        }
        if toks.len() > 1 {
            self.add(p, &toks.concat(), Via::Name, stemming);
        }
    }

    pub fn phrases(&self, p: &Predicate) -> impl Iterator<Item = (&str, Via)> {
        self.entries
            .get(p)
            .into_iter()
            .flatten()
            .map(|(s, v)| (s.as_str(), *v))
    }

    pub fn predicates(&self) -> impl Iterator<Item = &Predicate> {
        self.entries.keys()
    }

    pub fn contains(&self, p: &Predicate, phrase: &str) -> bool {
        self.entries.get(p).is_some_and(|e| e.contains_key(phrase))
    }
}

/// Every non-value predicate the grammar can produce for `domain`, in a
/// fixed order.
pub fn domain_predicates(domain: &Domain) -> Vec<Predicate> {
    let mut out = Vec::new();
    for m in &domain.methods {
        out.push(Predicate::new(PredicateKind::Method, &m.name));
    }
    for r in &domain.relations {
        out.push(Predicate::new(PredicateKind::Relation, &r.name));
    }
    out.push(Predicate::new(PredicateKind::Relation, TYPE_RELATION));
    for t in &domain.entity_types {
        out.push(Predicate::new(PredicateKind::Type, t));
    }
    for op in [SuperlativeKind::Argmax.name(), SuperlativeKind::Argmin.name(), AND, FORWARD] {
        out.push(Predicate::new(PredicateKind::Operator, op));
    }
    out.sort();
    out.dedup();
    out
}
