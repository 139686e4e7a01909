//! Template-generated examples: utterances are built from a method's
//! description phrases and referring expressions for its arguments, so the
//! gold logical form is known.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{generate_initial_state, Domain, DomainRegistry, Example, ObjectKind, ParameterSpec};
use crate::features::{split_identifier, ARGMAX_PHRASES, ARGMIN_PHRASES};
use crate::knowledge::{Entity, Relation, State, Value};
use crate::logical_form::{denote, execute, Denotation, LogicalForm, SuperlativeKind};

const ORDINALS: [&str; 10] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
];

/// A generated example with the form it was generated from.
#[derive(Debug, Clone)]
pub struct SyntheticExample {
    pub example: Example,
    pub gold: LogicalForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub per_domain: usize,
    pub seed: u64,
    /// Attempts per example before giving up on it.
    pub max_attempts: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            per_domain: 200,
            seed: 0,
            max_attempts: 500,
        }
    }
}

fn words(identifier: &str) -> String {
    split_identifier(identifier).join(" ")
}

fn value_words(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Text(t) => t.to_string(),
        Value::Sym(s) => s.to_lowercase(),
        Value::Entity(e) => e.id.to_string(),
    }
}

fn objects(state: &State, e: &Entity, relation: &str) -> BTreeSet<Value> {
    state.query_objects(&Value::Entity(e.clone()), &Relation::new(relation))
}

/// A referring expression and the form it denotes.
#[derive(Debug, Clone)]
struct Description {
    text: String,
    lf: LogicalForm,
}

/// Candidate descriptions of sets of `ty` entities, grouped by template.
fn descriptions(domain: &Domain, state: &State, ty: &str) -> Vec<Vec<Description>> {
    let tw = words(ty);
    let relations: Vec<_> = domain.relations.iter().filter(|r| r.subjects.iter().any(|s| s == ty)).collect();
    let all = vec![Description {
        text: format!("every {tw}"),
        lf: LogicalForm::type_set(ty),
    }];
    let mut by_value = Vec::new();
    let mut ordinal = Vec::new();
    let mut nested = Vec::new();
    let mut superlatives = Vec::new();
    let literal: Vec<(&str, Value)> = relations
        .iter()
        .filter(|r| !r.is_entity_valued())
        .flat_map(|r| {
            let values: BTreeSet<Value> = state
                .entities_of_type(ty)
                .flat_map(|e| objects(state, e, &r.name))
                .collect();
            values.into_iter().map(move |v| (r.name.as_str(), v))
        })
        .collect();
    for (r, v) in &literal {
        let lf = LogicalForm::reverse_join(r, LogicalForm::value(v.clone()));
        if r == &"index" {
            if let Value::Int(k @ 1..=10) = v {
                ordinal.push(Description {
                    text: format!("the {} {tw}", ORDINALS[*k as usize - 1]),
                    lf,
                });
            }
        } else {
            by_value.push(Description {
                text: format!("{tw} with {} {}", words(r), value_words(v)),
                lf,
            });
        }
    }
    let mut pairs = Vec::new();
    for (i, (r1, v1)) in literal.iter().enumerate() {
        for (r2, v2) in &literal[i + 1..] {
            if r1 == r2 || *r1 == "index" || *r2 == "index" {
                continue;
            }
            pairs.push(Description {
                text: format!("{tw} with {} {} and {} {}", words(r1), value_words(v1), words(r2), value_words(v2)),
                lf: LogicalForm::intersect(
                    LogicalForm::reverse_join(r1, LogicalForm::value(v1.clone())),
                    LogicalForm::reverse_join(r2, LogicalForm::value(v2.clone())),
                ),
            });
        }
    }
    for r in relations.iter().filter(|r| r.is_integer_valued() && r.name != "index") {
        for (kind, phrases) in [
            (SuperlativeKind::Argmax, &ARGMAX_PHRASES[..]),
            (SuperlativeKind::Argmin, &ARGMIN_PHRASES[..]),
        ] {
            for p in phrases.iter().filter(|p| !["first", "last"].contains(p)) {
                superlatives.push(Description {
                    text: format!("the {tw} with the {p} {}", words(&r.name)),
                    lf: LogicalForm::superlative(kind, LogicalForm::type_set(ty), &r.name),
                });
            }
        }
    }
    // joins through an entity-valued relation, naming the other end by text
    for r in &domain.relations {
        let ObjectKind::Entity(obj_ty) = &r.object else { continue };
        let texts = |t: &str| -> Vec<(String, Value)> {
            domain
                .relations
                .iter()
                .filter(|n| n.object == ObjectKind::Text && n.subjects.iter().any(|s| s == t))
                .flat_map(|n| {
                    state
                        .entities_of_type(t)
                        .flat_map(|e| objects(state, e, &n.name))
                        .map(|v| (n.name.clone(), v))
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        if r.subjects.iter().any(|s| s == ty) {
            for (n, v) in texts(obj_ty) {
                nested.push(Description {
                    text: format!("{tw} with {} {}", words(&r.name), value_words(&v)),
                    lf: LogicalForm::reverse_join(&r.name, LogicalForm::reverse_join(&n, LogicalForm::value(v))),
                });
            }
        }
        if obj_ty == ty {
            for subj in &r.subjects {
                for (n, v) in texts(subj) {
                    nested.push(Description {
                        text: format!("{tw} in {}", value_words(&v)),
                        lf: LogicalForm::forward_join(&r.name, LogicalForm::reverse_join(&n, LogicalForm::value(v))),
                    });
                }
            }
        }
    }
    vec![all, by_value, ordinal, pairs, superlatives, nested]
}

fn denotes_entities_of(lf: &LogicalForm, state: &State, ty: &str) -> Option<BTreeSet<Value>> {
    let set = denote(lf, state).ok()?;
    let ok = !set.is_empty() && set.iter().all(|v| matches!(v, Value::Entity(e) if &*e.ty == ty));
    ok.then_some(set)
}

fn pick_description(
    domain: &Domain,
    state: &State,
    ty: &str,
    single: bool,
    rng: &mut dyn RngCore,
) -> Option<Description> {
    let families: Vec<Vec<Description>> = descriptions(domain, state, ty)
        .into_iter()
        .map(|f| {
            f.into_iter()
                .filter(|d| denotes_entities_of(&d.lf, state, ty).is_some_and(|s| !single || s.len() == 1))
                .collect::<Vec<_>>()
        })
        .filter(|f| !f.is_empty())
        .collect();
    let family = families.choose(rng)?;
    family.choose(rng).cloned()
}

/// One example for `method` over `state`, or `None` if the drawn call fails
/// or leaves the state unchanged.
fn attempt(domain: &Domain, method: usize, state: &State, rng: &mut dyn RngCore) -> Option<(String, LogicalForm, State)> {
    let m = &domain.methods[method];
    let mut text = vec![m.description_phrases.choose(rng)?.clone()];
    let mut args = Vec::new();
    for (i, p) in m.parameters.iter().enumerate() {
        let (t, lf) = match p {
            ParameterSpec::EntityCollection(ty) => {
                let d = pick_description(domain, state, ty, false, rng)?;
                (d.text, d.lf)
            }
            ParameterSpec::SingleEntity(ty) => {
                let d = pick_description(domain, state, ty, true, rng)?;
                (d.text, d.lf)
            }
            ParameterSpec::IntegerArg => {
                let n = if domain.generation.contains("int_arg") {
                    domain.generation.sample("int_arg", rng)
                } else {
                    rng.gen_range(1..=10)
                };
                (n.to_string(), LogicalForm::value(Value::Int(n)))
            }
            ParameterSpec::EnumArg(options) => {
                let s = options.choose(rng)?;
                (s.to_lowercase(), LogicalForm::value(Value::sym(s.as_str())))
            }
        };
        text.push(if i == 0 { t } else { format!("to {t}") });
        args.push(lf);
    }
    let gold = LogicalForm::call(&m.name, args);
    match execute(&gold, state, Some(domain)) {
        Ok(Denotation::State(next)) if next != *state => Some((text.join(" "), gold, next)),
        _ => None,
    }
}

fn domain_seed(seed: u64, id: &str) -> u64 {
    id.bytes().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// `count` examples for one domain, methods drawn uniformly.
pub fn synthesize_domain(domain: &Domain, count: usize, config: &SyntheticConfig) -> Vec<SyntheticExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(domain_seed(config.seed, &domain.id));
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let method = rng.gen_range(0..domain.methods.len());
        let mut state = generate_initial_state(domain, &mut rng);
        for attempt_no in 0..config.max_attempts {
            if attempt_no > 0 && attempt_no % 20 == 0 {
                state = generate_initial_state(domain, &mut rng);
            }
            if let Some((utterance, gold, desired)) = attempt(domain, method, &state, &mut rng) {
                out.push(SyntheticExample {
                    example: Example {
                        id: format!("{}-{n:04}", domain.id),
                        domain_id: domain.id.clone(),
                        initial: state,
                        utterance,
                        desired,
                    },
                    gold,
                });
                break;
            }
        }
    }
    out
}

/// Examples for every listed domain, keyed by domain id.
pub fn synthetic_corpus(
    registry: &DomainRegistry,
    domains: &[String],
    config: &SyntheticConfig,
) -> BTreeMap<String, Vec<SyntheticExample>> {
    domains
        .iter()
        .filter_map(|id| registry.get(id))
        .map(|d| (d.id.clone(), synthesize_domain(d, config.per_domain, config)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_state;

    #[test]
    fn examples_are_consistent_with_their_gold_forms() {
        let reg = DomainRegistry::builtin();
        let config = SyntheticConfig {
            per_domain: 30,
            ..SyntheticConfig::default()
        };
        for d in reg.domains() {
            let exs = synthesize_domain(d, config.per_domain, &config);
            assert_eq!(exs.len(), config.per_domain, "{}", d.id);
            for ex in &exs {
                let e = &ex.example;
                assert!(validate_state(d, &e.desired).is_ok());
                assert_ne!(e.initial, e.desired);
                match execute(&ex.gold, &e.initial, Some(d)).unwrap() {
                    Denotation::State(s) => assert_eq!(s, e.desired),
                    other => panic!("{other:?}"),
                }
                assert!(ex.gold.size() <= 15, "{} is too large", ex.gold);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let d = crate::domain::builtin::lighting::domain();
        let config = SyntheticConfig::default();
        let a = synthesize_domain(&d, 10, &config);
        let b = synthesize_domain(&d, 10, &config);
        let texts = |v: &[SyntheticExample]| v.iter().map(|e| (e.example.utterance.clone(), e.gold.to_string())).collect::<Vec<_>>();
        assert_eq!(texts(&a), texts(&b));
        let c = synthesize_domain(&d, 10, &SyntheticConfig { seed: 9, ..config });
        assert_ne!(texts(&a), texts(&c));
    }
}
