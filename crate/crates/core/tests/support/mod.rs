#![allow(dead_code)]

pub mod oracles;

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use zsparse::domain::{
    ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall, ObjectKind,
    ParameterSpec, RelationSpec,
};
use zsparse::knowledge::{State, Value};
use zsparse::logical_form::{LogicalForm, SuperlativeKind};

/// Removes the boxes passed as the only argument.
pub struct Discard;

impl ApplicationLogic for Discard {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        let mut b = state.to_builder();
        for v in &call.arguments[0] {
            if let Value::Entity(e) = v {
                b.remove_entity(e);
            }
        }
        Ok(b.build_unchecked())
    }

    fn initial_state(&self, _ranges: &GenerationRanges, _rng: &mut dyn RngCore) -> State {
        State::empty("toy")
    }
}

/// One type, an integer `weight` and a text `label`, one unary method.
pub fn toy_domain() -> Domain {
    Domain::new(
        "toy",
        &["Box"],
        vec![
            RelationSpec::new("weight", &["Box"], ObjectKind::Int),
            RelationSpec::new("label", &["Box"], ObjectKind::Text),
        ],
        vec![InterfaceMethod::new(
            "discard",
            vec![ParameterSpec::EntityCollection("Box".into())],
            &["discard"],
        )],
        GenerationRanges::new(&[]),
        Arc::new(Discard),
    )
    .unwrap()
}

/// Boxes `b1..` with the given weights and labels.
pub fn toy_state(boxes: &[(i64, &str)]) -> State {
    let mut b = State::builder("toy");
    for (i, (w, l)) in boxes.iter().enumerate() {
        let e = b.entity(&format!("b{}", i + 1), "Box");
        b.add(&e, "weight", Value::Int(*w));
        b.add(&e, "label", Value::text(*l));
    }
    b.build().unwrap()
}

/// A random, possibly ill-typed non-root form over `state`'s vocabulary.
pub fn random_set_form(domain: &Domain, state: &State, rng: &mut dyn RngCore, depth: usize) -> LogicalForm {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..4) {
            0 => LogicalForm::type_set(domain.entity_types.choose(rng).unwrap()),
            1 => LogicalForm::value(Value::Int(rng.gen_range(0..12))),
            2 => {
                let objs: Vec<Value> = state
                    .triples()
                    .iter()
                    .map(|t| t.object.clone())
                    .filter(|v| !matches!(v, Value::Entity(_)))
                    .collect();
                match objs.choose(rng) {
                    Some(Value::Text(t)) if rng.gen_bool(0.3) => LogicalForm::value(Value::text(t.to_uppercase())),
                    Some(v) => LogicalForm::value(v.clone()),
                    None => LogicalForm::value(Value::text("nothing")),
                }
            }
            _ => {
                let syms = domain.symbols();
                match syms.iter().collect::<Vec<_>>().choose(rng) {
                    Some(s) => LogicalForm::value(Value::sym(s.as_str())),
                    None => LogicalForm::value(Value::text("none")),
                }
            }
        };
    }
    let rel = &domain.relations.choose(rng).unwrap().name;
    let sub = |rng: &mut dyn RngCore| random_set_form(domain, state, rng, depth - 1);
    match rng.gen_range(0..4) {
        0 => LogicalForm::reverse_join(rel, sub(rng)),
        1 => LogicalForm::forward_join(rel, sub(rng)),
        2 => {
            let a = sub(rng);
            LogicalForm::intersect(a, sub(rng))
        }
        _ => {
            let kind = if rng.gen_bool(0.5) { SuperlativeKind::Argmax } else { SuperlativeKind::Argmin };
            LogicalForm::superlative(kind, sub(rng), rel)
        }
    }
}

/// A random root form: a method applied to random argument forms.
pub fn random_root_form(domain: &Domain, state: &State, rng: &mut dyn RngCore, depth: usize) -> LogicalForm {
    let m = domain.methods.choose(rng).unwrap();
    let args = m
        .parameters
        .iter()
        .map(|p| match p {
            ParameterSpec::IntegerArg if rng.gen_bool(0.7) => LogicalForm::value(Value::Int(rng.gen_range(1..100))),
            ParameterSpec::EnumArg(opts) if rng.gen_bool(0.7) => {
                LogicalForm::value(Value::sym(opts.choose(rng).unwrap().as_str()))
            }
            _ => random_set_form(domain, state, rng, depth),
        })
        .collect();
    LogicalForm::call(&m.name, args)
}

/// Synthetic examples for `domains`, prepared for `pipeline`.
pub fn prepared_corpus(
    domains: &[&str],
    per_domain: usize,
    seed: u64,
    pipeline: &zsparse::training::Pipeline,
) -> std::collections::BTreeMap<String, Vec<zsparse::training::TrainingExample>> {
    use zsparse::synthetic::{synthesize_domain, SyntheticConfig};
    let reg = zsparse::domain::DomainRegistry::builtin();
    let config = SyntheticConfig {
        per_domain,
        seed,
        ..SyntheticConfig::default()
    };
    domains
        .iter()
        .map(|id| {
            let d = reg.get(id).unwrap().clone();
            let exs: Vec<_> = synthesize_domain(&d, per_domain, &config)
                .into_iter()
                .map(|s| s.example)
                .collect();
            (d.id.clone(), zsparse::training::prepare_examples(&exs, d, pipeline.features))
        })
        .collect()
}

pub fn small_pipeline() -> zsparse::training::Pipeline {
    zsparse::training::Pipeline {
        parser: zsparse::parser::ParserConfig {
            beam_size: 30,
            max_rule_applications: 10,
        },
        ..Default::default()
    }
}

/// Four unary methods over every box: two remove them, two relabel them.
pub struct TieLogic;

impl ApplicationLogic for TieLogic {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        let mut b = state.to_builder();
        for v in &call.arguments[0] {
            let Value::Entity(e) = v else { continue };
            match &*call.method {
                "discard" | "remove" => b.remove_entity(e),
                "paint" => b.add(e, "label", Value::text("red")),
                _ => b.add(e, "label", Value::text("blue")),
            };
        }
        Ok(b.build_unchecked())
    }

    fn initial_state(&self, _ranges: &GenerationRanges, _rng: &mut dyn RngCore) -> State {
        State::empty("tie")
    }
}

/// Zero weights make every root of this domain tie: each method applied to
/// `R[type].Box`, and nothing else is derivable without anchors.
pub fn tie_domain() -> Domain {
    let unary = |name: &str| {
        InterfaceMethod::new(name, vec![ParameterSpec::EntityCollection("Box".into())], &[name])
    };
    Domain::new(
        "tie",
        &["Box"],
        vec![RelationSpec::new("label", &["Box"], ObjectKind::Text)],
        vec![unary("discard"), unary("remove"), unary("paint"), unary("tag")],
        GenerationRanges::new(&[]),
        Arc::new(TieLogic),
    )
    .unwrap()
}
