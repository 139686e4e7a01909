//! Shipping containers in a yard.

use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{by_index, entities, index_synonyms, remove_and_reindex};
use crate::domain::{
    ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall,
    ObjectKind, ParameterSpec, RelationSpec,
};
use crate::knowledge::{Entity, State, Value};

pub struct ContainerLogic;

const TY: &str = "ShippingContainer";

pub fn domain() -> Domain {
    let coll = || vec![ParameterSpec::EntityCollection(TY.into())];
    Domain::new(
        "container",
        &[TY],
        vec![
            RelationSpec::new("length", &[TY], ObjectKind::Int),
            RelationSpec::new(
                "contentState",
                &[TY],
                ObjectKind::Sym(vec!["LOADED".into(), "UNLOADED".into()]),
            ),
            RelationSpec::new("index", &[TY], ObjectKind::Int),
        ],
        vec![
            InterfaceMethod::new("loadContainers", coll(), &["load", "fill"]),
            InterfaceMethod::new("unloadContainers", coll(), &["unload", "empty"]),
            InterfaceMethod::new("removeContainers", coll(), &["remove", "delete", "discard"]),
        ],
        GenerationRanges::new(&[("containers", 3, 7), ("length", 1, 8)]),
        Arc::new(ContainerLogic),
    )
    .expect("valid container domain")
    .with_synonyms("length", &["long", "feet", "size"])
    .with_synonyms("contentState", &["loaded", "unloaded", "full", "empty"])
    .with_synonyms("index", &index_synonyms())
}

fn set_state(state: &State, call: &MethodCall, value: &str) -> State {
    let mut b = state.to_builder();
    for c in entities(call, 0) {
        b.set(&c, "contentState", Value::sym(value));
    }
    b.build_unchecked()
}

impl ApplicationLogic for ContainerLogic {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        match &*call.method {
            "loadContainers" => Ok(set_state(state, call, "LOADED")),
            "unloadContainers" => Ok(set_state(state, call, "UNLOADED")),
            "removeContainers" => {
                let all: Vec<Entity> = by_index(state, state.entities_of_type(TY).cloned());
                Ok(remove_and_reindex(state, &all, &entities(call, 0)).build_unchecked())
            }
            m => Err(DomainException::new(format!("unknown method {m}"))),
        }
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        let n = ranges.sample("containers", rng);
        let mut b = State::builder("container");
        for i in 1..=n {
            let c = b.entity(&format!("c{i}"), TY);
            b.add(&c, "length", Value::Int(ranges.sample("length", rng)));
            let st = if rng.gen_bool(0.5) { "LOADED" } else { "UNLOADED" };
            b.add(&c, "contentState", Value::sym(st));
            b.add(&c, "index", Value::Int(i));
        }
        b.build_unchecked()
    }
}
