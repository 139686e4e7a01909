//! An ordered list of integers.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::RngCore;

use super::{by_index, entities, index_synonyms, remove_and_reindex, single_entity};
use crate::domain::{
    ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall,
    ObjectKind, ParameterSpec, RelationSpec,
};
use crate::knowledge::{Entity, State, Value};

pub struct ListLogic;

pub fn domain() -> Domain {
    Domain::new(
        "list",
        &["Element"],
        vec![
            RelationSpec::new("value", &["Element"], ObjectKind::Int),
            RelationSpec::new("index", &["Element"], ObjectKind::Int),
        ],
        vec![
            InterfaceMethod::new(
                "remove",
                vec![ParameterSpec::EntityCollection("Element".into())],
                &["remove", "delete", "drop"],
            ),
            InterfaceMethod::new(
                "moveToBeginning",
                vec![ParameterSpec::SingleEntity("Element".into())],
                &["beginning", "front", "start"],
            ),
            InterfaceMethod::new(
                "moveToEnd",
                vec![ParameterSpec::SingleEntity("Element".into())],
                &["end", "back", "bottom"],
            ),
        ],
        GenerationRanges::new(&[("elements", 3, 8), ("value", 1, 20)]),
        Arc::new(ListLogic),
    )
    .expect("valid list domain")
    .with_synonyms("value", &["number", "element", "item"])
    .with_synonyms("index", &index_synonyms())
}

fn elements(state: &State) -> Vec<Entity> {
    by_index(state, state.entities_of_type("Element").cloned())
}

fn move_to(state: &State, target: &Entity, front: bool) -> State {
    let mut order: Vec<Entity> = elements(state).into_iter().filter(|e| e != target).collect();
    if front {
        order.insert(0, target.clone());
    } else {
        order.push(target.clone());
    }
    let mut b = state.to_builder();
    b.reindex(order.iter());
    b.build_unchecked()
}

impl ApplicationLogic for ListLogic {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        match &*call.method {
            "remove" => {
                let all = elements(state);
                Ok(remove_and_reindex(state, &all, &entities(call, 0)).build_unchecked())
            }
            "moveToBeginning" => Ok(move_to(state, &single_entity(call, 0), true)),
            "moveToEnd" => Ok(move_to(state, &single_entity(call, 0), false)),
            m => Err(DomainException::new(format!("unknown method {m}"))),
        }
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        let n = ranges.sample_usize("elements", rng);
        let (lo, hi) = ranges.get("value");
        let pool: Vec<i64> = (lo..=hi).collect();
        let values: Vec<i64> = pool.choose_multiple(rng, n).copied().collect();
        let mut b = State::builder("list");
        for (i, v) in values.into_iter().enumerate() {
            let e = b.entity(&format!("e{}", i + 1), "Element");
            b.add(&e, "value", Value::Int(v));
            b.add(&e, "index", Value::Int(i as i64 + 1));
        }
        b.build_unchecked()
    }
}
