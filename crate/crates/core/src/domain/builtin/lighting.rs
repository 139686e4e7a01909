//! Rooms on floors whose lights can be switched on and off.

use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{entities, pick_distinct};
use crate::domain::{
    ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall,
    ObjectKind, ParameterSpec, RelationSpec,
};
use crate::knowledge::{State, Value};

const ROOM_NAMES: [&str; 10] = [
    "kitchen", "bedroom", "bathroom", "office", "hallway", "garage", "study", "lounge", "attic",
    "laundry",
];

pub struct Lighting;

pub fn logic() -> Arc<dyn ApplicationLogic> {
    Arc::new(Lighting)
}

pub fn domain() -> Domain {
    let on_off = || ObjectKind::Sym(vec!["ON".into(), "OFF".into()]);
    Domain::new(
        "lighting",
        &["Room"],
        vec![
            RelationSpec::new("name", &["Room"], ObjectKind::Text),
            RelationSpec::new("floor", &["Room"], ObjectKind::Int),
            RelationSpec::new("lightMode", &["Room"], on_off()),
        ],
        vec![
            InterfaceMethod::new(
                "turnLightOn",
                vec![ParameterSpec::EntityCollection("Room".into())],
                &["turn on", "switch on", "light up"],
            ),
            InterfaceMethod::new(
                "turnLightOff",
                vec![ParameterSpec::EntityCollection("Room".into())],
                &["turn off", "switch off", "shut off"],
            ),
        ],
        GenerationRanges::new(&[("floors", 1, 3), ("rooms_per_floor", 1, 4)]),
        logic(),
    )
    .expect("valid lighting domain")
    .with_synonyms("floor", &["level", "story", "upstairs", "downstairs"])
    .with_synonyms("lightMode", &["lights", "light", "lit", "dark"])
}

fn set_mode(state: &State, call: &MethodCall, mode: &str) -> State {
    let mut b = state.to_builder();
    for room in entities(call, 0) {
        b.set(&room, "lightMode", Value::sym(mode));
    }
    b.build_unchecked()
}

impl ApplicationLogic for Lighting {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        match &*call.method {
            "turnLightOn" => Ok(set_mode(state, call, "ON")),
            "turnLightOff" => Ok(set_mode(state, call, "OFF")),
            m => Err(DomainException::new(format!("unknown method {m}"))),
        }
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        let mut b = State::builder("lighting");
        let floors = ranges.sample("floors", rng);
        let mut next = 1;
        for floor in 1..=floors {
            let n = ranges.sample_usize("rooms_per_floor", rng);
            for name in pick_distinct(&ROOM_NAMES, n, rng) {
                let room = b.entity(&format!("room{next}"), "Room");
                next += 1;
                b.add(&room, "name", Value::text(name));
                b.add(&room, "floor", Value::Int(floor));
                let mode = if rng.gen_bool(0.5) { "ON" } else { "OFF" };
                b.add(&room, "lightMode", Value::sym(mode));
            }
        }
        b.build_unchecked()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn two_rooms() -> State {
        let mut b = State::builder("lighting");
        let k = b.entity("room1", "Room");
        b.add(&k, "name", Value::text("kitchen"));
        b.add(&k, "floor", Value::Int(1));
        b.add(&k, "lightMode", Value::sym("OFF"));
        let o = b.entity("room2", "Room");
        b.add(&o, "name", Value::text("office"));
        b.add(&o, "floor", Value::Int(2));
        b.add(&o, "lightMode", Value::sym("ON"));
        b.build().unwrap()
    }

    #[test]
    fn turn_on_sets_mode() {
        let d = domain();
        let s = two_rooms();
        let room1 = s.entity("room1").unwrap().clone();
        let call = MethodCall::new("turnLightOn", vec![BTreeSet::from([Value::Entity(room1.clone())])]);
        let out = d.invoke(&s, &call).unwrap();
        assert_eq!(out.object(&room1, "lightMode"), Some(&Value::sym("ON")));
    }

    #[test]
    fn turning_on_a_lit_room_changes_nothing() {
        let d = domain();
        let s = two_rooms();
        let room2 = s.entity("room2").unwrap().clone();
        let call = MethodCall::new("turnLightOn", vec![BTreeSet::from([Value::Entity(room2)])]);
        assert_eq!(d.invoke(&s, &call).unwrap(), s);
    }

    #[test]
    fn empty_collection_is_rejected() {
        let d = domain();
        let call = MethodCall::new("turnLightOn", vec![BTreeSet::new()]);
        assert!(d.invoke(&two_rooms(), &call).is_err());
    }
}
