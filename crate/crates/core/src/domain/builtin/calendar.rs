//! Calendar events on a single day.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::RngCore;

use super::{by_index, entities, index_synonyms, pick, pick_distinct, remove_and_reindex, sym_arg};
use crate::domain::{
    ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall,
    ObjectKind, ParameterSpec, RelationSpec,
};
use crate::knowledge::{Entity, State, Value};

pub struct CalendarLogic;

const TITLES: [&str; 10] = [
    "standup", "lunch", "review", "interview", "workshop", "planning", "retro", "demo", "training",
    "dentist",
];
const LOCATIONS: [&str; 6] = ["office", "cafe", "library", "lab", "gym", "home"];
const PEOPLE: [&str; 8] = ["alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi"];
pub const COLORS: [&str; 4] = ["RED", "BLUE", "GREEN", "YELLOW"];

pub fn domain() -> Domain {
    let colors = || COLORS.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Domain::new(
        "calendar",
        &["Event"],
        vec![
            RelationSpec::new("title", &["Event"], ObjectKind::Text),
            RelationSpec::new("startTime", &["Event"], ObjectKind::Int),
            RelationSpec::new("location", &["Event"], ObjectKind::Text),
            RelationSpec::new("color", &["Event"], ObjectKind::Sym(colors())),
            RelationSpec::new("attendees", &["Event"], ObjectKind::Text),
            RelationSpec::new("index", &["Event"], ObjectKind::Int),
        ],
        vec![
            InterfaceMethod::new(
                "removeEvents",
                vec![ParameterSpec::EntityCollection("Event".into())],
                &["remove", "cancel"],
            ),
            InterfaceMethod::new(
                "setEventColor",
                vec![
                    ParameterSpec::EntityCollection("Event".into()),
                    ParameterSpec::EnumArg(colors()),
                ],
                &["color", "paint", "mark"],
            ),
        ],
        GenerationRanges::new(&[("events", 3, 6), ("start_time", 8, 18), ("attendees", 1, 2)]),
        Arc::new(CalendarLogic),
    )
    .expect("valid calendar domain")
    .with_synonyms("startTime", &["starts", "starting", "time", "oclock", "earliest", "latest"])
    .with_synonyms("attendees", &["with", "attending"])
    .with_synonyms("location", &["at", "where"])
    .with_synonyms("index", &index_synonyms())
}

impl ApplicationLogic for CalendarLogic {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        match &*call.method {
            "removeEvents" => {
                let all: Vec<Entity> = by_index(state, state.entities_of_type("Event").cloned());
                Ok(remove_and_reindex(state, &all, &entities(call, 0)).build_unchecked())
            }
            "setEventColor" => {
                let color = sym_arg(call, 1);
                let mut b = state.to_builder();
                for e in entities(call, 0) {
                    b.set(&e, "color", Value::sym(color.as_str()));
                }
                Ok(b.build_unchecked())
            }
            m => Err(DomainException::new(format!("unknown method {m}"))),
        }
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        let (lo, hi) = ranges.get("start_time");
        let hours: Vec<i64> = (lo..=hi).collect();
        let n = ranges.sample_usize("events", rng).min(hours.len());
        let mut starts: Vec<i64> = hours.choose_multiple(rng, n).copied().collect();
        starts.sort_unstable();
        let titles = pick_distinct(&TITLES, n, rng);
        let mut b = State::builder("calendar");
        for (i, (start, title)) in starts.into_iter().zip(titles).enumerate() {
            let e = b.entity(&format!("ev{}", i + 1), "Event");
            b.add(&e, "title", Value::text(title));
            b.add(&e, "startTime", Value::Int(start));
            b.add(&e, "location", Value::text(pick(&LOCATIONS, rng)));
            b.add(&e, "color", Value::sym(pick(&COLORS, rng)));
            let k = ranges.sample_usize("attendees", rng);
            for p in pick_distinct(&PEOPLE, k, rng) {
                b.add(&e, "attendees", Value::text(p));
            }
            b.add(&e, "index", Value::Int(i as i64 + 1));
        }
        b.build_unchecked()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn set_color_and_remove() {
        let mut b = State::builder("calendar");
        let e1 = b.entity("ev1", "Event");
        b.add(&e1, "startTime", Value::Int(9));
        b.add(&e1, "color", Value::sym("RED"));
        b.add(&e1, "index", Value::Int(1));
        let e2 = b.entity("ev2", "Event");
        b.add(&e2, "startTime", Value::Int(11));
        b.add(&e2, "color", Value::sym("RED"));
        b.add(&e2, "index", Value::Int(2));
        let s = b.build().unwrap();
        let d = domain();
        let call = MethodCall::new(
            "setEventColor",
            vec![BTreeSet::from([Value::Entity(e2.clone())]), BTreeSet::from([Value::sym("BLUE")])],
        );
        let out = d.invoke(&s, &call).unwrap();
        assert_eq!(out.object(&e2, "color"), Some(&Value::sym("BLUE")));
        let bad = MethodCall::new(
            "setEventColor",
            vec![BTreeSet::from([Value::Entity(e2.clone())]), BTreeSet::from([Value::sym("PURPLE")])],
        );
        assert!(d.invoke(&s, &bad).is_err());
        let rm = MethodCall::new("removeEvents", vec![BTreeSet::from([Value::Entity(e1)])]);
        let out = d.invoke(&s, &rm).unwrap();
        assert_eq!(out.int_object(&e2, "index"), Some(1));
    }
}
