//! Builds a small lighting state and queries it in both directions.

use zsparse::knowledge::{states_equal, Relation, State, Value};

fn main() {
    let mut b = State::builder("lighting");
    for (id, name, floor) in [("room1", "bedroom", 2), ("room2", "kitchen", 1), ("room3", "study", 2)] {
        let room = b.entity(id, "Room");
        b.add(&room, "name", Value::text(name));
        b.add(&room, "floor", Value::Int(floor));
        b.add(&room, "lightMode", Value::sym("ON"));
    }
    let state = b.build().expect("well-formed state");
    println!("{} entities, {} triples", state.entities().len(), state.triples().len());

    let upstairs = state.query_subjects(&Relation::new("floor"), &Value::Int(2));
    let names: Vec<String> = upstairs
        .iter()
        .flat_map(|room| state.query_objects(room, &Relation::new("name")))
        .map(|v| v.to_string())
        .collect();
    println!("rooms on floor 2: {}", names.join(", "));

    // switching a light off yields a different state; switching it back does not
    let room1 = state.entity("room1").unwrap().clone();
    let mut off = state.to_builder();
    off.set(&room1, "lightMode", Value::sym("OFF"));
    let off = off.build().unwrap();
    let mut back = off.to_builder();
    back.set(&room1, "lightMode", Value::sym("ON"));
    let back = back.build().unwrap();
    println!("off == original: {}", states_equal(&off, &state).unwrap());
    println!("restored == original: {}", states_equal(&back, &state).unwrap());
}
