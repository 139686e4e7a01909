//! The seven built-in domains.

pub mod calendar;
pub mod container;
pub mod file;
pub mod lighting;
pub mod list;
pub mod messenger;
pub mod workforce;

use rand::seq::SliceRandom;
use rand::RngCore;

use super::{Domain, MethodCall};
use crate::knowledge::{Entity, State, StateBuilder, Value, INDEX_RELATION};

pub fn builtin_domains() -> Vec<Domain> {
    vec![
        calendar::domain(),
        container::domain(),
        file::domain(),
        lighting::domain(),
        list::domain(),
        messenger::domain(),
        workforce::domain(),
    ]
}

pub(crate) const ORDINAL_WORDS: [&str; 20] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    "eleventh", "twelfth", "thirteenth", "fourteenth", "fifteenth", "sixteenth", "seventeenth",
    "eighteenth", "nineteenth", "twentieth",
];

/// Phrases for the `index` relation.
pub(crate) fn index_synonyms() -> Vec<&'static str> {
    let mut out = vec!["position", "number"];
    out.extend(ORDINAL_WORDS);
    out
}

pub(crate) fn entities(call: &MethodCall, i: usize) -> Vec<Entity> {
    call.arguments[i]
        .iter()
        .filter_map(|v| v.as_entity().cloned())
        .collect()
}

pub(crate) fn single_entity(call: &MethodCall, i: usize) -> Entity {
    entities(call, i)
        .into_iter()
        .next()
        .expect("checked single-entity argument")
}

pub(crate) fn int_arg(call: &MethodCall, i: usize) -> i64 {
    call.arguments[i]
        .iter()
        .find_map(Value::as_int)
        .expect("checked integer argument")
}

pub(crate) fn sym_arg(call: &MethodCall, i: usize) -> String {
    match call.arguments[i].iter().next() {
        Some(Value::Sym(s)) => s.to_string(),
        _ => panic!("checked enum argument"),
    }
}

pub(crate) fn pick_distinct<'a>(pool: &[&'a str], n: usize, rng: &mut dyn RngCore) -> Vec<&'a str> {
    pool.choose_multiple(rng, n.min(pool.len())).copied().collect()
}

pub(crate) fn pick<'a>(pool: &[&'a str], rng: &mut dyn RngCore) -> &'a str {
    pool.choose(rng).expect("non-empty pool")
}

/// Entities sorted by their current `index` value.
pub(crate) fn by_index(state: &State, members: impl IntoIterator<Item = Entity>) -> Vec<Entity> {
    let mut v: Vec<(i64, Entity)> = members
        .into_iter()
        .map(|e| (state.int_object(&e, INDEX_RELATION).unwrap_or(i64::MAX), e))
        .collect();
    v.sort();
    v.into_iter().map(|(_, e)| e).collect()
}

/// Removes `victims` and renumbers the survivors of their group in order.
pub(crate) fn remove_and_reindex(
    state: &State,
    group: &[Entity],
    victims: &[Entity],
) -> StateBuilder {
    let mut b = state.to_builder();
    for v in victims {
        b.remove_entity(v);
    }
    let survivors: Vec<Entity> = by_index(state, group.iter().filter(|e| !victims.contains(e)).cloned());
    b.reindex(survivors.iter());
    b
}
