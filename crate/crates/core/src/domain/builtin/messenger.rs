//! Chat groups between users.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::{by_index, entities, index_synonyms, pick_distinct, remove_and_reindex};
use crate::domain::{
    ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall,
    ObjectKind, ParameterSpec, RelationSpec,
};
use crate::knowledge::{Entity, State, Value};

pub struct MessengerLogic;

const NAMES: [&str; 10] = [
    "alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy",
];

pub fn domain() -> Domain {
    let groups = || vec![ParameterSpec::EntityCollection("ChatGroup".into())];
    Domain::new(
        "messenger",
        &["User", "ChatGroup"],
        vec![
            RelationSpec::new("firstName", &["User"], ObjectKind::Text),
            RelationSpec::new("contacts", &["ChatGroup"], ObjectKind::Entity("User".into())),
            RelationSpec::new(
                "muted",
                &["ChatGroup"],
                ObjectKind::Sym(vec!["TRUE".into(), "FALSE".into()]),
            ),
            RelationSpec::new("participantsNumber", &["ChatGroup"], ObjectKind::Int),
            RelationSpec::new("index", &["ChatGroup"], ObjectKind::Int),
        ],
        vec![
            InterfaceMethod::new(
                "createChatGroup",
                vec![ParameterSpec::EntityCollection("User".into())],
                &["create", "start", "new"],
            ),
            InterfaceMethod::new("deleteChatGroups", groups(), &["delete", "remove", "leave"]),
            InterfaceMethod::new("muteChatGroups", groups(), &["mute", "silence"]),
            InterfaceMethod::new("unmuteChatGroups", groups(), &["unmute", "unsilence"]),
        ],
        GenerationRanges::new(&[("users", 3, 5), ("groups", 1, 3), ("group_size", 2, 3)]),
        Arc::new(MessengerLogic),
    )
    .expect("valid messenger domain")
    .with_synonyms("contacts", &["with", "including", "member"])
    .with_synonyms("participantsNumber", &["participants", "members", "people"])
    .with_synonyms("muted", &["silenced", "quiet"])
    .with_synonyms("firstName", &["named", "called"])
    .with_synonyms("index", &index_synonyms())
}

fn contact_set(state: &State, group: &Entity) -> BTreeSet<Value> {
    state.query_objects(&Value::Entity(group.clone()), &"contacts".into())
}

fn set_muted(state: &State, call: &MethodCall, v: &str) -> State {
    let mut b = state.to_builder();
    for g in entities(call, 0) {
        b.set(&g, "muted", Value::sym(v));
    }
    b.build_unchecked()
}

impl ApplicationLogic for MessengerLogic {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        let groups: Vec<Entity> = by_index(state, state.entities_of_type("ChatGroup").cloned());
        match &*call.method {
            "createChatGroup" => {
                let members = &call.arguments[0];
                if groups.iter().any(|g| &contact_set(state, g) == members) {
                    return Err(DomainException::new("a chat group with these contacts already exists"));
                }
                let next = groups
                    .iter()
                    .filter_map(|g| g.id.strip_prefix('g').and_then(|n| n.parse::<u32>().ok()))
                    .max()
                    .unwrap_or(0)
                    + 1;
                let mut b = state.to_builder();
                let g = b.entity(&format!("g{next}"), "ChatGroup");
                for m in members {
                    b.add(&g, "contacts", m.clone());
                }
                b.add(&g, "muted", Value::sym("FALSE"));
                b.add(&g, "participantsNumber", Value::Int(members.len() as i64));
                b.add(&g, "index", Value::Int(groups.len() as i64 + 1));
                Ok(b.build_unchecked())
            }
            "deleteChatGroups" => {
                Ok(remove_and_reindex(state, &groups, &entities(call, 0)).build_unchecked())
            }
            "muteChatGroups" => Ok(set_muted(state, call, "TRUE")),
            "unmuteChatGroups" => Ok(set_muted(state, call, "FALSE")),
            m => Err(DomainException::new(format!("unknown method {m}"))),
        }
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        let mut b = State::builder("messenger");
        let n = ranges.sample_usize("users", rng).max(2);
        let users: Vec<Entity> = pick_distinct(&NAMES, n, rng)
            .into_iter()
            .enumerate()
            .map(|(i, name)| {
                let u = b.entity(&format!("u{}", i + 1), "User");
                b.add(&u, "firstName", Value::text(name));
                u
            })
            .collect();
        let wanted = ranges.sample_usize("groups", rng);
        let mut seen: BTreeSet<Vec<Entity>> = BTreeSet::new();
        let mut attempts = 0;
        while seen.len() < wanted && attempts < 100 {
            attempts += 1;
            let k = ranges.sample_usize("group_size", rng).clamp(1, users.len());
            let mut members: Vec<Entity> = users.choose_multiple(rng, k).cloned().collect();
            members.sort();
            if !seen.insert(members.clone()) {
                continue;
            }
            let i = seen.len();
            let g = b.entity(&format!("g{i}"), "ChatGroup");
            for m in &members {
                b.add(&g, "contacts", Value::Entity(m.clone()));
            }
            let muted = if rng.gen_bool(0.5) { "TRUE" } else { "FALSE" };
            b.add(&g, "muted", Value::sym(muted));
            b.add(&g, "participantsNumber", Value::Int(members.len() as i64));
            b.add(&g, "index", Value::Int(i as i64));
        }
        b.build_unchecked()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> State {
        let mut b = State::builder("messenger");
        let a = b.entity("u1", "User");
        b.add(&a, "firstName", Value::text("alice"));
        let c = b.entity("u2", "User");
        b.add(&c, "firstName", Value::text("bob"));
        let g = b.entity("g1", "ChatGroup");
        b.add(&g, "contacts", Value::Entity(a));
        b.add(&g, "contacts", Value::Entity(c));
        b.add(&g, "muted", Value::sym("FALSE"));
        b.add(&g, "participantsNumber", Value::Int(2));
        b.add(&g, "index", Value::Int(1));
        b.build().unwrap()
    }

    fn users(s: &State, ids: &[&str]) -> BTreeSet<Value> {
        ids.iter().map(|id| Value::Entity(s.entity(id).unwrap().clone())).collect()
    }

    #[test]
    fn create_rejects_duplicate_contact_set() {
        let s = state();
        let d = domain();
        assert!(d
            .invoke(&s, &MethodCall::new("createChatGroup", vec![users(&s, &["u1", "u2"])]))
            .is_err());
        let out = d
            .invoke(&s, &MethodCall::new("createChatGroup", vec![users(&s, &["u1"])]))
            .unwrap();
        let g2 = out.entity("g2").unwrap();
        assert_eq!(out.int_object(g2, "index"), Some(2));
        assert_eq!(out.int_object(g2, "participantsNumber"), Some(1));
    }

    #[test]
    fn mute_sets_flag() {
        let s = state();
        let out = domain()
            .invoke(&s, &MethodCall::new("muteChatGroups", vec![users(&s, &["g1"])]))
            .unwrap();
        assert_eq!(out.object(out.entity("g1").unwrap(), "muted"), Some(&Value::sym("TRUE")));
    }
}
