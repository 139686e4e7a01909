//! Employees, their managers, positions and salaries.

use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{entities, int_arg, pick_distinct, single_entity, sym_arg};
use crate::domain::{
    ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall,
    ObjectKind, ParameterSpec, RelationSpec,
};
use crate::knowledge::{Entity, State, Value};

pub struct WorkforceLogic;

const NAMES: [&str; 12] = [
    "alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy", "mallory",
    "oscar",
];
pub const POSITIONS: [&str; 3] = ["DEVELOPER", "QA", "MANAGER"];

pub fn domain() -> Domain {
    let positions = || POSITIONS.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let emp = || ParameterSpec::SingleEntity("Employee".into());
    Domain::new(
        "workforce",
        &["Employee"],
        vec![
            RelationSpec::new("name", &["Employee"], ObjectKind::Text),
            RelationSpec::new("manager", &["Employee"], ObjectKind::Entity("Employee".into())),
            RelationSpec::new("salary", &["Employee"], ObjectKind::Int),
            RelationSpec::new("position", &["Employee"], ObjectKind::Sym(positions())),
        ],
        vec![
            InterfaceMethod::new(
                "assignEmployeesToNewManager",
                vec![ParameterSpec::EntityCollection("Employee".into()), emp()],
                &["assign", "report to", "transfer"],
            ),
            InterfaceMethod::new(
                "fireEmployees",
                vec![ParameterSpec::EntityCollection("Employee".into())],
                &["fire", "dismiss", "let go"],
            ),
            InterfaceMethod::new(
                "assignEmployeeToNewPosition",
                vec![emp(), ParameterSpec::EnumArg(positions())],
                &["promote", "demote", "position"],
            ),
            InterfaceMethod::new(
                "updateSalary",
                vec![emp(), ParameterSpec::IntegerArg],
                &["salary", "pay", "raise"],
            ),
        ],
        GenerationRanges::new(&[
            ("employees", 4, 8),
            ("managers", 1, 2),
            ("salary", 40, 150),
            ("int_arg", 40, 150),
        ]),
        Arc::new(WorkforceLogic),
    )
    .expect("valid workforce domain")
    .with_synonyms("manager", &["reports", "reporting", "boss", "under"])
    .with_synonyms("salary", &["earns", "paid", "earning"])
    .with_synonyms("position", &["role", "job"])
}

fn is_manager(state: &State, e: &Entity) -> bool {
    state.object(e, "position") == Some(&Value::sym("MANAGER"))
}

impl ApplicationLogic for WorkforceLogic {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        let mut b = state.to_builder();
        match &*call.method {
            "assignEmployeesToNewManager" => {
                let boss = single_entity(call, 1);
                if !is_manager(state, &boss) {
                    return Err(DomainException::new(format!("{} is not a manager", boss.id)));
                }
                let staff = entities(call, 0);
                if staff.contains(&boss) {
                    return Err(DomainException::new("an employee cannot manage themselves"));
                }
                for e in staff {
                    b.set(&e, "manager", Value::Entity(boss.clone()));
                }
            }
            "fireEmployees" => {
                for e in entities(call, 0) {
                    b.remove_entity(&e);
                }
            }
            "assignEmployeeToNewPosition" => {
                let e = single_entity(call, 0);
                let pos = sym_arg(call, 1);
                let has_reports = !state
                    .query_subjects(&"manager".into(), &Value::Entity(e.clone()))
                    .is_empty();
                if pos != "MANAGER" && is_manager(state, &e) && has_reports {
                    return Err(DomainException::new(format!(
                        "{} still has direct reports",
                        e.id
                    )));
                }
                b.set(&e, "position", Value::sym(pos.as_str()));
            }
            "updateSalary" => {
                let amount = int_arg(call, 1);
                if amount <= 0 {
                    return Err(DomainException::new("salary must be positive"));
                }
                b.set(&single_entity(call, 0), "salary", Value::Int(amount));
            }
            m => return Err(DomainException::new(format!("unknown method {m}"))),
        }
        Ok(b.build_unchecked())
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        let mut b = State::builder("workforce");
        let n = ranges.sample_usize("employees", rng).max(2);
        let n_managers = ranges.sample_usize("managers", rng).clamp(1, n - 1);
        let people: Vec<Entity> = pick_distinct(&NAMES, n, rng)
            .into_iter()
            .enumerate()
            .map(|(i, name)| {
                let e = b.entity(&format!("emp{}", i + 1), "Employee");
                b.add(&e, "name", Value::text(name));
                b.add(&e, "salary", Value::Int(ranges.sample("salary", rng)));
                e
            })
            .collect();
        let (managers, staff) = people.split_at(n_managers);
        for m in managers {
            b.add(m, "position", Value::sym("MANAGER"));
        }
        for e in staff {
            let pos = if rng.gen_bool(0.5) { "DEVELOPER" } else { "QA" };
            b.add(e, "position", Value::sym(pos));
            let boss = &managers[rng.gen_range(0..managers.len())];
            b.add(e, "manager", Value::Entity(boss.clone()));
        }
        b.build_unchecked()
    }
}
