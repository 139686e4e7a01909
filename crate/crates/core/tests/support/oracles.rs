//! Slow reference implementations. Test-only.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use zsparse::domain::{Domain, MethodCall, ObjectKind, ParameterSpec};
use zsparse::knowledge::{State, Value};
use zsparse::logical_form::{Denotation, LogicalForm, SuperlativeKind};
use zsparse::parser::ParseInput;

#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    /// Largest form size, in rule applications.
    pub max_size: usize,
    pub max_forms: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceError;

fn text_matches(state: &State, t: &str) -> BTreeSet<Value> {
    let mut out = BTreeSet::new();
    for tr in state.triples() {
        if let Value::Text(k) = &tr.object {
            if k.eq_ignore_ascii_case(t) {
                out.insert(tr.object.clone());
            }
        }
    }
    if out.is_empty() {
        out.insert(Value::text(t));
    }
    out
}

/// Set semantics by scanning every triple; no indexes.
pub fn brute_force_set(lf: &LogicalForm, state: &State) -> Result<BTreeSet<Value>, BruteForceError> {
    Ok(match lf {
        LogicalForm::Value(Value::Text(t)) => text_matches(state, t),
        LogicalForm::Value(v) => [v.clone()].into(),
        LogicalForm::TypeSet(ty) => state
            .entities()
            .iter()
            .filter(|e| *e.ty == **ty)
            .map(|e| Value::Entity(e.clone()))
            .collect(),
        LogicalForm::ReverseJoin(r, z) => {
            let inner = brute_force_set(z, state)?;
            state
                .triples()
                .iter()
                .filter(|t| t.relation == *r && inner.contains(&t.object))
                .map(|t| Value::Entity(t.subject.clone()))
                .collect()
        }
        LogicalForm::ForwardJoin(r, z) => {
            let inner = brute_force_set(z, state)?;
            state
                .triples()
                .iter()
                .filter(|t| t.relation == *r && inner.contains(&Value::Entity(t.subject.clone())))
                .map(|t| t.object.clone())
                .collect()
        }
        LogicalForm::Intersect(a, b) => {
            let a = brute_force_set(a, state)?;
            let b = brute_force_set(b, state)?;
            a.into_iter().filter(|v| b.contains(v)).collect()
        }
        LogicalForm::Superlative { kind, set, key } => {
            let members = brute_force_set(set, state)?;
            let mut keyed: Vec<(i64, Value)> = Vec::new();
            for m in &members {
                let mut ks: Vec<i64> = Vec::new();
                for t in state.triples() {
                    if t.relation == *key && Value::Entity(t.subject.clone()) == *m {
                        if let Value::Int(k) = t.object {
                            ks.push(k);
                        }
                    }
                }
                let k = match kind {
                    SuperlativeKind::Argmax => ks.iter().max(),
                    SuperlativeKind::Argmin => ks.iter().min(),
                };
                if let Some(k) = k {
                    keyed.push((*k, m.clone()));
                }
            }
            let mut best: Option<i64> = None;
            for (k, _) in &keyed {
                best = Some(match (best, kind) {
                    (None, _) => *k,
                    (Some(b), SuperlativeKind::Argmax) => b.max(*k),
                    (Some(b), SuperlativeKind::Argmin) => b.min(*k),
                });
            }
            keyed.into_iter().filter(|(k, _)| Some(*k) == best).map(|(_, v)| v).collect()
        }
        LogicalForm::Call(..) => return Err(BruteForceError),
    })
}

fn conforms(spec: &ParameterSpec, arg: &BTreeSet<Value>, state: &State) -> bool {
    let entity = |v: &Value, ty: &str| matches!(v, Value::Entity(e) if &*e.ty == ty && state.entities().contains(e));
    match spec {
        ParameterSpec::EntityCollection(ty) => !arg.is_empty() && arg.iter().all(|v| entity(v, ty)),
        ParameterSpec::SingleEntity(ty) => arg.len() == 1 && arg.iter().all(|v| entity(v, ty)),
        ParameterSpec::IntegerArg => arg.len() == 1 && arg.iter().all(|v| matches!(v, Value::Int(_))),
        ParameterSpec::EnumArg(allowed) => {
            arg.len() == 1 && arg.iter().all(|v| matches!(v, Value::Sym(s) if allowed.iter().any(|a| a == &**s)))
        }
    }
}

/// Denotation of any form; root calls go straight to the application
/// logic after a hand-written conformance check.
pub fn brute_force_denotation(lf: &LogicalForm, state: &State, domain: &Domain) -> Result<Denotation, BruteForceError> {
    let LogicalForm::Call(name, args) = lf else {
        return brute_force_set(lf, state).map(Denotation::Set);
    };
    let method = domain.methods.iter().find(|m| m.name == **name).ok_or(BruteForceError)?;
    if method.parameters.len() != args.len() {
        return Err(BruteForceError);
    }
    let mut arguments = Vec::new();
    for (a, spec) in args.iter().zip(&method.parameters) {
        let set = brute_force_set(a, state)?;
        if !conforms(spec, &set, state) {
            return Err(BruteForceError);
        }
        arguments.push(set);
    }
    let call = MethodCall {
        method: name.clone(),
        arguments,
    };
    domain.logic().invoke(state, &call).map(Denotation::State).map_err(|_| BruteForceError)
}

#[derive(Debug, Clone)]
struct Node {
    lf: LogicalForm,
    printed: String,
    set: BTreeSet<Value>,
    mask: u128,
    is_value: bool,
}

impl Node {
    fn new(lf: LogicalForm, state: &State, mask: u128, is_value: bool) -> Self {
        let set = brute_force_set(&lf, state).expect("non-root form");
        Node {
            printed: lf.to_string(),
            lf,
            set,
            mask,
            is_value,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub roots: Vec<LogicalForm>,
    pub truncated: bool,
}

/// Every root form up to the budget under the canonical grammar, without
/// beams. Literal values come from the utterance anchors of `input` (the
/// first anchor of each value claims its tokens) and the domain's symbols.
pub fn enumerate_all_forms(input: &ParseInput, budget: EnumerationBudget) -> Enumeration {
    let state = &input.state;
    let domain = &input.domain;
    let mut roots = Vec::new();
    if budget.max_forms == 0 {
        return Enumeration { roots, truncated: true };
    }
    let mut sets: Vec<Vec<Node>> = vec![Vec::new(); budget.max_size + 1];
    let mut seen: HashSet<String> = HashSet::new();
    if budget.max_size >= 1 {
        for a in &input.features.anchors {
            let n = Node::new(LogicalForm::Value(a.value.clone()), state, a.mask(), true);
            if seen.insert(n.printed.clone()) {
                sets[1].push(n);
            }
        }
        for s in domain.symbols() {
            let n = Node::new(LogicalForm::value(Value::sym(s.as_str())), state, 0, true);
            if seen.insert(n.printed.clone()) {
                sets[1].push(n);
            }
        }
        for ty in &domain.entity_types {
            let n = Node::new(LogicalForm::type_set(ty), state, 0, false);
            if !n.set.is_empty() {
                sets[1].push(n);
            }
        }
    }
    let kinds: BTreeMap<&str, &ObjectKind> = domain.relations.iter().map(|r| (r.name.as_str(), &r.object)).collect();
    let mut truncated = false;
    for k in 2..=budget.max_size {
        let mut cell: Vec<Node> = Vec::new();
        let mut printed: HashSet<String> = HashSet::new();
        let mut push = |n: Node, cell: &mut Vec<Node>| {
            if !n.set.is_empty() && printed.insert(n.printed.clone()) {
                cell.push(n);
            }
        };
        if k >= 3 {
            for z in sets[k - 2].clone() {
                for (r, kind) in &kinds {
                    let lf = LogicalForm::reverse_join(r, z.lf.clone());
                    push(Node::new(lf, state, z.mask, false), &mut cell);
                    if z.is_value {
                        continue;
                    }
                    if matches!(kind, ObjectKind::Entity(_)) {
                        let lf = LogicalForm::forward_join(r, z.lf.clone());
                        push(Node::new(lf, state, z.mask, false), &mut cell);
                    }
                    if matches!(kind, ObjectKind::Int) {
                        for sk in [SuperlativeKind::Argmax, SuperlativeKind::Argmin] {
                            let lf = LogicalForm::superlative(sk, z.lf.clone(), r);
                            push(Node::new(lf, state, z.mask, false), &mut cell);
                        }
                    }
                }
            }
        }
        for i in 1..k.saturating_sub(1) {
            let j = k - 1 - i;
            for x in sets[i].iter().filter(|n| !n.is_value) {
                for y in sets[j].iter().filter(|n| !n.is_value) {
                    if x.printed >= y.printed || x.mask & y.mask != 0 {
                        continue;
                    }
                    let lf = LogicalForm::intersect(x.lf.clone(), y.lf.clone());
                    push(Node::new(lf, state, x.mask | y.mask, false), &mut cell);
                }
            }
        }
        sets[k].extend(cell);
        // roots of size k
        for m in &domain.methods {
            let budget_args = k - 2;
            let mut partial: Vec<(Vec<&Node>, usize)> = vec![(Vec::new(), 0)];
            for (pos, p) in m.parameters.iter().enumerate() {
                let remaining = m.parameters.len() - pos - 1;
                let mut next = Vec::new();
                for (args, used) in &partial {
                    for size in 1..=budget_args.saturating_sub(used + remaining) {
                        for n in &sets[size] {
                            let value_param = matches!(p, ParameterSpec::IntegerArg | ParameterSpec::EnumArg(_));
                            if n.is_value != value_param || !conforms(p, &n.set, state) {
                                continue;
                            }
                            if args.iter().any(|a| a.mask & n.mask != 0) {
                                continue;
                            }
                            let mut a = args.clone();
                            a.push(n);
                            next.push((a, used + size));
                        }
                    }
                }
                partial = next;
            }
            for (args, used) in partial {
                if used != budget_args {
                    continue;
                }
                if roots.len() == budget.max_forms {
                    truncated = true;
                    return Enumeration { roots, truncated };
                }
                roots.push(LogicalForm::call(&m.name, args.iter().map(|a| a.lf.clone()).collect()));
            }
        }
    }
    Enumeration { roots, truncated }
}
