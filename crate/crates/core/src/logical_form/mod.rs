//! Logical forms: a small λ-DCS fragment whose roots are method calls.

mod syntax;

pub use syntax::{parse, SyntaxError};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::domain::{check_argument, Domain, DomainException, MethodCall};
use crate::knowledge::{Relation, State, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuperlativeKind {
    Argmax,
    Argmin,
}

impl SuperlativeKind {
    pub fn name(self) -> &'static str {
        match self {
            SuperlativeKind::Argmax => "argmax",
            SuperlativeKind::Argmin => "argmin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicalForm {
    Value(Value),
    /// All entities of a type.
    TypeSet(Arc<str>),
    /// `R[r].z`: subjects whose `r` object lies in `⟦z⟧`.
    ReverseJoin(Relation, Arc<LogicalForm>),
    /// `F[r].z`: objects of `r` whose subject lies in `⟦z⟧`.
    ForwardJoin(Relation, Arc<LogicalForm>),
    Intersect(Arc<LogicalForm>, Arc<LogicalForm>),
    Superlative {
        kind: SuperlativeKind,
        set: Arc<LogicalForm>,
        key: Relation,
    },
    Call(Arc<str>, Vec<Arc<LogicalForm>>),
}

impl LogicalForm {
    pub fn value(v: impl Into<Value>) -> Self {
        LogicalForm::Value(v.into())
    }

    pub fn type_set(ty: &str) -> Self {
        LogicalForm::TypeSet(ty.into())
    }

    pub fn reverse_join(relation: &str, child: LogicalForm) -> Self {
        LogicalForm::ReverseJoin(Relation::new(relation), Arc::new(child))
    }

    pub fn forward_join(relation: &str, child: LogicalForm) -> Self {
        LogicalForm::ForwardJoin(Relation::new(relation), Arc::new(child))
    }

    pub fn intersect(a: LogicalForm, b: LogicalForm) -> Self {
        LogicalForm::Intersect(Arc::new(a), Arc::new(b))
    }

    pub fn superlative(kind: SuperlativeKind, set: LogicalForm, key: &str) -> Self {
        LogicalForm::Superlative {
            kind,
            set: Arc::new(set),
            key: Relation::new(key),
        }
    }

    pub fn call(method: &str, args: Vec<LogicalForm>) -> Self {
        LogicalForm::Call(method.into(), args.into_iter().map(Arc::new).collect())
    }

    pub fn is_call(&self) -> bool {
        matches!(self, LogicalForm::Call(..))
    }

    /// Number of rule applications in the canonical derivation.
    pub fn size(&self) -> usize {
        match self {
            LogicalForm::Value(_) | LogicalForm::TypeSet(_) => 1,
            LogicalForm::ReverseJoin(_, z) | LogicalForm::ForwardJoin(_, z) => 2 + z.size(),
            LogicalForm::Intersect(a, b) => 1 + a.size() + b.size(),
            LogicalForm::Superlative { set, .. } => 2 + set.size(),
            LogicalForm::Call(_, args) => 2 + args.iter().map(|a| a.size()).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LogicalForm::Value(_) | LogicalForm::TypeSet(_) => 1,
            LogicalForm::ReverseJoin(_, z) | LogicalForm::ForwardJoin(_, z) => 1 + z.depth(),
            LogicalForm::Intersect(a, b) => 1 + a.depth().max(b.depth()),
            LogicalForm::Superlative { set, .. } => 1 + set.depth(),
            LogicalForm::Call(_, args) => 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        syntax::write_lf(self, f)
    }
}

/// The result of executing a logical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Denotation {
    Set(BTreeSet<Value>),
    State(State),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExecutionError {
    #[error("method calls may only appear at the root")]
    NestedCall,
    #[error("executing a method call needs a domain")]
    NoDomain,
    #[error("expected a method call at the root")]
    NotACall,
    #[error("domain `{domain}` has no method `{method}`")]
    UnknownMethod { domain: String, method: String },
    #[error("`{method}` takes {expected} arguments, got {got}")]
    Arity {
        method: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of `{method}`: {reason}")]
    BadArgument {
        method: String,
        index: usize,
        reason: String,
    },
    #[error(transparent)]
    Domain(#[from] DomainException),
}

/// Evaluates a non-root form to a set of values.
pub fn denote(lf: &LogicalForm, state: &State) -> Result<BTreeSet<Value>, ExecutionError> {
    Ok(match lf {
        LogicalForm::Value(Value::Text(t)) => {
            let matches: BTreeSet<Value> = state
                .text_values()
                .into_iter()
                .filter(|k| k.eq_ignore_ascii_case(t))
                .map(Value::Text)
                .collect();
            if matches.is_empty() {
                BTreeSet::from([Value::Text(t.clone())])
            } else {
                matches
            }
        }
        LogicalForm::Value(v) => BTreeSet::from([v.clone()]),
        LogicalForm::TypeSet(ty) => state
            .entities_of_type(ty)
            .map(|e| Value::Entity(e.clone()))
            .collect(),
        LogicalForm::ReverseJoin(r, z) => {
            let mut out = BTreeSet::new();
            for o in denote(z, state)? {
                out.extend(state.query_subjects(r, &o));
            }
            out
        }
        LogicalForm::ForwardJoin(r, z) => {
            let mut out = BTreeSet::new();
            for s in denote(z, state)? {
                out.extend(state.query_objects(&s, r));
            }
            out
        }
        LogicalForm::Intersect(a, b) => {
            let a = denote(a, state)?;
            let b = denote(b, state)?;
            a.intersection(&b).cloned().collect()
        }
        LogicalForm::Superlative { kind, set, key } => {
            superlative(*kind, &denote(set, state)?, key, state)
        }
        LogicalForm::Call(..) => return Err(ExecutionError::NestedCall),
    })
}

/// Members of `set` with an extreme integer `key` value; members lacking the
/// key are ignored.
pub fn superlative(
    kind: SuperlativeKind,
    set: &BTreeSet<Value>,
    key: &Relation,
    state: &State,
) -> BTreeSet<Value> {
    let keyed: Vec<(i64, &Value)> = set
        .iter()
        .filter_map(|v| {
            let ints = state.query_objects(v, key);
            let it = ints.iter().filter_map(Value::as_int);
            let k = match kind {
                SuperlativeKind::Argmax => it.max(),
                SuperlativeKind::Argmin => it.min(),
            }?;
            Some((k, v))
        })
        .collect();
    let best = match kind {
        SuperlativeKind::Argmax => keyed.iter().map(|(k, _)| *k).max(),
        SuperlativeKind::Argmin => keyed.iter().map(|(k, _)| *k).min(),
    };
    match best {
        Some(b) => keyed
            .into_iter()
            .filter(|(k, _)| *k == b)
            .map(|(_, v)| v.clone())
            .collect(),
        None => BTreeSet::new(),
    }
}

/// Assembles the method call of a root form without invoking it.
pub fn execute_to_call(
    lf: &LogicalForm,
    state: &State,
    domain: &Domain,
) -> Result<MethodCall, ExecutionError> {
    let LogicalForm::Call(name, args) = lf else {
        return Err(ExecutionError::NotACall);
    };
    let method = domain
        .method(name)
        .ok_or_else(|| ExecutionError::UnknownMethod {
            domain: domain.id.clone(),
            method: name.to_string(),
        })?;
    if method.arity() != args.len() {
        return Err(ExecutionError::Arity {
            method: name.to_string(),
            expected: method.arity(),
            got: args.len(),
        });
    }
    let mut arguments = Vec::with_capacity(args.len());
    for (index, (arg, spec)) in args.iter().zip(&method.parameters).enumerate() {
        let set = denote(arg, state)?;
        check_argument(spec, &set, state).map_err(|reason| ExecutionError::BadArgument {
            method: name.to_string(),
            index,
            reason,
        })?;
        arguments.push(set);
    }
    Ok(MethodCall {
        method: name.clone(),
        arguments,
    })
}

/// Evaluates `lf`. Root calls are invoked through the domain's logic, which
/// is required for them.
pub fn execute(
    lf: &LogicalForm,
    state: &State,
    domain: Option<&Domain>,
) -> Result<Denotation, ExecutionError> {
    if !lf.is_call() {
        return denote(lf, state).map(Denotation::Set);
    }
    let domain = domain.ok_or(ExecutionError::NoDomain)?;
    let call = execute_to_call(lf, state, domain)?;
    Ok(Denotation::State(domain.logic().invoke(state, &call)?))
}
