//! Chart filling.

use std::cmp::Ordering;
use std::sync::Arc;

use smallvec::SmallVec;

use super::index::Bits;
use super::{Category, Derivation, Item, ParseError, ParseInput, ParserConfig};
use crate::domain::{MethodCall, ObjectKind, ParameterSpec};
use crate::features::lexicon::{AND, FORWARD};
use crate::features::{Predicate, PredicateIds, PredicateKind};
use crate::knowledge::{Relation, Value};
use crate::logical_form::{denote, LogicalForm, SuperlativeKind};
use crate::training::{score, WeightVector};

type Cell = Vec<Arc<Derivation>>;

/// The three categories that live in sized cells.
const VALUE: usize = 0;
const SET: usize = 1;
const ROOT: usize = 2;

struct Grammar<'a> {
    input: &'a ParseInput,
    deltas: Vec<f64>,
    relations: Vec<Arc<Derivation>>,
    relation_preds: Vec<u16>,
    int_relations: Vec<usize>,
    entity_relations: Vec<usize>,
    methods: Vec<Arc<Derivation>>,
    method_preds: Vec<u16>,
    op_and: u16,
    op_forward: u16,
    op_argmax: u16,
    op_argmin: u16,
}

enum Rule<'c> {
    Reverse(usize, &'c Arc<Derivation>),
    Forward(usize, &'c Arc<Derivation>),
    Intersect(&'c Arc<Derivation>, &'c Arc<Derivation>),
    Superlative(SuperlativeKind, &'c Arc<Derivation>, usize),
    Call(usize, SmallVec<[&'c Arc<Derivation>; 2]>),
}

struct Proposal<'c> {
    score: f64,
    rule: Rule<'c>,
    preds: PredicateIds,
    mask: u128,
    bits: Option<Bits>,
}

fn union(a: &[u16], b: &[u16]) -> PredicateIds {
    let mut out = PredicateIds::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn with(ids: &[u16], extra: &[u16]) -> PredicateIds {
    let mut sorted: SmallVec<[u16; 2]> = extra.iter().copied().collect();
    sorted.sort_unstable();
    union(ids, &sorted)
}

/// Compares the concatenations of two chunk lists without building them.
fn compare_chunks(a: &[&str], b: &[&str]) -> Ordering {
    let (mut ai, mut bi) = (0, 0);
    let (mut ao, mut bo) = (0, 0);
    loop {
        while ai < a.len() && ao == a[ai].len() {
            ai += 1;
            ao = 0;
        }
        while bi < b.len() && bo == b[bi].len() {
            bi += 1;
            bo = 0;
        }
        match (ai < a.len(), bi < b.len()) {
            (false, false) => return Ordering::Equal,
            (false, true) => return Ordering::Less,
            (true, false) => return Ordering::Greater,
            (true, true) => {}
        }
        let x = &a[ai].as_bytes()[ao..];
        let y = &b[bi].as_bytes()[bo..];
        let n = x.len().min(y.len());
        match x[..n].cmp(&y[..n]) {
            Ordering::Equal => {
                ao += n;
                bo += n;
            }
            other => return other,
        }
    }
}

impl<'a> Grammar<'a> {
    fn new(input: &'a ParseInput, weights: &WeightVector) -> Self {
        let fc = &input.features;
        let deltas = (0..fc.predicate_count())
            .map(|i| score(weights, fc.delta(i as u16)))
            .collect();
        let id = |kind, name: &str| {
            fc.predicate_id(&Predicate::new(kind, name))
                .expect("domain predicates are always registered")
        };
        let domain = &input.domain;
        let mut relations = Vec::new();
        let mut relation_preds = Vec::new();
        let mut int_relations = Vec::new();
        let mut entity_relations = Vec::new();
        for (i, name) in input.index.relations.iter().enumerate() {
            let spec = domain.relation(name).expect("indexed relations are declared");
            let pid = id(PredicateKind::Relation, name);
            relation_preds.push(pid);
            relations.push(Arc::new(leaf(
                Item::Relation(Relation::new(name.as_str())),
                Category::Relation,
                name,
                pid,
            )));
            if spec.object == ObjectKind::Int {
                int_relations.push(i);
            }
            if spec.is_entity_valued() {
                entity_relations.push(i);
            }
        }
        let mut methods = Vec::new();
        let mut method_preds = Vec::new();
        for m in &domain.methods {
            let pid = id(PredicateKind::Method, &m.name);
            method_preds.push(pid);
            methods.push(Arc::new(leaf(
                Item::Method(m.name.as_str().into()),
                Category::Method,
                &m.name,
                pid,
            )));
        }
        Grammar {
            input,
            deltas,
            relations,
            relation_preds,
            int_relations,
            entity_relations,
            methods,
            method_preds,
            op_and: id(PredicateKind::Operator, AND),
            op_forward: id(PredicateKind::Operator, FORWARD),
            op_argmax: id(PredicateKind::Operator, SuperlativeKind::Argmax.name()),
            op_argmin: id(PredicateKind::Operator, SuperlativeKind::Argmin.name()),
        }
    }

    fn score_of(&self, preds: &[u16]) -> f64 {
        preds.iter().map(|&p| self.deltas[p as usize]).sum()
    }

    fn relation_name(&self, r: usize) -> &str {
        &self.input.index.relations[r]
    }

    fn chunks<'s>(&'s self, rule: &'s Rule<'_>) -> SmallVec<[&'s str; 8]> {
        let mut out: SmallVec<[&str; 8]> = SmallVec::new();
        match rule {
            Rule::Reverse(r, z) => out.extend(["R[", self.relation_name(*r), "].", z.printed()]),
            Rule::Forward(r, z) => out.extend(["F[", self.relation_name(*r), "].", z.printed()]),
            Rule::Intersect(a, b) => out.extend(["and(", a.printed(), ", ", b.printed(), ")"]),
            Rule::Superlative(kind, set, key) => out.extend([
                kind.name(),
                "(",
                set.printed(),
                ", R[",
                self.relation_name(*key),
                "])",
            ]),
            Rule::Call(m, args) => {
                out.push(self.methods[*m].printed());
                out.push("(");
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(", ");
                    }
                    out.push(a.printed());
                }
                out.push(")");
            }
        }
        out
    }

    /// Higher score first, then printed form ascending.
    fn rank(&self, a: &Proposal, b: &Proposal) -> Ordering {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| compare_chunks(&self.chunks(&a.rule), &self.chunks(&b.rule)))
    }

    fn select<'c>(&self, mut props: Vec<Proposal<'c>>, beam: usize) -> Vec<Proposal<'c>> {
        if props.len() > beam {
            props.select_nth_unstable_by(beam - 1, |a, b| self.rank(a, b));
            props.truncate(beam);
        }
        props.sort_by(|a, b| self.rank(a, b));
        props
    }

    fn materialize(&self, p: Proposal<'_>) -> Derivation {
        let printed: String = self.chunks(&p.rule).concat();
        let form = |d: &Arc<Derivation>| Arc::new(d.lf().expect("form child").clone());
        let (lf, category, children, call) = match &p.rule {
            Rule::Reverse(r, z) => (
                LogicalForm::ReverseJoin(Relation::new(self.relation_name(*r)), form(z)),
                Category::EntitySet,
                vec![self.relations[*r].clone(), (*z).clone()],
                None,
            ),
            Rule::Forward(r, z) => (
                LogicalForm::ForwardJoin(Relation::new(self.relation_name(*r)), form(z)),
                Category::EntitySet,
                vec![self.relations[*r].clone(), (*z).clone()],
                None,
            ),
            Rule::Intersect(a, b) => (
                LogicalForm::Intersect(form(a), form(b)),
                Category::EntitySet,
                vec![(*a).clone(), (*b).clone()],
                None,
            ),
            Rule::Superlative(kind, set, key) => (
                LogicalForm::Superlative {
                    kind: *kind,
                    set: form(set),
                    key: Relation::new(self.relation_name(*key)),
                },
                Category::EntitySet,
                vec![(*set).clone(), self.relations[*key].clone()],
                None,
            ),
            Rule::Call(m, args) => {
                let name = self.input.domain.methods[*m].name.as_str();
                let index = &self.input.index;
                let call = MethodCall::new(
                    name,
                    args.iter()
                        .map(|a| index.to_set(a.bits.as_ref().expect("argument denotation")))
                        .collect(),
                );
                let mut children = vec![self.methods[*m].clone()];
                children.extend(args.iter().map(|a| (*a).clone()));
                (
                    LogicalForm::Call(name.into(), args.iter().map(|a| form(a)).collect()),
                    Category::Root,
                    children,
                    Some(call),
                )
            }
        };
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        Derivation {
            item: Item::Form(lf),
            category,
            size,
            anchored: p.mask,
            children,
            call,
            preds: p.preds,
            partial_score: p.score,
            bits: p.bits,
            printed: printed.into(),
        }
    }

    fn value_leaves(&self) -> Cell {
        let fc = &self.input.features;
        let index = &self.input.index;
        let mut out: Vec<Derivation> = Vec::new();
        let mut push = |v: &Value, mask: u128| {
            let lf = LogicalForm::Value(v.clone());
            let set = denote(&lf, &self.input.state).expect("literals always denote");
            let preds: PredicateIds = fc.predicate_id(&Predicate::value(v)).into_iter().collect();
            let printed = lf.to_string();
            out.push(Derivation {
                item: Item::Form(lf),
                category: Category::Value,
                size: 1,
                anchored: mask,
                children: Vec::new(),
                call: None,
                partial_score: self.score_of(&preds),
                preds,
                bits: Some(index.bits_of(&set)),
                printed: printed.into(),
            });
        };
        for a in &fc.anchors {
            push(&a.value, a.mask());
        }
        for s in self.input.domain.symbols() {
            push(&Value::sym(s.as_str()), 0);
        }
        dedup_and_rank(out)
    }

    fn type_leaves(&self) -> Cell {
        let fc = &self.input.features;
        let mut out = Vec::new();
        for ty in &self.input.domain.entity_types {
            let bits = self.input.index.type_bits(ty);
            if bits.is_empty() {
                continue;
            }
            let lf = LogicalForm::TypeSet(ty.as_str().into());
            let preds: PredicateIds = fc
                .predicate_id(&Predicate::new(PredicateKind::Type, ty))
                .into_iter()
                .collect();
            out.push(Derivation {
                printed: lf.to_string().into(),
                item: Item::Form(lf),
                category: Category::EntitySet,
                size: 1,
                anchored: 0,
                children: Vec::new(),
                call: None,
                partial_score: self.score_of(&preds),
                preds,
                bits: Some(bits),
            });
        }
        dedup_and_rank(out)
    }

    fn entity_sets<'c>(&self, cells: &'c [[Cell; 3]], k: usize) -> Vec<Proposal<'c>> {
        let index = &self.input.index;
        let mut props = Vec::new();
        if k >= 3 {
            for cat in [VALUE, SET] {
                for z in &cells[k - 2][cat] {
                    let zb = z.bits.as_ref().expect("set denotation");
                    for r in 0..self.relations.len() {
                        let bits = index.reverse_join(r, zb);
                        if bits.is_empty() {
                            continue;
                        }
                        let preds = with(&z.preds, &[self.relation_preds[r]]);
                        props.push(Proposal {
                            score: self.score_of(&preds),
                            rule: Rule::Reverse(r, z),
                            preds,
                            mask: z.anchored,
                            bits: Some(bits),
                        });
                    }
                }
            }
            for z in &cells[k - 2][SET] {
                let zb = z.bits.as_ref().expect("set denotation");
                for &r in &self.entity_relations {
                    let bits = index.forward_join(r, zb);
                    if bits.is_empty() {
                        continue;
                    }
                    let preds = with(&z.preds, &[self.relation_preds[r], self.op_forward]);
                    props.push(Proposal {
                        score: self.score_of(&preds),
                        rule: Rule::Forward(r, z),
                        preds,
                        mask: z.anchored,
                        bits: Some(bits),
                    });
                }
                for &r in &self.int_relations {
                    for (kind, op) in [
                        (SuperlativeKind::Argmax, self.op_argmax),
                        (SuperlativeKind::Argmin, self.op_argmin),
                    ] {
                        let bits = index.superlative(r, zb, kind == SuperlativeKind::Argmax);
                        if bits.is_empty() {
                            continue;
                        }
                        let preds = with(&z.preds, &[self.relation_preds[r], op]);
                        props.push(Proposal {
                            score: self.score_of(&preds),
                            rule: Rule::Superlative(kind, z, r),
                            preds,
                            mask: z.anchored,
                            bits: Some(bits),
                        });
                    }
                }
            }
        }
        for i in 1..k.saturating_sub(1) {
            let j = k - 1 - i;
            if i > j {
                break;
            }
            let left = &cells[i][SET];
            let right = &cells[j][SET];
            for (xi, x) in left.iter().enumerate() {
                let xb = x.bits.as_ref().expect("set denotation");
                let start = if i == j { xi + 1 } else { 0 };
                for y in &right[start.min(right.len())..] {
                    if x.anchored & y.anchored != 0 {
                        continue;
                    }
                    let bits = xb.and(y.bits.as_ref().expect("set denotation"));
                    if bits.is_empty() {
                        continue;
                    }
                    let (a, b) = match x.printed().cmp(y.printed()) {
                        Ordering::Less => (x, y),
                        Ordering::Greater => (y, x),
                        Ordering::Equal => continue,
                    };
                    let preds = with(&union(&a.preds, &b.preds), &[self.op_and]);
                    props.push(Proposal {
                        score: self.score_of(&preds),
                        rule: Rule::Intersect(a, b),
                        preds,
                        mask: a.anchored | b.anchored,
                        bits: Some(bits),
                    });
                }
            }
        }
        props
    }

    /// Derivations in `cell` that can fill `param`.
    fn eligible<'c>(&self, cells: &'c [[Cell; 3]], size: usize, param: &ParameterSpec) -> Vec<&'c Arc<Derivation>> {
        let index = &self.input.index;
        match param {
            ParameterSpec::EntityCollection(ty) | ParameterSpec::SingleEntity(ty) => {
                let tb = index.type_bits(ty);
                let single = matches!(param, ParameterSpec::SingleEntity(_));
                cells[size][SET]
                    .iter()
                    .filter(|d| {
                        let b = d.bits.as_ref().expect("set denotation");
                        b.is_subset(&tb) && (!single || b.count() == 1)
                    })
                    .collect()
            }
            ParameterSpec::IntegerArg => cells[size][VALUE]
                .iter()
                .filter(|d| matches!(index.single(d.bits.as_ref().unwrap()), Some(Value::Int(_))))
                .collect(),
            ParameterSpec::EnumArg(allowed) => cells[size][VALUE]
                .iter()
                .filter(|d| match index.single(d.bits.as_ref().unwrap()) {
                    Some(Value::Sym(s)) => allowed.iter().any(|a| a == &**s),
                    _ => false,
                })
                .collect(),
        }
    }

    fn roots<'c>(&self, cells: &'c [[Cell; 3]], k: usize) -> Vec<Proposal<'c>> {
        let mut props = Vec::new();
        for (m, method) in self.input.domain.methods.iter().enumerate() {
            let own = [self.method_preds[m]];
            let budget = k - 2;
            match method.parameters.as_slice() {
                [] if budget == 0 => props.push(Proposal {
                    score: self.score_of(&own),
                    rule: Rule::Call(m, SmallVec::new()),
                    preds: own.iter().copied().collect(),
                    mask: 0,
                    bits: None,
                }),
                [p] if budget >= 1 => {
                    for a in self.eligible(cells, budget, p) {
                        let preds = with(&a.preds, &own);
                        props.push(Proposal {
                            score: self.score_of(&preds),
                            rule: Rule::Call(m, SmallVec::from_slice(&[a])),
                            preds,
                            mask: a.anchored,
                            bits: None,
                        });
                    }
                }
                [p0, p1] if budget >= 2 => {
                    for i in 1..budget {
                        let firsts = self.eligible(cells, i, p0);
                        if firsts.is_empty() {
                            continue;
                        }
                        let seconds = self.eligible(cells, budget - i, p1);
                        for a in &firsts {
                            for b in &seconds {
                                if a.anchored & b.anchored != 0 {
                                    continue;
                                }
                                let preds = with(&union(&a.preds, &b.preds), &own);
                                props.push(Proposal {
                                    score: self.score_of(&preds),
                                    rule: Rule::Call(m, SmallVec::from_slice(&[*a, *b])),
                                    preds,
                                    mask: a.anchored | b.anchored,
                                    bits: None,
                                });
                            }
                        }
                    }
                }
                [] | [_] | [_, _] => {}
                _ => {
                    for_each_split(self, cells, m, budget, &mut props);
                }
            }
        }
        props
    }
}

/// Calls with three or more parameters: enumerate every size split.
fn for_each_split<'c>(
    g: &Grammar<'_>,
    cells: &'c [[Cell; 3]],
    m: usize,
    budget: usize,
    props: &mut Vec<Proposal<'c>>,
) {
    let params = &g.input.domain.methods[m].parameters;
    let mut stack: Vec<(SmallVec<[&'c Arc<Derivation>; 2]>, usize)> = vec![(SmallVec::new(), 0)];
    while let Some((args, used)) = stack.pop() {
        let pos = args.len();
        if pos == params.len() {
            if used == budget {
                let mut preds: PredicateIds = [g.method_preds[m]].into_iter().collect();
                let mut mask = 0;
                for a in &args {
                    preds = union(&preds, &a.preds);
                    mask |= a.anchored;
                }
                props.push(Proposal {
                    score: g.score_of(&preds),
                    rule: Rule::Call(m, args),
                    preds,
                    mask,
                    bits: None,
                });
            }
            continue;
        }
        let remaining = params.len() - pos - 1;
        for size in 1..=budget.saturating_sub(used + remaining) {
            for a in g.eligible(cells, size, &params[pos]) {
                if args.iter().any(|x| x.anchored & a.anchored != 0) {
                    continue;
                }
                let mut next = args.clone();
                next.push(a);
                stack.push((next, used + size));
            }
        }
    }
}

fn leaf(item: Item, category: Category, name: &str, pred: u16) -> Derivation {
    Derivation {
        item,
        category,
        size: 1,
        anchored: 0,
        children: Vec::new(),
        call: None,
        preds: [pred].into_iter().collect(),
        partial_score: 0.0,
        bits: None,
        printed: name.into(),
    }
}

fn dedup_and_rank(mut ds: Vec<Derivation>) -> Cell {
    let mut seen = std::collections::HashSet::new();
    ds.retain(|d| seen.insert(d.printed.clone()));
    ds.sort_by(|a, b| {
        b.partial_score
            .partial_cmp(&a.partial_score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.printed.cmp(&b.printed))
    });
    ds.into_iter().map(Arc::new).collect()
}

/// Fills the chart and returns every root derivation that survived its
/// beam, smallest size first.
pub fn generate_candidates(
    input: &ParseInput,
    weights: &WeightVector,
    config: &ParserConfig,
) -> Result<Vec<Arc<Derivation>>, ParseError> {
    let g = Grammar::new(input, weights);
    let max = config.max_rule_applications;
    let beam = config.beam_size.max(1);
    let mut cells: Vec<[Cell; 3]> = vec![Default::default(); max + 1];
    if max >= 1 {
        let mut values = g.value_leaves();
        values.truncate(beam);
        let mut types = g.type_leaves();
        types.truncate(beam);
        cells[1] = [values, types, Vec::new()];
    }
    for k in 2..=max {
        let sets: Cell = {
            let props = g.entity_sets(&cells, k);
            g.select(props, beam)
                .into_iter()
                .map(|p| Arc::new(g.materialize(p)))
                .collect()
        };
        let roots: Cell = {
            let props = g.roots(&cells, k);
            g.select(props, beam)
                .into_iter()
                .map(|p| Arc::new(g.materialize(p)))
                .collect()
        };
        cells[k][SET] = sets;
        cells[k][ROOT] = roots;
    }
    let roots: Vec<Arc<Derivation>> = cells.into_iter().flat_map(|[_, _, r]| r).collect();
    if roots.is_empty() {
        return Err(ParseError::EmptyCandidateSet);
    }
    Ok(roots)
}
