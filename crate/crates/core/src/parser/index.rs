//! Bitset view of a state used by the chart.

use std::collections::{BTreeSet, HashMap};

use smallvec::{smallvec, SmallVec};

use crate::domain::Domain;
use crate::knowledge::{State, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bits(SmallVec<[u64; 2]>);

impl Bits {
    pub fn empty(words: usize) -> Self {
        Bits(smallvec![0; words])
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Values numbered densely, with per-relation join tables.
pub(crate) struct StateIndex {
    pub values: Vec<Value>,
    ids: HashMap<Value, usize>,
    words: usize,
    /// `relations[r]` is the relation name; tables are indexed alike.
    pub relations: Vec<String>,
    /// `reverse[r][o]`: subjects with `(s, r, o)`.
    reverse: Vec<Vec<Bits>>,
    /// `forward[r][s]`: objects with `(s, r, o)`.
    forward: Vec<Vec<Bits>>,
    /// `ints[r][s]`: integer objects of `(s, r, ·)`.
    ints: Vec<Vec<Vec<i64>>>,
    types: HashMap<String, Bits>,
}

impl StateIndex {
    pub fn new(state: &State, domain: &Domain, extra: impl IntoIterator<Item = Value>) -> Self {
        let mut all: BTreeSet<Value> = state.entities().iter().cloned().map(Value::Entity).collect();
        for t in state.triples() {
            all.insert(t.object.clone());
        }
        all.extend(domain.symbols().into_iter().map(|s| Value::sym(s.as_str())));
        all.extend(extra);
        let values: Vec<Value> = all.into_iter().collect();
        let ids: HashMap<Value, usize> = values.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let words = values.len().div_ceil(64).max(1);
        let relations: Vec<String> = domain.relations.iter().map(|r| r.name.clone()).collect();
        let n = values.len();
        let mut reverse = vec![vec![Bits::empty(words); n]; relations.len()];
        let mut forward = vec![vec![Bits::empty(words); n]; relations.len()];
        let mut ints = vec![vec![Vec::new(); n]; relations.len()];
        for t in state.triples() {
            let Some(r) = relations.iter().position(|r| r == t.relation.name()) else {
                continue;
            };
            let s = ids[&Value::Entity(t.subject.clone())];
            let o = ids[&t.object];
            reverse[r][o].insert(s);
            forward[r][s].insert(o);
            if let Value::Int(i) = t.object {
                ints[r][s].push(i);
            }
        }
        let mut types: HashMap<String, Bits> = HashMap::new();
        for ty in &domain.entity_types {
            types.insert(ty.clone(), Bits::empty(words));
        }
        for e in state.entities() {
            let id = ids[&Value::Entity(e.clone())];
            types
                .entry(e.ty.to_string())
                .or_insert_with(|| Bits::empty(words))
                .insert(id);
        }
        StateIndex {
            values,
            ids,
            words,
            relations,
            reverse,
            forward,
            ints,
            types,
        }
    }

    pub fn empty_bits(&self) -> Bits {
        Bits::empty(self.words)
    }

    pub fn bits_of<'a>(&self, values: impl IntoIterator<Item = &'a Value>) -> Bits {
        let mut b = self.empty_bits();
        for v in values {
            if let Some(&i) = self.ids.get(v) {
                b.insert(i);
            }
        }
        b
    }

    pub fn to_set(&self, bits: &Bits) -> BTreeSet<Value> {
        bits.ones().map(|i| self.values[i].clone()).collect()
    }

    pub fn single(&self, bits: &Bits) -> Option<&Value> {
        if bits.count() == 1 {
            bits.ones().next().map(|i| &self.values[i])
        } else {
            None
        }
    }

    pub fn type_bits(&self, ty: &str) -> Bits {
        self.types.get(ty).cloned().unwrap_or_else(|| self.empty_bits())
    }

    pub fn reverse_join(&self, r: usize, child: &Bits) -> Bits {
        let mut out = self.empty_bits();
        for o in child.ones() {
            out.or_assign(&self.reverse[r][o]);
        }
        out
    }

    pub fn forward_join(&self, r: usize, child: &Bits) -> Bits {
        let mut out = self.empty_bits();
        for s in child.ones() {
            out.or_assign(&self.forward[r][s]);
        }
        out
    }

    /// Members of `set` with the extreme `r` value.
    pub fn superlative(&self, r: usize, set: &Bits, max: bool) -> Bits {
        let mut best: Option<i64> = None;
        let mut out = self.empty_bits();
        for s in set.ones() {
            let keys = &self.ints[r][s];
            let k = if max { keys.iter().max() } else { keys.iter().min() };
            let Some(&k) = k else { continue };
            let better = match best {
                None => true,
                Some(b) => (max && k > b) || (!max && k < b),
            };
            if better {
                best = Some(k);
                out = self.empty_bits();
            }
            if best == Some(k) {
                out.insert(s);
            }
        }
        out
    }
}
