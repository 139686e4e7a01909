//! Sparse features φ(x, s, z) of a candidate logical form.
//!
//! Every template is a sum over the distinct predicates of the form plus a
//! size term, so a [`FeatureContext`] precomputes one delta vector per
//! predicate and the parser can score partial derivations incrementally.

pub mod lexicon;
pub mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use lexicon::{Lexicon, Predicate, PredicateKind, Via, ARGMAX_PHRASES, ARGMIN_PHRASES};
pub use text::{split_identifier, tokenize, Anchor, AnchorKind};

use crate::domain::Domain;
use crate::knowledge::State;
use crate::logical_form::LogicalForm;

/// Sparse vector keyed by feature name, sorted, without zero entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(Arc<str>, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sums duplicate names and drops zeros.
    pub fn from_pairs<I, K>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<Arc<str>>,
    {
        let mut acc: BTreeMap<Arc<str>, f64> = BTreeMap::new();
        for (k, v) in pairs {
            *acc.entry(k.into()).or_insert(0.0) += v;
        }
        FeatureVector {
            entries: acc.into_iter().filter(|(_, v)| *v != 0.0).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> f64 {
        self.entries
            .binary_search_by(|(k, _)| (**k).cmp(name))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// `self + scale · other`.
    pub fn add_scaled(&self, other: &FeatureVector, scale: f64) -> FeatureVector {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            let (k, v) = match ord {
                std::cmp::Ordering::Less => {
                    i += 1;
                    (a[i - 1].0.clone(), a[i - 1].1)
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    (b[j - 1].0.clone(), scale * b[j - 1].1)
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (a[i - 1].0.clone(), a[i - 1].1 + scale * b[j - 1].1)
                }
            };
            if v != 0.0 {
                out.push((k, v));
            }
        }
        FeatureVector { entries: out }
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    /// Description-phrase and size features.
    pub use_new_features: bool,
    /// Plural stripping on utterance tokens and lexicon phrases.
    pub stemming: bool,
    /// `pp|phrase|predicate` for every utterance phrase and non-value predicate.
    pub pair_features: bool,
    /// Largest `n` for `size>n`.
    pub max_size: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            use_new_features: true,
            stemming: false,
            pair_features: true,
            max_size: 15,
        }
    }
}

pub type PredicateIds = SmallVec<[u16; 8]>;

/// Per-example feature tables: the utterance analysis plus one delta vector
/// per predicate.
#[derive(Debug, Clone)]
pub struct FeatureContext {
    pub tokens: Vec<String>,
    pub anchors: Vec<Anchor>,
    config: FeatureConfig,
    predicates: Vec<Predicate>,
    ids: HashMap<Predicate, u16>,
    deltas: Vec<FeatureVector>,
    base: FeatureVector,
    sizes: Vec<FeatureVector>,
}

impl FeatureContext {
    pub fn new(
        utterance: &str,
        state: &State,
        domain: &Domain,
        lexicon: &Lexicon,
        config: FeatureConfig,
    ) -> Self {
        let tokens = tokenize(utterance);
        let anchors = text::find_anchors(&tokens, state);
        let mut masked: Vec<Option<String>> = tokens
            .iter()
            .map(|t| {
                if t.chars().all(|c| c.is_ascii_digit()) {
                    None
                } else if config.stemming {
                    Some(text::stem(t))
                } else {
                    Some(t.clone())
                }
            })
            .collect();
        for a in anchors.iter().filter(|a| a.kind == AnchorKind::Text) {
            for slot in &mut masked[a.start..a.end] {
                *slot = None;
            }
        }
        let phrases = text::phrase_counts(&masked);

        let mut anchored: BTreeMap<Predicate, f64> = BTreeMap::new();
        for a in &anchors {
            *anchored.entry(Predicate::value(&a.value)).or_insert(0.0) += 1.0;
        }
        let mut universe: BTreeSet<Predicate> = lexicon::domain_predicates(domain).into_iter().collect();
        universe.extend(lexicon.predicates().cloned());
        universe.extend(anchored.keys().cloned());
        let predicates: Vec<Predicate> = universe.into_iter().collect();

        let mut base: Vec<(String, f64)> = Vec::new();
        let mut deltas = Vec::with_capacity(predicates.len());
        for q in &predicates {
            let kind = q.kind.name();
            let mut delta: Vec<(String, f64)> = Vec::new();
            let mut matched = false;
            for (p, via) in lexicon.phrases(q) {
                if via == Via::Desc && !config.use_new_features {
                    continue;
                }
                let Some(&count) = phrases.get(p) else { continue };
                matched = true;
                let any_cooc = format!("cooc-any|{kind}|{}", via.name());
                let any_missing = format!("missing-any|{kind}|{}", via.name());
                if q.kind != PredicateKind::Value {
                    delta.push((format!("cooc|{p}|{}", q.name), count));
                    base.push((format!("missing|{p}|{}", q.name), 1.0));
                    delta.push((format!("missing|{p}|{}", q.name), -1.0));
                }
                delta.push((any_cooc, count));
                base.push((any_missing.clone(), 1.0));
                delta.push((any_missing, -1.0));
            }
            if let Some(&count) = anchored.get(q) {
                matched = true;
                delta.push(("cooc-any|value|anchor".into(), count));
                base.push(("missing-any|value|anchor".into(), 1.0));
                delta.push(("missing-any|value|anchor".into(), -1.0));
            }
            if !matched {
                delta.push((format!("unmatched|{kind}"), 1.0));
            }
            if config.pair_features && q.kind != PredicateKind::Value {
                for (p, &count) in &phrases {
                    delta.push((format!("pp|{p}|{}", q.name), count));
                }
            }
            deltas.push(FeatureVector::from_pairs(delta));
        }

        let sizes = (0..=config.max_size + 1)
            .map(|size| {
                if !config.use_new_features {
                    return FeatureVector::new();
                }
                FeatureVector::from_pairs(
                    (2..size.min(config.max_size + 1)).map(|n| (format!("size>{n}"), 1.0)),
                )
            })
            .collect();

        let ids = predicates
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u16))
            .collect();
        FeatureContext {
            tokens,
            anchors,
            config,
            predicates,
            ids,
            deltas,
            base: FeatureVector::from_pairs(base),
            sizes,
        }
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn predicate(&self, id: u16) -> &Predicate {
        &self.predicates[id as usize]
    }

    pub fn predicate_id(&self, p: &Predicate) -> Option<u16> {
        self.ids.get(p).copied()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    /// Sorted, distinct ids of the known predicates of `lf`. Unknown
    /// predicates contribute no features and are left out.
    pub fn predicate_ids(&self, lf: &LogicalForm) -> PredicateIds {
        let mut preds = Vec::new();
        lexicon::predicates_of(lf, &mut preds);
        let mut ids: PredicateIds = preds.iter().filter_map(|p| self.predicate_id(p)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn base(&self) -> &FeatureVector {
        &self.base
    }

    pub fn delta(&self, id: u16) -> &FeatureVector {
        &self.deltas[id as usize]
    }

    pub fn size_features(&self, size: usize) -> &FeatureVector {
        &self.sizes[size.min(self.sizes.len() - 1)]
    }

    /// φ for a form with the given predicate ids and rule count.
    pub fn combine(&self, ids: &[u16], size: usize) -> FeatureVector {
        let mut acc: BTreeMap<Arc<str>, f64> = BTreeMap::new();
        let parts = std::iter::once(&self.base)
            .chain(ids.iter().map(|&i| self.delta(i)))
            .chain(std::iter::once(self.size_features(size)));
        for fv in parts {
            for (k, v) in fv.iter() {
                *acc.entry(k.clone()).or_insert(0.0) += v;
            }
        }
        FeatureVector {
            entries: acc.into_iter().filter(|(_, v)| *v != 0.0).collect(),
        }
    }

    /// φ(x, s, z) for a root form built with `size` rule applications.
    pub fn extract(&self, lf: &LogicalForm, size: usize) -> FeatureVector {
        self.combine(&self.predicate_ids(lf), size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::builtin;
    use crate::knowledge::Value;
    use crate::logical_form::parse;

    fn file_state() -> State {
        let mut b = State::builder("file");
        let d = b.entity("dir1", "Directory");
        b.add(&d, "name", Value::text("documents"));
        for (id, size) in [("f1", 10), ("f2", 99)] {
            let f = b.entity(id, "File");
            b.add(&f, "name", Value::text("report"));
            b.add(&f, "sizeInBytes", Value::Int(size));
            b.add(&d, "childFiles", Value::Entity(f));
        }
        b.build().unwrap()
    }

    fn ctx(utterance: &str, config: FeatureConfig) -> FeatureContext {
        let d = builtin::file::domain();
        let lex = Lexicon::build(&d, config.stemming);
        FeatureContext::new(utterance, &file_state(), &d, &lex, config)
    }

    #[test]
    fn delete_the_largest_file() {
        let c = ctx("Delete the largest file", FeatureConfig::default());
        let good = parse("removeFiles(argmax(R[type].File, R[sizeInBytes]))").unwrap();
        let phi = c.extract(&good, good.size());
        assert_eq!(phi.get("cooc|delete|removeFiles"), 1.0);
        assert_eq!(phi.get("missing|delete|removeFiles"), 0.0);
        assert_eq!(phi.get("cooc|largest|argmax"), 1.0);
        assert_eq!(phi.get("cooc|file|File"), 1.0);
        let bad = parse("moveFiles(argmax(R[type].File, R[sizeInBytes]), R[type].Directory)").unwrap();
        let phi = c.extract(&bad, bad.size());
        assert_eq!(phi.get("missing|delete|removeFiles"), 1.0);
        assert_eq!(phi.get("cooc|delete|removeFiles"), 0.0);
    }

    #[test]
    fn size_features() {
        let c = ctx("delete", FeatureConfig::default());
        let lf = parse("removeFiles(argmax(R[type].File, R[sizeInBytes]))").unwrap();
        let phi = c.extract(&lf, 5);
        for n in 2..5 {
            assert_eq!(phi.get(&format!("size>{n}")), 1.0);
        }
        assert_eq!(phi.get("size>5"), 0.0);
        assert_eq!(phi.get("size>1"), 0.0);
    }

    #[test]
    fn ablation_drops_description_and_size_features() {
        let config = FeatureConfig {
            use_new_features: false,
            ..FeatureConfig::default()
        };
        let c = ctx("erase the report", config);
        let lf = parse("removeFiles(R[name].report)").unwrap();
        let phi = c.extract(&lf, 6);
        assert!(phi.iter().all(|(k, _)| !k.starts_with("size>") && !k.ends_with("|desc")));
        assert_eq!(phi.get("cooc|erase|removeFiles"), 0.0);
        let c = ctx("erase the report", FeatureConfig::default());
        assert_eq!(c.extract(&lf, 6).get("cooc|erase|removeFiles"), 1.0);
    }

    #[test]
    fn counts_repeated_phrases() {
        let c = ctx("delete delete it", FeatureConfig::default());
        let lf = parse("removeFiles(R[type].File)").unwrap();
        assert_eq!(c.extract(&lf, 4).get("cooc|delete|removeFiles"), 2.0);
    }

    #[test]
    fn anchored_values_are_unlexicalized() {
        let c = ctx("delete the report of size 99", FeatureConfig::default());
        let lf = parse("removeFiles(and(R[name].report, R[sizeInBytes].99))").unwrap();
        let phi = c.extract(&lf, lf.size());
        assert_eq!(phi.get("cooc-any|value|anchor"), 2.0);
        for (k, _) in phi.iter() {
            assert!(!k.contains("report") && !k.contains("99"), "{k}");
        }
        let partial = parse("removeFiles(R[name].report)").unwrap();
        let phi = c.extract(&partial, partial.size());
        assert_eq!(phi.get("missing-any|value|anchor"), 1.0);
    }

    #[test]
    fn combine_matches_delta_sum() {
        let c = ctx("delete the largest file", FeatureConfig::default());
        let lf = parse("removeFiles(argmax(R[type].File, R[sizeInBytes]))").unwrap();
        let ids = c.predicate_ids(&lf);
        let mut manual = c.base().clone();
        for &i in &ids {
            manual = manual.add_scaled(c.delta(i), 1.0);
        }
        manual = manual.add_scaled(c.size_features(5), 1.0);
        assert_eq!(manual, c.extract(&lf, 5));
    }

    #[test]
    fn add_scaled_merges() {
        let a = FeatureVector::from_pairs([("a", 1.0), ("b", 2.0)]);
        let b = FeatureVector::from_pairs([("b", 1.0), ("c", 3.0)]);
        let s = a.add_scaled(&b, -2.0);
        assert_eq!(s.to_map(), BTreeMap::from([("a".into(), 1.0), ("c".into(), -6.0)]));
    }
}
