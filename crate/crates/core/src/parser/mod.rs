//! Floating parser: bottom-up beam search over a (category, size) chart,
//! followed by filtering with the application logic.

mod chart;
mod index;
mod predict;

pub use chart::generate_candidates;
pub use predict::{
    best_of, candidates, candidates_with, execute_candidates, filter_by_application_logic, predict,
    predict_with, Candidate, Prediction, Scorer,
};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Domain, MethodCall};
use crate::features::{FeatureConfig, FeatureContext, Lexicon, PredicateIds};
use crate::knowledge::{Relation, State};
use crate::logical_form::LogicalForm;

use index::{Bits, StateIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParserConfig {
    /// Derivations kept per chart cell; `usize::MAX` disables pruning.
    pub beam_size: usize,
    /// Largest derivation size, in rule applications.
    pub max_rule_applications: usize,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            beam_size: 200,
            max_rule_applications: 15,
        }
    }
}

impl ParserConfig {
    pub fn unbounded(max_rule_applications: usize) -> Self {
        ParserConfig {
            beam_size: usize::MAX,
            max_rule_applications,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Value,
    EntitySet,
    Relation,
    Method,
    Root,
}

/// What a derivation builds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Form(LogicalForm),
    Relation(Relation),
    Method(Arc<str>),
}

#[derive(Debug, Clone)]
pub struct Derivation {
    pub item: Item,
    pub category: Category,
    /// Rule applications, `1 + Σ children sizes`.
    pub size: usize,
    /// Utterance tokens consumed by anchored rules (bit `i` = token `i`).
    pub anchored: u128,
    pub children: Vec<Arc<Derivation>>,
    /// The assembled call, for roots.
    pub call: Option<MethodCall>,
    pub(crate) preds: PredicateIds,
    /// Σ of per-predicate score deltas; orders derivations within a cell.
    pub(crate) partial_score: f64,
    pub(crate) bits: Option<Bits>,
    printed: Arc<str>,
}

impl Derivation {
    /// The logical form; `None` for relation and method leaves.
    pub fn lf(&self) -> Option<&LogicalForm> {
        match &self.item {
            Item::Form(lf) => Some(lf),
            _ => None,
        }
    }

    /// The canonical printed form (the bare name for leaves).
    pub fn printed(&self) -> &str {
        &self.printed
    }

    pub fn anchored_tokens(&self) -> Vec<usize> {
        (0..128).filter(|i| self.anchored & (1u128 << i) != 0).collect()
    }

    pub fn predicate_ids(&self) -> &[u16] {
        &self.preds
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.printed)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("no candidate logical form")]
    EmptyCandidateSet,
    #[error("every candidate was rejected by the application logic")]
    AllFiltered,
}

/// Everything about one (utterance, state) pair that does not depend on the
/// weights. Reusable across training epochs.
pub struct ParseInput {
    pub utterance: String,
    pub state: State,
    pub domain: Arc<Domain>,
    pub features: FeatureContext,
    index: StateIndex,
}

impl ParseInput {
    pub fn new(
        utterance: &str,
        state: &State,
        domain: Arc<Domain>,
        lexicon: &Lexicon,
        feature_config: FeatureConfig,
    ) -> Self {
        let features = FeatureContext::new(utterance, state, &domain, lexicon, feature_config);
        let index = StateIndex::new(
            state,
            &domain,
            features.anchors.iter().map(|a| a.value.clone()),
        );
        ParseInput {
            utterance: utterance.to_string(),
            state: state.clone(),
            domain,
            features,
            index,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{builtin, generate_state_pair, DomainRegistry};
    use crate::knowledge::Value;
    use crate::logical_form::{execute_to_call, parse};
    use crate::training::WeightVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lighting_state() -> State {
        let mut b = State::builder("lighting");
        for (id, name, floor) in [("room1", "kitchen", 1), ("room2", "bedroom", 1), ("room3", "bedroom", 2)] {
            let r = b.entity(id, "Room");
            b.add(&r, "name", Value::text(name));
            b.add(&r, "floor", Value::Int(floor));
            b.add(&r, "lightMode", Value::sym("ON"));
        }
        b.build().unwrap()
    }

    fn input(utterance: &str, state: &State, domain: &Domain) -> ParseInput {
        let domain = Arc::new(domain.clone());
        let lex = Lexicon::build(&domain, false);
        ParseInput::new(utterance, state, domain, &lex, FeatureConfig::default())
    }

    #[test]
    fn bedroom_on_floor_two() {
        let d = builtin::lighting::domain();
        let s = lighting_state();
        let inp = input("turn off the light in the bedroom on floor 2", &s, &d);
        let roots = generate_candidates(&inp, &WeightVector::new(), &ParserConfig::default()).unwrap();
        let want = parse("turnLightOff(and(R[floor].2, R[name].bedroom))").unwrap();
        assert!(roots.iter().any(|r| r.lf() == Some(&want)));
        assert!(roots.iter().all(|r| r.size <= 15));
    }

    #[test]
    fn floating_rules_alone_yield_candidates() {
        let d = builtin::lighting::domain();
        let s = lighting_state();
        let inp = input("", &s, &d);
        let roots = generate_candidates(&inp, &WeightVector::new(), &ParserConfig::default()).unwrap();
        assert!(!roots.is_empty());
        assert!(roots.iter().all(|r| r.anchored == 0));
    }

    #[test]
    fn derivations_agree_with_executor() {
        let reg = DomainRegistry::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let config = ParserConfig { beam_size: 30, max_rule_applications: 9 };
        for d in reg.domains() {
            let m = &d.methods[0].name;
            let pair = generate_state_pair(d, m, &mut rng).unwrap();
            let inp = input("remove the first one on 2 with the largest", &pair.initial, d);
            let roots = generate_candidates(&inp, &WeightVector::new(), &config).unwrap();
            for r in &roots {
                let lf = r.lf().unwrap();
                assert_eq!(r.printed(), lf.to_string());
                assert_eq!(r.size, lf.size());
                assert_eq!(r.size, 1 + r.children.iter().map(|c| c.size).sum::<usize>());
                let call = execute_to_call(lf, &pair.initial, d).unwrap();
                assert_eq!(r.call.as_ref(), Some(&call), "{lf}");
                for c in &r.children {
                    assert!(c.size < r.size);
                }
            }
        }
    }

    #[test]
    fn beams_are_bounded_and_deterministic() {
        let d = builtin::lighting::domain();
        let s = lighting_state();
        let inp = input("switch on the kitchen", &s, &d);
        let config = ParserConfig { beam_size: 5, max_rule_applications: 10 };
        let a = generate_candidates(&inp, &WeightVector::new(), &config).unwrap();
        let b = generate_candidates(&inp, &WeightVector::new(), &config).unwrap();
        let pa: Vec<_> = a.iter().map(|d| d.printed().to_string()).collect();
        let pb: Vec<_> = b.iter().map(|d| d.printed().to_string()).collect();
        assert_eq!(pa, pb);
        for size in 1..=10 {
            assert!(a.iter().filter(|d| d.size == size).count() <= 5);
        }
    }

    #[test]
    fn filter_drops_no_ops_and_exceptions() {
        let d = builtin::lighting::domain();
        let s = lighting_state();
        let inp = input("turn on the lights", &s, &d);
        let roots = generate_candidates(&inp, &WeightVector::new(), &ParserConfig::default()).unwrap();
        let kept = filter_by_application_logic(&roots, &s, &d);
        assert!(kept.iter().all(|(r, _)| r.call.as_ref().unwrap().method.as_ref() != "turnLightOn"));
        assert!(!kept.is_empty());

        let w = builtin::workforce::domain();
        let mut b = State::builder("workforce");
        let m = b.entity("emp1", "Employee");
        b.add(&m, "position", Value::sym("DEVELOPER"));
        b.add(&m, "name", Value::text("alice"));
        let e = b.entity("emp2", "Employee");
        b.add(&e, "position", Value::sym("QA"));
        b.add(&e, "name", Value::text("bob"));
        let ws = b.build().unwrap();
        let inp = input("assign bob to alice", &ws, &w);
        let roots = generate_candidates(&inp, &WeightVector::new(), &ParserConfig::default()).unwrap();
        let kept = filter_by_application_logic(&roots, &ws, &w);
        assert!(kept
            .iter()
            .all(|(r, _)| r.call.as_ref().unwrap().method.as_ref() != "assignEmployeesToNewManager"));
    }

    struct Refuse;

    impl crate::domain::ApplicationLogic for Refuse {
        fn invoke(&self, _: &State, _: &MethodCall) -> Result<State, crate::domain::DomainException> {
            Err(crate::domain::DomainException::new("no"))
        }

        fn initial_state(&self, _: &crate::domain::GenerationRanges, _: &mut dyn rand::RngCore) -> State {
            State::empty("lighting")
        }
    }

    #[test]
    fn parse_failures() {
        let d = builtin::lighting::domain();
        let empty = State::empty("lighting");
        let inp = input("turn it off", &empty, &d);
        let err = predict(&inp, &WeightVector::new(), &ParserConfig::default()).unwrap_err();
        assert_eq!(err, ParseError::EmptyCandidateSet);

        let refusing = d.with_logic(Arc::new(Refuse));
        let inp = input("turn it off", &lighting_state(), &refusing);
        let err = predict(&inp, &WeightVector::new(), &ParserConfig::default()).unwrap_err();
        assert_eq!(err, ParseError::AllFiltered);
    }
}
