//! Filtering with the application logic and choosing the best candidate.

use std::collections::HashMap;
use std::sync::Arc;

use super::{generate_candidates, Derivation, ParseError, ParseInput, ParserConfig};
use crate::domain::{Domain, MethodCall};
use crate::features::{FeatureContext, FeatureVector};
use crate::knowledge::State;
use crate::logical_form::execute_to_call;
use crate::training::{score, WeightVector};

/// A root derivation that survived filtering.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub derivation: Arc<Derivation>,
    /// θᵀφ, accumulated as base + per-predicate deltas + size term.
    pub score: f64,
    /// The state after invoking the candidate's call; `None` if it raised.
    pub result: Option<State>,
}

impl Candidate {
    /// φ(x, s, z) for this candidate.
    pub fn features(&self, ctx: &FeatureContext) -> FeatureVector {
        ctx.combine(&self.derivation.preds, self.derivation.size)
    }
}

/// Scores derivations of one input through the per-predicate tables.
pub struct Scorer {
    base: f64,
    deltas: Vec<f64>,
    sizes: Vec<f64>,
}

impl Scorer {
    pub fn new(ctx: &FeatureContext, weights: &WeightVector) -> Self {
        Scorer {
            base: score(weights, ctx.base()),
            deltas: (0..ctx.predicate_count())
                .map(|i| score(weights, ctx.delta(i as u16)))
                .collect(),
            sizes: (0..=ctx.config().max_size + 1)
                .map(|n| score(weights, ctx.size_features(n)))
                .collect(),
        }
    }

    pub fn score(&self, d: &Derivation) -> f64 {
        let preds: f64 = d.preds.iter().map(|&p| self.deltas[p as usize]).sum();
        self.base + preds + self.sizes[d.size.min(self.sizes.len() - 1)]
    }
}

/// Invokes every root's call once, memoized by call. `None` marks a call that
/// could not be built or raised an exception.
pub fn execute_candidates(
    roots: &[Arc<Derivation>],
    state: &State,
    domain: &Domain,
) -> Vec<(Arc<Derivation>, Option<State>)> {
    let mut memo: HashMap<MethodCall, Option<State>> = HashMap::new();
    let mut out = Vec::with_capacity(roots.len());
    for d in roots {
        let call = match (&d.call, d.lf()) {
            (Some(c), _) => c.clone(),
            (None, Some(lf)) => match execute_to_call(lf, state, domain) {
                Ok(c) => c,
                Err(e) => {
                    log::trace!("cannot execute {d}: {e}");
                    out.push((d.clone(), None));
                    continue;
                }
            },
            (None, None) => {
                out.push((d.clone(), None));
                continue;
            }
        };
        let outcome = memo
            .entry(call)
            .or_insert_with_key(|call| match domain.invoke(state, call) {
                Ok(next) => Some(next),
                Err(e) => {
                    log::trace!("{call} raised: {e}");
                    None
                }
            });
        out.push((d.clone(), outcome.clone()));
    }
    out
}

/// Keeps the candidates whose call succeeds and changes the state, paired
/// with the resulting state.
pub fn filter_by_application_logic(
    candidates: &[Arc<Derivation>],
    state: &State,
    domain: &Domain,
) -> Vec<(Arc<Derivation>, State)> {
    execute_candidates(candidates, state, domain)
        .into_iter()
        .filter_map(|(d, next)| match next {
            Some(next) if next != *state => Some((d, next)),
            _ => None,
        })
        .collect()
}

/// Generated, filtered and scored candidates.
pub fn candidates(
    input: &ParseInput,
    weights: &WeightVector,
    config: &ParserConfig,
) -> Result<Vec<Candidate>, ParseError> {
    candidates_with(input, weights, config, true)
}

/// Like [`candidates`], optionally keeping the candidates the application
/// logic rejects (their `result` is `None` when the call raised).
pub fn candidates_with(
    input: &ParseInput,
    weights: &WeightVector,
    config: &ParserConfig,
    use_logic_filter: bool,
) -> Result<Vec<Candidate>, ParseError> {
    let roots = generate_candidates(input, weights, config)?;
    let scorer = Scorer::new(&input.features, weights);
    let make = |derivation: Arc<Derivation>, result| Candidate {
        score: scorer.score(&derivation),
        derivation,
        result,
    };
    if !use_logic_filter {
        return Ok(execute_candidates(&roots, &input.state, &input.domain)
            .into_iter()
            .map(|(d, r)| make(d, r))
            .collect());
    }
    let survivors = filter_by_application_logic(&roots, &input.state, &input.domain);
    if survivors.is_empty() {
        return Err(ParseError::AllFiltered);
    }
    Ok(survivors.into_iter().map(|(d, r)| make(d, Some(r))).collect())
}

#[derive(Debug, Clone)]
pub struct Prediction {
    /// Every candidate with the maximal score.
    pub best: Vec<Candidate>,
}

impl Prediction {
    /// Denotation of the first best candidate, if its call succeeded.
    pub fn state(&self) -> Option<&State> {
        self.best[0].result.as_ref()
    }

    /// Fraction of the tied best candidates that reach `desired`.
    pub fn credit(&self, desired: &State) -> f64 {
        self.correct_in_tie(desired) as f64 / self.best.len() as f64
    }

    pub fn correct_in_tie(&self, desired: &State) -> usize {
        self.best
            .iter()
            .filter(|c| c.result.as_ref() == Some(desired))
            .count()
    }
}

pub fn best_of(cands: &[Candidate]) -> Vec<Candidate> {
    let top = cands.iter().map(|c| c.score).fold(f64::NEG_INFINITY, f64::max);
    cands.iter().filter(|c| c.score == top).cloned().collect()
}

pub fn predict(
    input: &ParseInput,
    weights: &WeightVector,
    config: &ParserConfig,
) -> Result<Prediction, ParseError> {
    predict_with(input, weights, config, true)
}

pub fn predict_with(
    input: &ParseInput,
    weights: &WeightVector,
    config: &ParserConfig,
    use_logic_filter: bool,
) -> Result<Prediction, ParseError> {
    let cands = candidates_with(input, weights, config, use_logic_filter)?;
    Ok(Prediction { best: best_of(&cands) })
}
