//! Candidate distribution and the per-example log-likelihood.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{score, TrainingError, WeightVector};
use crate::features::{FeatureContext, FeatureVector};
use crate::knowledge::State;
use crate::parser::Candidate;

/// Softmax with max subtraction.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>, TrainingError> {
    if scores.is_empty() {
        return Err(TrainingError::NoCandidates);
    }
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// p_θ(z | x, s) for each candidate feature vector.
pub fn candidate_distribution(
    weights: &WeightVector,
    features: &[FeatureVector],
) -> Result<Vec<f64>, TrainingError> {
    let scores: Vec<f64> = features.iter().map(|f| score(weights, f)).collect();
    softmax(&scores)
}

/// log p_θ(y | x, s) and its gradient with respect to θ.
#[derive(Debug, Clone, PartialEq)]
pub struct Likelihood {
    pub log_prob: f64,
    pub gradient: FeatureVector,
}

/// Log of the probability mass on candidates whose denotation is `desired`,
/// with gradient E[φ | correct] − E[φ]. `Ok(None)` when no candidate is
/// correct.
pub fn example_log_likelihood(
    weights: &WeightVector,
    features: &[FeatureVector],
    denotations: &[Option<State>],
    desired: &State,
) -> Result<Option<Likelihood>, TrainingError> {
    assert_eq!(features.len(), denotations.len());
    let probs = candidate_distribution(weights, features)?;
    let correct: Vec<bool> = denotations.iter().map(|d| d.as_ref() == Some(desired)).collect();
    let mass: f64 = probs.iter().zip(&correct).filter(|(_, c)| **c).map(|(p, _)| p).sum();
    if mass == 0.0 {
        return Ok(None);
    }
    let mut grad = FeatureVector::new();
    for ((f, p), c) in features.iter().zip(&probs).zip(&correct) {
        let w = if *c { p / mass } else { 0.0 } - p;
        if w != 0.0 {
            grad = grad.add_scaled(f, w);
        }
    }
    Ok(Some(Likelihood {
        log_prob: mass.ln(),
        gradient: grad,
    }))
}

/// [`example_log_likelihood`] over parser candidates. Expectations are taken
/// over predicate and size marginals, so no per-candidate φ is built.
pub fn candidate_log_likelihood(
    ctx: &FeatureContext,
    candidates: &[Candidate],
    desired: &State,
) -> Result<Option<Likelihood>, TrainingError> {
    let scores: Vec<f64> = candidates.iter().map(|c| c.score).collect();
    let probs = softmax(&scores)?;
    let correct: Vec<bool> = candidates
        .iter()
        .map(|c| c.result.as_ref() == Some(desired))
        .collect();
    let mass: f64 = probs.iter().zip(&correct).filter(|(_, c)| **c).map(|(p, _)| p).sum();
    if mass == 0.0 {
        return Ok(None);
    }
    // weight of each predicate and size in E[φ | correct] − E[φ]
    let mut preds = vec![0.0; ctx.predicate_count()];
    let mut sizes: BTreeMap<usize, f64> = BTreeMap::new();
    for ((c, p), ok) in candidates.iter().zip(&probs).zip(&correct) {
        let w = if *ok { p / mass } else { 0.0 } - p;
        if w == 0.0 {
            continue;
        }
        for &q in c.derivation.predicate_ids() {
            preds[q as usize] += w;
        }
        *sizes.entry(c.derivation.size).or_insert(0.0) += w;
    }
    let mut acc: Vec<(Arc<str>, f64)> = Vec::new();
    for (q, w) in preds.iter().enumerate() {
        if *w != 0.0 {
            acc.extend(ctx.delta(q as u16).iter().map(|(k, v)| (k.clone(), v * w)));
        }
    }
    for (n, w) in sizes {
        acc.extend(ctx.size_features(n).iter().map(|(k, v)| (k.clone(), v * w)));
    }
    Ok(Some(Likelihood {
        log_prob: mass.ln(),
        gradient: FeatureVector::from_pairs(acc),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::State;

    fn fv(pairs: &[(&str, f64)]) -> FeatureVector {
        FeatureVector::from_pairs(pairs.iter().map(|(k, v)| (*k, *v)))
    }

    fn states() -> (State, State) {
        let mut a = State::builder("t");
        a.entity("x", "T");
        let mut b = a.clone();
        b.entity("y", "T");
        (a.build().unwrap(), b.build().unwrap())
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[3.0]).unwrap(), vec![1.0]);
        assert_eq!(softmax(&[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
        let p = softmax(&[2f64.ln(), 0.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12 && (p[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(softmax(&[]), Err(TrainingError::NoCandidates)));
        let p = softmax(&[1000.0, -1000.0, 999.0]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_correct_candidate() {
        let (s0, s1) = states();
        let w: WeightVector = [("a".to_string(), 1.5)].into_iter().collect();
        let ll = example_log_likelihood(&w, &[fv(&[("a", 1.0)])], &[Some(s1.clone())], &s1)
            .unwrap()
            .unwrap();
        assert_eq!(ll.log_prob, 0.0);
        assert!(ll.gradient.is_empty());
        let none = example_log_likelihood(&w, &[fv(&[("a", 1.0)])], &[Some(s0)], &s1).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn identical_features_one_correct() {
        let (s0, s1) = states();
        let f = fv(&[("a", 1.0), ("b", 2.0)]);
        let ll = example_log_likelihood(
            &WeightVector::new(),
            &[f.clone(), f],
            &[Some(s1.clone()), Some(s0)],
            &s1,
        )
        .unwrap()
        .unwrap();
        assert!((ll.log_prob - 0.5f64.ln()).abs() < 1e-12);
        assert!(ll.gradient.iter().all(|(_, v)| v.abs() < 1e-12));
    }
}
