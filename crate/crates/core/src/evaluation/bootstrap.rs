use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EvaluationError, ExampleScore};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Observed mean credit of A minus that of B.
    pub difference: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// One-sided paired bootstrap in the direction of the observed difference:
/// p is the fraction of resamples in which the better system's advantage
/// disappears.
pub fn paired_bootstrap(
    a: &[ExampleScore],
    b: &[ExampleScore],
    iterations: usize,
    alpha: f64,
    seed: u64,
) -> Result<BootstrapResult, EvaluationError> {
    if a.len() != b.len() {
        return Err(EvaluationError::Misaligned(format!("{} vs {} scores", a.len(), b.len())));
    }
    let index: HashMap<&str, f64> = b.iter().map(|s| (s.example_id.as_str(), s.credit)).collect();
    if index.len() != b.len() {
        return Err(EvaluationError::Misaligned("duplicate example ids".into()));
    }
    let diffs: Vec<f64> = a
        .iter()
        .map(|s| {
            index
                .get(s.example_id.as_str())
                .map(|cb| s.credit - cb)
                .ok_or_else(|| EvaluationError::Misaligned(format!("`{}` missing from B", s.example_id)))
        })
        .collect::<Result<_, _>>()?;
    if diffs.is_empty() {
        return Err(EvaluationError::Misaligned("no scores".into()));
    }
    let n = diffs.len();
    let observed = diffs.iter().sum::<f64>() / n as f64;
    let sign = if observed >= 0.0 { 1.0 } else { -1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lost = 0usize;
    for _ in 0..iterations {
        let total: f64 = (0..n).map(|_| diffs[rng.gen_range(0..n)]).sum();
        if sign * total <= 0.0 {
            lost += 1;
        }
    }
    let p_value = if iterations == 0 { 1.0 } else { lost as f64 / iterations as f64 };
    Ok(BootstrapResult {
        difference: observed,
        p_value,
        significant: p_value < alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(credits: &[f64]) -> Vec<ExampleScore> {
        credits
            .iter()
            .enumerate()
            .map(|(i, c)| ExampleScore {
                example_id: format!("x{i}"),
                credit: *c,
                tie_count: 1,
                correct_in_tie: *c as usize,
                parse_failed: false,
            })
            .collect()
    }

    #[test]
    fn identical_lists_are_not_significant() {
        let a = scores(&[1.0, 0.0, 0.5, 1.0]);
        let r = paired_bootstrap(&a, &a, 10_000, 0.05, 1).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn uniform_gap_is_significant() {
        let r = paired_bootstrap(&scores(&[1.0; 100]), &scores(&[0.0; 100]), 10_000, 0.05, 1).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.significant);
        let r = paired_bootstrap(&scores(&[0.0; 100]), &scores(&[1.0; 100]), 10_000, 0.05, 1).unwrap();
        assert!(r.significant && r.difference < 0.0);
    }

    #[test]
    fn seeded_and_aligned() {
        let a = scores(&[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let b = scores(&[0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            paired_bootstrap(&a, &b, 1000, 0.05, 7).unwrap(),
            paired_bootstrap(&a, &b, 1000, 0.05, 7).unwrap()
        );
        let mut c = b.clone();
        c[0].example_id = "other".into();
        assert!(paired_bootstrap(&a, &c, 10, 0.05, 7).is_err());
        assert!(paired_bootstrap(&a, &b[1..], 10, 0.05, 7).is_err());
    }
}
