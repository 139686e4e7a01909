use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrainingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gmdp,
    Adagrad,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Gmdp => "gmdp",
            Algorithm::Adagrad => "adagrad",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gmdp" => Ok(Algorithm::Gmdp),
            "adagrad" => Ok(Algorithm::Adagrad),
            _ => Err(format!("unknown algorithm `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// λ
    pub l1_coefficient: f64,
    /// η
    pub step_size: f64,
    /// Passes of plain AdaGrad, or of the second GMDP step.
    pub iterations_step2: usize,
    pub iterations_step1: usize,
    /// |D1| when tuning over the source domains minus one held-out domain.
    pub partition_size: usize,
    /// Order in which domains are assigned to D1 then D2.
    pub domain_ordering: Vec<String>,
    pub seed: u64,
    /// Start the second GMDP step with fresh AdaGrad accumulators.
    pub reset_accumulators: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l1_coefficient: 0.001,
            step_size: 0.1,
            iterations_step2: 3,
            iterations_step1: 2,
            partition_size: 3,
            domain_ordering: Vec::new(),
            seed: 0,
            reset_accumulators: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainingError> {
        let bad = |m: &str| Err(TrainingError::InvalidConfig(m.to_string()));
        if !(self.l1_coefficient >= 0.0 && self.l1_coefficient.is_finite()) {
            return bad("l1_coefficient must be a finite value >= 0");
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step_size must be a finite value > 0");
        }
        Ok(())
    }

    /// The ordering restricted to `domains`; domains missing from the
    /// ordering follow in their given order.
    fn ordered<'a>(&self, domains: &'a [String]) -> Vec<&'a String> {
        let mut out: Vec<&String> = self
            .domain_ordering
            .iter()
            .filter_map(|d| domains.iter().find(|x| *x == d))
            .collect();
        for d in domains {
            if !out.contains(&d) {
                out.push(d);
            }
        }
        out
    }

    /// D1 = the first `partition_size` of `domains` under the ordering.
    pub fn partition(&self, domains: &[String]) -> Result<DomainPartition, TrainingError> {
        let ordered = self.ordered(domains);
        let m = self.partition_size.min(ordered.len());
        DomainPartition::new(
            ordered[..m].iter().map(|d| d.to_string()).collect(),
            ordered[m..].iter().map(|d| d.to_string()).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainPartition {
    pub d1: Vec<String>,
    pub d2: Vec<String>,
}

impl DomainPartition {
    pub fn new(d1: Vec<String>, d2: Vec<String>) -> Result<Self, TrainingError> {
        if d1.is_empty() || d2.is_empty() {
            return Err(TrainingError::InvalidPartition(
                "both D1 and D2 must be non-empty".into(),
            ));
        }
        let mut all: Vec<&String> = d1.iter().chain(&d2).collect();
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(TrainingError::InvalidPartition("D1 and D2 overlap".into()));
        }
        Ok(DomainPartition { d1, d2 })
    }

    pub fn domains(&self) -> impl Iterator<Item = &String> {
        self.d1.iter().chain(&self.d2)
    }
}

/// Partition for the final model. The configuration was tuned with one
/// domain held out; the larger of D1 and D2 grows by one (D1 on a tie).
pub fn final_partition(
    tuned: &TrainConfig,
    training_domains: &[String],
) -> Result<DomainPartition, TrainingError> {
    let n = training_domains.len();
    if n < 2 {
        return Err(TrainingError::InvalidPartition(format!(
            "GMDP needs at least 2 domains, got {n}"
        )));
    }
    let a = tuned.partition_size.min(n - 1);
    let b = (n - 1).saturating_sub(a);
    let m = if a >= b { a + 1 } else { a };
    TrainConfig {
        partition_size: m.min(n - 1),
        ..tuned.clone()
    }
    .partition(training_domains)
}

/// Hyper-parameter values searched during tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub l1_coefficients: Vec<f64>,
    pub step_sizes: Vec<f64>,
    pub iterations_step2: Vec<usize>,
    pub iterations_step1: Vec<usize>,
    pub partition_sizes: Vec<usize>,
    /// Number of random domain orderings.
    pub orderings: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            l1_coefficients: vec![0.001, 0.01],
            step_sizes: vec![0.01, 0.1],
            iterations_step2: vec![1, 2, 3],
            iterations_step1: vec![2, 4],
            partition_sizes: vec![3, 4],
            orderings: 3,
        }
    }
}

impl Grid {
    /// Every configuration, in a fixed order. GMDP-only axes are collapsed
    /// for AdaGrad. Orderings are shuffles of the sorted domains drawn from
    /// `seed`.
    pub fn configs(&self, algorithm: Algorithm, domains: &[String], seed: u64) -> Vec<TrainConfig> {
        let mut sorted = domains.to_vec();
        sorted.sort();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let orderings: Vec<Vec<String>> = (0..self.orderings)
            .map(|_| {
                let mut o = sorted.clone();
                o.shuffle(&mut rng);
                o
            })
            .collect();
        let base = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        let mut out = Vec::new();
        for &l1 in &self.l1_coefficients {
            for &eta in &self.step_sizes {
                for &it2 in &self.iterations_step2 {
                    let c = TrainConfig {
                        l1_coefficient: l1,
                        step_size: eta,
                        iterations_step2: it2,
                        ..base.clone()
                    };
                    if algorithm == Algorithm::Adagrad {
                        out.push(TrainConfig {
                            iterations_step1: 0,
                            partition_size: 0,
                            ..c
                        });
                        continue;
                    }
                    for &m in &self.partition_sizes {
                        for o in &orderings {
                            for &it1 in &self.iterations_step1 {
                                out.push(TrainConfig {
                                    iterations_step1: it1,
                                    partition_size: m,
                                    domain_ordering: o.clone(),
                                    ..c.clone()
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
