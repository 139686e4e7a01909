use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::candidate_log_likelihood;
use super::{DomainPartition, TrainConfig, TrainingError, WeightVector};
use crate::domain::{Domain, Example};
use crate::features::{FeatureConfig, FeatureVector, Lexicon};
use crate::knowledge::State;
use crate::parser::{candidates_with, predict_with, ParseError, ParseInput, ParserConfig};

const EPSILON: f64 = 1e-8;

/// Feature, parser and filter settings shared by training and prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pipeline {
    pub features: FeatureConfig,
    pub parser: ParserConfig,
    pub use_logic_filter: bool,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline {
            features: FeatureConfig::default(),
            parser: ParserConfig::default(),
            use_logic_filter: true,
        }
    }
}

/// An example with its weight-independent parse input precomputed.
pub struct TrainingExample {
    pub id: String,
    pub domain_id: String,
    pub input: ParseInput,
    pub desired: State,
}

impl TrainingExample {
    pub fn prepare(example: &Example, domain: Arc<Domain>, lexicon: &Lexicon, features: FeatureConfig) -> Self {
        TrainingExample {
            id: example.id.clone(),
            domain_id: example.domain_id.clone(),
            input: ParseInput::new(&example.utterance, &example.initial, domain, lexicon, features),
            desired: example.desired.clone(),
        }
    }
}

/// Prepares examples of one domain.
pub fn prepare_examples(examples: &[Example], domain: Arc<Domain>, features: FeatureConfig) -> Vec<TrainingExample> {
    let lexicon = Lexicon::build(&domain, features.stemming);
    examples
        .par_iter()
        .map(|e| TrainingExample::prepare(e, domain.clone(), &lexicon, features))
        .collect()
}

/// Training examples grouped by domain id.
pub type ExamplesByDomain<'a> = BTreeMap<String, Vec<&'a TrainingExample>>;

/// Counts for one pass over the data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub examples: usize,
    pub updates: usize,
    /// No candidate reached the desired state.
    pub no_correct: usize,
    /// Parsing produced no candidates.
    pub parse_failures: usize,
    /// Sum of log p(y|x,s) over updated examples.
    pub log_likelihood: f64,
}

/// Per-coordinate AdaGrad with a proximal L1 step.
#[derive(Debug, Clone, Default)]
pub struct AdaGrad {
    l1: f64,
    eta: f64,
    accumulators: HashMap<Arc<str>, f64>,
}

impl AdaGrad {
    pub fn new(l1: f64, eta: f64) -> Self {
        AdaGrad {
            l1,
            eta,
            accumulators: HashMap::new(),
        }
    }

    pub fn reset(&mut self) {
        self.accumulators.clear();
    }

    /// Ascent step on the log-likelihood gradient, then truncation toward 0.
    pub fn update(&mut self, weights: &mut WeightVector, gradient: &FeatureVector) {
        for (k, g) in gradient.iter() {
            let acc = self.accumulators.entry(k.clone()).or_insert(0.0);
            *acc += g * g;
            let step = self.eta / (*acc + EPSILON).sqrt();
            let w = weights.get(k) + step * g;
            let shrunk = (w.abs() - self.l1 * step).max(0.0);
            weights.set(k.clone(), if shrunk > 0.0 { shrunk.copysign(w) } else { 0.0 });
        }
    }
}

/// Passes of stochastic updates in a per-epoch shuffled order.
/// `observer` sees each epoch's report and the weights after it.
pub fn run_passes(
    examples: &[&TrainingExample],
    weights: &mut WeightVector,
    optimizer: &mut AdaGrad,
    iterations: usize,
    seed: u64,
    pipeline: &Pipeline,
    observer: &mut dyn FnMut(&EpochReport, &WeightVector),
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    for epoch in 1..=iterations {
        order.shuffle(&mut rng);
        let mut report = EpochReport {
            epoch,
            examples: examples.len(),
            ..EpochReport::default()
        };
        for &i in &order {
            let ex = examples[i];
            let cands = match candidates_with(&ex.input, weights, &pipeline.parser, pipeline.use_logic_filter) {
                Ok(c) => c,
                Err(ParseError::EmptyCandidateSet | ParseError::AllFiltered) => {
                    report.parse_failures += 1;
                    continue;
                }
            };
            match candidate_log_likelihood(&ex.input.features, &cands, &ex.desired) {
                Ok(Some(ll)) => {
                    report.updates += 1;
                    report.log_likelihood += ll.log_prob;
                    optimizer.update(weights, &ll.gradient);
                }
                _ => report.no_correct += 1,
            }
        }
        log::info!(
            "epoch {epoch}: {} updates, {} without a correct candidate, {} parse failures, log-likelihood {:.3}",
            report.updates,
            report.no_correct,
            report.parse_failures,
            report.log_likelihood
        );
        observer(&report, weights);
    }
}

/// Plain AdaGrad for `config.iterations_step2` passes starting at `init`.
pub fn adagrad(
    examples: &[&TrainingExample],
    init: WeightVector,
    config: &TrainConfig,
    pipeline: &Pipeline,
) -> Result<WeightVector, TrainingError> {
    adagrad_observed(examples, init, config, pipeline, &mut |_, _| {})
}

/// [`adagrad`]; `observer` sees the initial weights (epoch 0) and the
/// weights after each pass.
pub fn adagrad_observed(
    examples: &[&TrainingExample],
    init: WeightVector,
    config: &TrainConfig,
    pipeline: &Pipeline,
    observer: &mut dyn FnMut(&EpochReport, &WeightVector),
) -> Result<WeightVector, TrainingError> {
    config.validate()?;
    let mut weights = init;
    let mut opt = AdaGrad::new(config.l1_coefficient, config.step_size);
    observer(&EpochReport::default(), &weights);
    run_passes(
        examples,
        &mut weights,
        &mut opt,
        config.iterations_step2,
        config.seed,
        pipeline,
        observer,
    );
    Ok(weights)
}

fn collect<'a>(
    domains: &[String],
    examples: &ExamplesByDomain<'a>,
) -> Result<Vec<&'a TrainingExample>, TrainingError> {
    let mut out = Vec::new();
    for d in domains {
        let exs = examples
            .get(d)
            .ok_or_else(|| TrainingError::MissingDomain(d.clone()))?;
        out.extend(exs.iter().copied());
    }
    Ok(out)
}

/// All examples of the given map, in domain-id order.
pub fn flatten<'a>(examples: &ExamplesByDomain<'a>) -> Vec<&'a TrainingExample> {
    examples.values().flatten().copied().collect()
}

/// Two-step training: AdaGrad on D1 from θ0 = 0, then AdaGrad on D2 from
/// θ_D1. Both steps shuffle with `config.seed`.
pub fn gmdp(
    partition: &DomainPartition,
    examples: &ExamplesByDomain,
    config: &TrainConfig,
    pipeline: &Pipeline,
) -> Result<WeightVector, TrainingError> {
    gmdp_observed(partition, examples, config, pipeline, &mut |_, _| {})
}

/// [`gmdp`]; `observer` sees the weights at the start of step 2 (epoch 0)
/// and after each step-2 pass.
pub fn gmdp_observed(
    partition: &DomainPartition,
    examples: &ExamplesByDomain,
    config: &TrainConfig,
    pipeline: &Pipeline,
    observer: &mut dyn FnMut(&EpochReport, &WeightVector),
) -> Result<WeightVector, TrainingError> {
    config.validate()?;
    let partition = DomainPartition::new(partition.d1.clone(), partition.d2.clone())?;
    let d1 = collect(&partition.d1, examples)?;
    let d2 = collect(&partition.d2, examples)?;
    let mut weights = WeightVector::new();
    let mut opt = AdaGrad::new(config.l1_coefficient, config.step_size);
    log::info!("GMDP step 1 on {:?}", partition.d1);
    run_passes(
        &d1,
        &mut weights,
        &mut opt,
        config.iterations_step1,
        config.seed,
        pipeline,
        &mut |_, _| {},
    );
    if config.reset_accumulators {
        opt.reset();
    }
    observer(&EpochReport::default(), &weights);
    log::info!("GMDP step 2 on {:?}", partition.d2);
    run_passes(
        &d2,
        &mut weights,
        &mut opt,
        config.iterations_step2,
        config.seed,
        pipeline,
        observer,
    );
    Ok(weights)
}

/// Mean fractional credit over `examples`; parse failures score 0.
pub fn accuracy(weights: &WeightVector, examples: &[&TrainingExample], pipeline: &Pipeline) -> Option<f64> {
    if examples.is_empty() {
        return None;
    }
    let total: f64 = examples
        .iter()
        .map(|ex| credit(weights, ex, pipeline))
        .sum();
    Some(total / examples.len() as f64)
}

pub fn credit(weights: &WeightVector, ex: &TrainingExample, pipeline: &Pipeline) -> f64 {
    predict_with(&ex.input, weights, &pipeline.parser, pipeline.use_logic_filter)
        .map(|p| p.credit(&ex.desired))
        .unwrap_or(0.0)
}
