//! Fractional-credit accuracy, the zero-shot and in-domain experiment
//! runners, the ablation table and paired bootstrap significance.

mod access;
mod bootstrap;
mod table;

pub use access::{AccessCount, AccessKind, AccessLog, Monitored, Phase};
pub use bootstrap::{paired_bootstrap, BootstrapResult};
pub use table::{run_ablation_table, AblationRow, AblationTable};

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DomainRegistry, Example};
use crate::features::FeatureConfig;
use crate::parser::{predict_with, ParserConfig};
use crate::training::{
    adagrad, final_partition, gmdp, prepare_examples, tune_hyperparameters, tune_with_folds, Algorithm,
    ExamplesByDomain, Fold, Grid, Model, Pipeline, TrainConfig, TrainingError, TrainingExample, TuningReport, WeightVector,
    MODEL_FORMAT_VERSION,
};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("no training data for domain `{0}`")]
    MissingData(String),
    #[error("score lists are not aligned: {0}")]
    Misaligned(String),
    #[error("unsupported experiment: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Training(#[from] TrainingError),
}

/// Train and test examples per domain id.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub train: BTreeMap<String, Vec<Example>>,
    pub test: BTreeMap<String, Vec<Example>>,
}

impl Dataset {
    /// Every domain with training or test data.
    pub fn domains(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.train.keys().chain(self.test.keys()).cloned().collect();
        ids.sort();
        ids.dedup();
        ids
    }

    /// The first `train_per_domain` examples of each domain train, the rest
    /// test.
    pub fn split(examples: BTreeMap<String, Vec<Example>>, train_per_domain: usize) -> Dataset {
        let mut ds = Dataset::default();
        for (d, mut exs) in examples {
            let test = exs.split_off(train_per_domain.min(exs.len()));
            ds.train.insert(d.clone(), exs);
            ds.test.insert(d, test);
        }
        ds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    pub example_id: String,
    pub credit: f64,
    pub tie_count: usize,
    pub correct_in_tie: usize,
    pub parse_failed: bool,
}

/// Credit = fraction of the tied best candidates that reach the desired
/// state; 0 when parsing fails.
pub fn score_example(weights: &WeightVector, ex: &TrainingExample, pipeline: &Pipeline) -> ExampleScore {
    match predict_with(&ex.input, weights, &pipeline.parser, pipeline.use_logic_filter) {
        Ok(p) => {
            let correct = p.correct_in_tie(&ex.desired);
            ExampleScore {
                example_id: ex.id.clone(),
                credit: correct as f64 / p.best.len() as f64,
                tie_count: p.best.len(),
                correct_in_tie: correct,
                parse_failed: false,
            }
        }
        Err(_) => ExampleScore {
            example_id: ex.id.clone(),
            credit: 0.0,
            tie_count: 0,
            correct_in_tie: 0,
            parse_failed: true,
        },
    }
}

/// Mean credit × 100, or `None` without examples.
pub fn aggregate_accuracy(scores: &[ExampleScore]) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    Some(100.0 * scores.iter().map(|s| s.credit).sum::<f64>() / scores.len() as f64)
}

/// Which zero-shot components are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ablation {
    pub use_gmdp: bool,
    pub use_new_features: bool,
    pub use_logic_filter: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Ablation {
            use_gmdp: true,
            use_new_features: true,
            use_logic_filter: true,
        }
    }
}

impl Ablation {
    /// The eight settings, full model first.
    pub fn all() -> Vec<Ablation> {
        let mut out = Vec::new();
        for use_gmdp in [true, false] {
            for (use_new_features, use_logic_filter) in [(true, true), (false, true), (true, false), (false, false)] {
                out.push(Ablation {
                    use_gmdp,
                    use_new_features,
                    use_logic_filter,
                });
            }
        }
        out
    }

    pub fn algorithm(&self) -> Algorithm {
        if self.use_gmdp {
            Algorithm::Gmdp
        } else {
            Algorithm::Adagrad
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.use_gmdp { "GMDP" } else { "AdaGrad" })?;
        match (self.use_new_features, self.use_logic_filter) {
            (true, true) => Ok(()),
            (false, true) => f.write_str("-F"),
            (true, false) => f.write_str("-A"),
            (false, false) => f.write_str("-FA"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub target_domain: String,
    pub ablation: Ablation,
    pub in_domain: bool,
    pub seed: u64,
}

/// Settings shared by every experiment of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSettings {
    pub grid: Grid,
    pub parser: ParserConfig,
    /// `use_new_features` is overridden by the ablation.
    pub features: FeatureConfig,
    /// Cross-validation folds for in-domain tuning.
    pub in_domain_folds: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            grid: Grid::default(),
            parser: ParserConfig::default(),
            features: FeatureConfig::default(),
            in_domain_folds: 3,
        }
    }
}

impl ExperimentSettings {
    pub fn pipeline(&self, ablation: &Ablation) -> Pipeline {
        Pipeline {
            features: FeatureConfig {
                use_new_features: ablation.use_new_features,
                ..self.features
            },
            parser: self.parser,
            use_logic_filter: ablation.use_logic_filter,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub tuning: TuningReport,
    pub model: Model,
    pub scores: Vec<ExampleScore>,
    /// Mean credit × 100; `None` for an empty test split.
    pub accuracy: Option<f64>,
    pub accesses: Vec<AccessCount>,
}

impl ExperimentResult {
    /// Accesses to the target domain before testing. Always 0 for a sound
    /// zero-shot run.
    pub fn target_accesses_before_testing(&self) -> usize {
        self.accesses
            .iter()
            .filter(|a| a.domain == self.spec.target_domain && a.phase != Phase::Testing)
            .map(|a| a.count)
            .sum()
    }
}

fn by_domain(prepared: &BTreeMap<String, Vec<TrainingExample>>) -> ExamplesByDomain<'_> {
    prepared.iter().map(|(d, v)| (d.clone(), v.iter().collect())).collect()
}

/// One experiment split into its tuning, training and testing phases. Every
/// domain and example access goes through an [`AccessLog`].
pub struct Experiment<'a> {
    spec: ExperimentSpec,
    settings: &'a ExperimentSettings,
    monitored: Monitored<'a>,
    log: AccessLog,
    pipeline: Pipeline,
    algorithm: Algorithm,
    sources: Vec<String>,
    prepared: OnceCell<BTreeMap<String, Vec<TrainingExample>>>,
}

impl<'a> Experiment<'a> {
    pub fn new(
        spec: &ExperimentSpec,
        dataset: &'a Dataset,
        registry: &'a DomainRegistry,
        settings: &'a ExperimentSettings,
    ) -> Result<Self, EvaluationError> {
        let pipeline = settings.pipeline(&spec.ablation);
        let algorithm = spec.ablation.algorithm();
        let target = registry
            .get(&spec.target_domain)
            .map(|d| d.id.clone())
            .ok_or_else(|| EvaluationError::UnknownDomain(spec.target_domain.clone()))?;
        let sources: Vec<String> = if spec.in_domain {
            if algorithm == Algorithm::Gmdp {
                return Err(EvaluationError::Unsupported(
                    "GMDP partitions several training domains; use AdaGrad in-domain".into(),
                ));
            }
            vec![target.clone()]
        } else {
            dataset.train.keys().filter(|d| **d != target).cloned().collect()
        };
        if sources.is_empty() {
            return Err(EvaluationError::MissingData("no source domains".into()));
        }
        let log = AccessLog::new();
        Ok(Experiment {
            spec: ExperimentSpec {
                target_domain: target,
                ..spec.clone()
            },
            settings,
            monitored: Monitored::new(registry, dataset, log.clone()),
            log,
            pipeline,
            algorithm,
            sources,
            prepared: OnceCell::new(),
        })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    /// Domains whose training examples this experiment may use.
    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn accesses(&self) -> Vec<AccessCount> {
        self.log.counts()
    }

    fn examples(&self) -> Result<ExamplesByDomain<'_>, EvaluationError> {
        if self.prepared.get().is_none() {
            let mut prepared = BTreeMap::new();
            for d in &self.sources {
                let domain = self.monitored.domain(d)?;
                let exs = self.monitored.train_examples(d)?;
                prepared.insert(d.clone(), prepare_examples(exs, domain, self.pipeline.features));
            }
            let _ = self.prepared.set(prepared);
        }
        Ok(by_domain(self.prepared.get().expect("prepared above")))
    }

    /// Grid search: leave one source domain out for zero-shot runs,
    /// cross-validation on the target for in-domain runs.
    pub fn tune(&self) -> Result<TuningReport, EvaluationError> {
        self.log.set_phase(Phase::Tuning);
        let examples = self.examples()?;
        let grid = self.settings.grid.configs(self.algorithm, &self.sources, self.spec.seed);
        Ok(if self.spec.in_domain {
            let target = &self.spec.target_domain;
            let folds = cross_validation_folds(&examples[target], target, self.settings.in_domain_folds, self.spec.seed);
            tune_with_folds(&folds, &grid, self.algorithm, &self.pipeline)?
        } else {
            tune_hyperparameters(&self.sources, &examples, &grid, self.algorithm, &self.pipeline)?
        })
    }

    /// Trains on every source domain with `config`.
    pub fn train(&self, config: &TrainConfig) -> Result<Model, EvaluationError> {
        self.log.set_phase(Phase::Training);
        let examples = self.examples()?;
        let (weights, partition) = match self.algorithm {
            Algorithm::Adagrad => {
                let all: Vec<&TrainingExample> = examples.values().flatten().copied().collect();
                (adagrad(&all, WeightVector::new(), config, &self.pipeline)?, None)
            }
            Algorithm::Gmdp => {
                let partition = final_partition(config, &self.sources)?;
                (gmdp(&partition, &examples, config, &self.pipeline)?, Some(partition))
            }
        };
        Ok(Model {
            version: MODEL_FORMAT_VERSION,
            algorithm: self.algorithm,
            config: config.clone(),
            partition,
            training_domains: self.sources.clone(),
            pipeline: self.pipeline.clone(),
            weights,
        })
    }

    /// Scores `model` on the target's test split.
    pub fn test(&self, model: &Model) -> Result<Vec<ExampleScore>, EvaluationError> {
        self.log.set_phase(Phase::Testing);
        let target = &self.spec.target_domain;
        if model.training_domains.contains(target) && !self.spec.in_domain {
            log::warn!("model was trained on the target domain `{target}`");
        }
        let domain = self.monitored.domain(target)?;
        let test = prepare_examples(self.monitored.test_examples(target)?, domain, model.pipeline.features);
        Ok(test
            .iter()
            .map(|ex| score_example(&model.weights, ex, &model.pipeline))
            .collect())
    }
}

/// Tunes, trains and tests one setting.
pub fn run_experiment(
    spec: &ExperimentSpec,
    dataset: &Dataset,
    registry: &DomainRegistry,
    settings: &ExperimentSettings,
) -> Result<ExperimentResult, EvaluationError> {
    let exp = Experiment::new(spec, dataset, registry, settings)?;
    let tuning = exp.tune()?;
    let model = exp.train(&tuning.selected)?;
    let scores = exp.test(&model)?;
    let accuracy = aggregate_accuracy(&scores);
    log::info!("{} on {}: {:?}", exp.spec.ablation, exp.spec.target_domain, accuracy);
    Ok(ExperimentResult {
        spec: exp.spec.clone(),
        tuning,
        model,
        scores,
        accuracy,
        accesses: exp.accesses(),
    })
}

/// `k` folds over one domain's examples after a seeded shuffle.
pub fn cross_validation_folds<'a>(examples: &[&'a TrainingExample], domain: &str, k: usize, seed: u64) -> Vec<Fold<'a>> {
    let k = k.max(2);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    (0..k)
        .map(|f| {
            let (held, rest): (Vec<usize>, Vec<usize>) = order.iter().partition(|&&i| i % k == f);
            Fold {
                name: format!("{domain}#{f}"),
                train: [(domain.to_string(), rest.iter().map(|&i| examples[i]).collect())].into(),
                heldout: held.iter().map(|&i| examples[i]).collect(),
            }
        })
        .collect()
}
