//! Log-linear model, objective, AdaGrad and domain-partitioned training.

mod adagrad;
mod config;
mod model;
mod objective;
mod tune;
mod weights;

pub use adagrad::{
    accuracy, adagrad, adagrad_observed, credit, flatten, gmdp, gmdp_observed, prepare_examples, run_passes,
    AdaGrad, EpochReport, ExamplesByDomain, Pipeline, TrainingExample,
};
pub use config::{final_partition, Algorithm, DomainPartition, Grid, TrainConfig};
pub use model::{Model, MODEL_FORMAT_VERSION};
pub use objective::{candidate_distribution, candidate_log_likelihood, example_log_likelihood, softmax, Likelihood};
pub use tune::{
    evaluate_grid, leave_one_out_folds, select_best, train_on, tune_hyperparameters, tune_with_folds, Fold,
    TuningReport,
};
pub use weights::{score, WeightVector};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error("no candidates to normalize over")]
    NoCandidates,
    #[error("invalid domain partition: {0}")]
    InvalidPartition(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("no examples for domain `{0}`")]
    MissingDomain(String),
}
