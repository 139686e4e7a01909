//! Grid search with held-out evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adagrad::{accuracy, adagrad_observed, flatten, gmdp_observed, ExamplesByDomain, Pipeline, TrainingExample};
use super::{Algorithm, TrainConfig, TrainingError, WeightVector};

/// One train/held-out split used during tuning.
pub struct Fold<'a> {
    pub name: String,
    pub train: ExamplesByDomain<'a>,
    pub heldout: Vec<&'a TrainingExample>,
}

/// One fold per training domain, holding that domain out.
pub fn leave_one_out_folds<'a>(training_domains: &[String], examples: &ExamplesByDomain<'a>) -> Result<Vec<Fold<'a>>, TrainingError> {
    training_domains
        .iter()
        .map(|held| {
            let heldout = examples
                .get(held)
                .ok_or_else(|| TrainingError::MissingDomain(held.clone()))?
                .clone();
            let mut train = ExamplesByDomain::new();
            for d in training_domains.iter().filter(|d| *d != held) {
                let exs = examples.get(d).ok_or_else(|| TrainingError::MissingDomain(d.clone()))?;
                train.insert(d.clone(), exs.clone());
            }
            Ok(Fold {
                name: held.clone(),
                train,
                heldout,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub selected: TrainConfig,
    pub selected_index: usize,
    /// Mean held-out accuracy per grid entry; `None` when nothing was scored.
    pub mean_accuracy: Vec<Option<f64>>,
}

/// Trains `config` on one fold's training data.
pub fn train_on(
    algorithm: Algorithm,
    train: &ExamplesByDomain,
    config: &TrainConfig,
    pipeline: &Pipeline,
    observer: &mut dyn FnMut(usize, &WeightVector),
) -> Result<WeightVector, TrainingError> {
    match algorithm {
        Algorithm::Adagrad => {
            let exs = flatten(train);
            adagrad_observed(&exs, WeightVector::new(), config, pipeline, &mut |r, w| observer(r.epoch, w))
        }
        Algorithm::Gmdp => {
            let domains: Vec<String> = train.keys().cloned().collect();
            let partition = config.partition(&domains)?;
            gmdp_observed(&partition, train, config, pipeline, &mut |r, w| observer(r.epoch, w))
        }
    }
}

/// (grid index, mean held-out accuracy) for the entries of one group.
type EntryScores = Vec<(usize, Option<f64>)>;

/// Mean held-out accuracy of every grid entry over `folds`.
///
/// Entries that differ only in `iterations_step2` share one training run,
/// evaluated after each of the requested passes.
pub fn evaluate_grid(
    folds: &[Fold],
    grid: &[TrainConfig],
    algorithm: Algorithm,
    pipeline: &Pipeline,
) -> Result<Vec<Option<f64>>, TrainingError> {
    for c in grid {
        c.validate()?;
    }
    let mut groups: Vec<(TrainConfig, Vec<usize>)> = Vec::new();
    for (i, c) in grid.iter().enumerate() {
        let key = TrainConfig {
            iterations_step2: 0,
            ..c.clone()
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    let jobs: Vec<(usize, usize)> = (0..folds.len())
        .flat_map(|f| (0..groups.len()).map(move |g| (f, g)))
        .collect();
    let results: Vec<Result<EntryScores, TrainingError>> = jobs
        .par_iter()
        .map(|&(f, g)| {
            let fold = &folds[f];
            let (key, members) = &groups[g];
            let longest = members.iter().map(|&i| grid[i].iterations_step2).max().unwrap_or(0);
            let config = TrainConfig {
                iterations_step2: longest,
                ..key.clone()
            };
            let mut out = Vec::new();
            train_on(algorithm, &fold.train, &config, pipeline, &mut |epoch, w| {
                let wanted: Vec<usize> = members
                    .iter()
                    .copied()
                    .filter(|&i| grid[i].iterations_step2 == epoch)
                    .collect();
                if !wanted.is_empty() {
                    let acc = accuracy(w, &fold.heldout, pipeline);
                    log::debug!("fold {} config group {g} epoch {epoch}: {acc:?}", fold.name);
                    out.extend(wanted.into_iter().map(|i| (i, acc)));
                }
            })?;
            Ok(out)
        })
        .collect();
    let mut sums = vec![(0.0, 0usize); grid.len()];
    for r in results {
        for (i, acc) in r? {
            if let Some(a) = acc {
                sums[i].0 += a;
                sums[i].1 += 1;
            }
        }
    }
    Ok(sums
        .into_iter()
        .map(|(s, n)| (n > 0).then(|| s / n as f64))
        .collect())
}

/// Index of the highest mean; the earliest wins ties and `None` ranks last.
pub fn select_best(means: &[Option<f64>]) -> usize {
    let mut best = 0;
    for (i, m) in means.iter().enumerate() {
        let better = match (m, means[best]) {
            (Some(a), Some(b)) => *a > b,
            (Some(_), None) => true,
            _ => false,
        };
        if better {
            best = i;
        }
    }
    best
}

/// Grid search over `folds`. A single-entry grid is returned without
/// training.
pub fn tune_with_folds(
    folds: &[Fold],
    grid: &[TrainConfig],
    algorithm: Algorithm,
    pipeline: &Pipeline,
) -> Result<TuningReport, TrainingError> {
    if grid.is_empty() {
        return Err(TrainingError::InvalidConfig("empty grid".into()));
    }
    if grid.len() == 1 {
        return Ok(TuningReport {
            selected: grid[0].clone(),
            selected_index: 0,
            mean_accuracy: vec![None],
        });
    }
    let means = evaluate_grid(folds, grid, algorithm, pipeline)?;
    let i = select_best(&means);
    log::info!("selected grid entry {i} with mean held-out accuracy {:?}", means[i]);
    Ok(TuningReport {
        selected: grid[i].clone(),
        selected_index: i,
        mean_accuracy: means,
    })
}

/// Leave-one-domain-out tuning over the source domains.
pub fn tune_hyperparameters(
    training_domains: &[String],
    examples: &ExamplesByDomain,
    grid: &[TrainConfig],
    algorithm: Algorithm,
    pipeline: &Pipeline,
) -> Result<TuningReport, TrainingError> {
    if algorithm == Algorithm::Gmdp && training_domains.len() < 3 {
        return Err(TrainingError::InvalidPartition(format!(
            "GMDP tuning needs at least 3 training domains, got {}",
            training_domains.len()
        )));
    }
    let folds = leave_one_out_folds(training_domains, examples)?;
    tune_with_folds(&folds, grid, algorithm, pipeline)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_prefers_first_of_ties() {
        assert_eq!(select_best(&[Some(0.5), Some(0.7), Some(0.7)]), 1);
        assert_eq!(select_best(&[None, Some(0.1)]), 1);
        assert_eq!(select_best(&[Some(0.2), Some(0.2)]), 0);
        assert_eq!(select_best(&[None, None]), 0);
    }
}
