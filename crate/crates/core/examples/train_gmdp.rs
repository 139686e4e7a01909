//! Trains with plain AdaGrad and with domain partitioning on four domains,
//! then measures accuracy on a fifth that neither has seen.

use std::collections::BTreeMap;

use zsparse::domain::DomainRegistry;
use zsparse::synthetic::{synthesize_domain, SyntheticConfig};
use zsparse::training::*;

fn main() {
    let registry = DomainRegistry::builtin();
    let pipeline = Pipeline {
        parser: zsparse::parser::ParserConfig {
            beam_size: 40,
            max_rule_applications: 11,
        },
        ..Pipeline::default()
    };
    let config = SyntheticConfig {
        per_domain: 40,
        ..SyntheticConfig::default()
    };
    let prepared: BTreeMap<String, Vec<TrainingExample>> = ["calendar", "container", "file", "list", "workforce"]
        .into_iter()
        .map(|id| {
            let d = registry.get(id).unwrap().clone();
            let exs: Vec<_> = synthesize_domain(&d, config.per_domain, &config)
                .into_iter()
                .map(|s| s.example)
                .collect();
            (id.to_string(), prepare_examples(&exs, d, pipeline.features))
        })
        .collect();
    let target = "workforce";
    let sources: ExamplesByDomain = prepared
        .iter()
        .filter(|(d, _)| d.as_str() != target)
        .map(|(d, v)| (d.clone(), v.iter().collect()))
        .collect();
    let held_out: Vec<&TrainingExample> = prepared[target].iter().collect();

    let train = TrainConfig {
        iterations_step1: 2,
        iterations_step2: 2,
        partition_size: 2,
        ..TrainConfig::default()
    };
    let plain = adagrad(&flatten(&sources), WeightVector::new(), &train, &pipeline).unwrap();
    let domains: Vec<String> = sources.keys().cloned().collect();
    let partition = train.partition(&domains).unwrap();
    println!("D1 = {:?}, D2 = {:?}", partition.d1, partition.d2);
    let partitioned = gmdp(&partition, &sources, &train, &pipeline).unwrap();

    for (name, w) in [("AdaGrad", &plain), ("GMDP", &partitioned)] {
        let acc = accuracy(w, &held_out, &pipeline).unwrap_or(0.0);
        println!("{name:<8} {:>5} weights, {target} accuracy {:.1}%", w.len(), acc * 100.0);
    }
}
