//! One leave-one-domain-out experiment with the access log printed, showing
//! that the target domain is touched only while testing.

use zsparse::domain::DomainRegistry;
use zsparse::evaluation::{run_experiment, Ablation, Dataset, ExperimentSettings, ExperimentSpec};
use zsparse::parser::ParserConfig;
use zsparse::synthetic::{synthetic_corpus, SyntheticConfig};
use zsparse::training::Grid;

fn main() {
    let registry = DomainRegistry::builtin();
    let ids: Vec<String> = ["container", "file", "lighting", "list", "messenger"].map(String::from).to_vec();
    let config = SyntheticConfig {
        per_domain: 40,
        ..SyntheticConfig::default()
    };
    let by_domain = synthetic_corpus(&registry, &ids, &config)
        .into_iter()
        .map(|(d, v)| (d, v.into_iter().map(|s| s.example).collect()))
        .collect();
    let dataset = Dataset::split(by_domain, 20);

    let settings = ExperimentSettings {
        grid: Grid {
            l1_coefficients: vec![0.001],
            step_sizes: vec![0.1],
            iterations_step2: vec![1, 2],
            iterations_step1: vec![1],
            partition_sizes: vec![1, 2],
            orderings: 1,
        },
        parser: ParserConfig {
            beam_size: 40,
            max_rule_applications: 11,
        },
        ..ExperimentSettings::default()
    };
    let spec = ExperimentSpec {
        target_domain: "lighting".into(),
        ablation: Ablation::default(),
        in_domain: false,
        seed: 0,
    };
    let r = run_experiment(&spec, &dataset, &registry, &settings).unwrap();
    println!("selected grid entry {}: {:?}", r.tuning.selected_index, r.tuning.selected);
    println!("trained on {:?}", r.model.training_domains);
    println!(
        "{} on lighting: {:.1}% over {} examples",
        spec.ablation,
        r.accuracy.unwrap_or(f64::NAN),
        r.scores.len()
    );
    println!("target accesses before testing: {}", r.target_accesses_before_testing());
    for a in r.accesses.iter().filter(|a| a.domain == "lighting") {
        println!("  {:?} {:?} x{}", a.phase, a.kind, a.count);
    }
}
