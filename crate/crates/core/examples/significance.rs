//! Compares the full model with the no-features, no-filter ablation on one
//! target domain by paired bootstrap.

use zsparse::domain::DomainRegistry;
use zsparse::evaluation::{paired_bootstrap, run_experiment, Ablation, Dataset, ExperimentSettings, ExperimentSpec};
use zsparse::parser::ParserConfig;
use zsparse::synthetic::{synthetic_corpus, SyntheticConfig};
use zsparse::training::Grid;

fn main() {
    let registry = DomainRegistry::builtin();
    let ids: Vec<String> = ["calendar", "container", "lighting", "list"].map(String::from).to_vec();
    let config = SyntheticConfig {
        per_domain: 60,
        ..SyntheticConfig::default()
    };
    let by_domain = synthetic_corpus(&registry, &ids, &config)
        .into_iter()
        .map(|(d, v)| (d, v.into_iter().map(|s| s.example).collect()))
        .collect();
    let dataset = Dataset::split(by_domain, 30);
    let settings = ExperimentSettings {
        grid: Grid {
            l1_coefficients: vec![0.001],
            step_sizes: vec![0.1],
            iterations_step2: vec![2],
            iterations_step1: vec![1],
            partition_sizes: vec![1],
            orderings: 1,
        },
        parser: ParserConfig {
            beam_size: 40,
            max_rule_applications: 11,
        },
        ..ExperimentSettings::default()
    };

    let run = |ablation| {
        let spec = ExperimentSpec {
            target_domain: "container".into(),
            ablation,
            in_domain: false,
            seed: 0,
        };
        run_experiment(&spec, &dataset, &registry, &settings).unwrap()
    };
    let full = run(Ablation {
        use_gmdp: false,
        ..Ablation::default()
    });
    let bare = run(Ablation {
        use_gmdp: false,
        use_new_features: false,
        use_logic_filter: false,
    });
    let b = paired_bootstrap(&full.scores, &bare.scores, 10_000, 0.05, 1).unwrap();
    println!(
        "{} {:.1}% vs {} {:.1}%",
        full.spec.ablation,
        full.accuracy.unwrap_or(0.0),
        bare.spec.ablation,
        bare.accuracy.unwrap_or(0.0)
    );
    println!(
        "difference {:+.3}, p = {:.4}, {}",
        b.difference,
        b.p_value,
        if b.significant { "significant" } else { "not significant" }
    );
}
