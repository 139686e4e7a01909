//! Template-generated utterances for every built-in domain.

use zsparse::domain::DomainRegistry;
use zsparse::synthetic::{synthetic_corpus, SyntheticConfig};

fn main() {
    let registry = DomainRegistry::builtin();
    let ids: Vec<String> = registry.ids().map(String::from).collect();
    let config = SyntheticConfig {
        per_domain: 3,
        seed: 1,
        ..SyntheticConfig::default()
    };
    for (domain, examples) in synthetic_corpus(&registry, &ids, &config) {
        println!("{domain}");
        for e in examples {
            println!("  {:<50} {}", e.example.utterance, e.gold);
        }
    }
}
