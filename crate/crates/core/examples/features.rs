//! Shows the utterance analysis and the feature vectors of two candidate
//! forms, with and without the description-phrase features.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zsparse::domain::{builtin, generate_initial_state};
use zsparse::features::{FeatureConfig, FeatureContext, Lexicon};
use zsparse::logical_form::parse;

fn main() {
    let domain = builtin::lighting::domain();
    let state = generate_initial_state(&domain, &mut ChaCha8Rng::seed_from_u64(3));
    let lexicon = Lexicon::build(&domain, false);
    let utterance = "switch off the lights on floor 1";

    for use_new_features in [true, false] {
        let config = FeatureConfig {
            use_new_features,
            ..FeatureConfig::default()
        };
        let ctx = FeatureContext::new(utterance, &state, &domain, &lexicon, config);
        if use_new_features {
            println!("tokens: {:?}", ctx.tokens);
            for a in &ctx.anchors {
                println!("anchor: {a:?}");
            }
        }
        println!("\nnew features {}:", if use_new_features { "on" } else { "off" });
        for text in ["turnLightOff(R[floor].1)", "turnLightOn(R[type].Room)"] {
            let lf = parse(text).unwrap();
            let phi = ctx.extract(&lf, lf.size());
            println!("  {text}: {} active features", phi.len());
            for (name, value) in phi.iter().filter(|(n, _)| n.starts_with("cooc") || n.starts_with("missing")) {
                println!("    {name} = {value}");
            }
        }
    }
}
