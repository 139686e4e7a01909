//! Ranks candidate calls for one utterance under a few hand-set weights.

use std::sync::Arc;

use zsparse::domain::builtin;
use zsparse::features::{FeatureConfig, Lexicon};
use zsparse::knowledge::{State, Value};
use zsparse::parser::{candidates, ParseInput, ParserConfig};
use zsparse::training::WeightVector;

fn main() {
    let mut b = State::builder("lighting");
    for (id, name, floor) in [("room1", "bedroom", 2), ("room2", "bedroom", 1), ("room3", "kitchen", 2)] {
        let room = b.entity(id, "Room");
        b.add(&room, "name", Value::text(name));
        b.add(&room, "floor", Value::Int(floor));
        b.add(&room, "lightMode", Value::sym("ON"));
    }
    let state = b.build().unwrap();

    let domain = Arc::new(builtin::lighting::domain());
    let lexicon = Lexicon::build(&domain, false);
    let utterance = "turn off the light in the bedroom on floor 2";
    let input = ParseInput::new(utterance, &state, domain, &lexicon, FeatureConfig::default());

    let mut w = WeightVector::new();
    w.set("cooc|turn off|turnLightOff", 1.0);
    w.set("cooc|floor|floor", 0.5);
    w.set("cooc-any|value|anchor", 0.5);
    w.set("missing-any|value|anchor", -1.0);
    w.set("unmatched|relation", -0.5);
    w.set("size>9", -0.25);

    let config = ParserConfig {
        beam_size: 100,
        max_rule_applications: 12,
    };
    let mut cands = candidates(&input, &w, &config).expect("some call survives the filter");
    cands.sort_by(|a, b| b.score.total_cmp(&a.score));
    println!("{utterance:?}: {} candidates", cands.len());
    for (i, c) in cands.iter().take(5).enumerate() {
        println!("{:>2}. {:>7.3}  {}", i + 1, c.score, c.derivation);
    }
    let top = &cands[0];
    let room1 = state.entity("room1").unwrap();
    let after = top.result.as_ref().unwrap().object(room1, "lightMode").unwrap();
    println!("room1 light after the top call: {after}");
}
