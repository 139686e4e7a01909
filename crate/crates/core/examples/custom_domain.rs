//! Defines a new application from scratch and parses an instruction for it
//! without any training data, using only its description phrases.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zsparse::domain::{
    generate_initial_state, ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall,
    ObjectKind, ParameterSpec, RelationSpec,
};
use zsparse::features::{FeatureConfig, Lexicon};
use zsparse::knowledge::{State, Value};
use zsparse::parser::{predict, ParseInput, ParserConfig};
use zsparse::training::WeightVector;

const ZONES: [&str; 6] = ["lobby", "nursery", "cellar", "den", "porch", "library"];

struct Thermostat;

impl ApplicationLogic for Thermostat {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        let delta = match &*call.method {
            "warmUp" => 1,
            "coolDown" => -1,
            m => return Err(DomainException::new(format!("unknown method {m}"))),
        };
        let mut b = state.to_builder();
        for zone in call.arguments[0].iter().filter_map(Value::as_entity) {
            let t = state.int_object(zone, "temperature").unwrap_or(20) + delta;
            if !(10..=30).contains(&t) {
                return Err(DomainException::new(format!("{} would leave the safe range", zone.id)));
            }
            b.set(zone, "temperature", Value::Int(t));
        }
        Ok(b.build_unchecked())
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        let mut b = State::builder("thermostat");
        let n = ranges.sample_usize("zones", rng);
        for (i, name) in ZONES.choose_multiple(rng, n).enumerate() {
            let zone = b.entity(&format!("zone{}", i + 1), "Zone");
            b.add(&zone, "name", Value::text(*name));
            b.add(&zone, "temperature", Value::Int(ranges.sample("temperature", rng)));
        }
        b.build_unchecked()
    }
}

fn thermostat() -> Domain {
    let zones = || vec![ParameterSpec::EntityCollection("Zone".into())];
    Domain::new(
        "thermostat",
        &["Zone"],
        vec![
            RelationSpec::new("name", &["Zone"], ObjectKind::Text),
            RelationSpec::new("temperature", &["Zone"], ObjectKind::Int),
        ],
        vec![
            InterfaceMethod::new("warmUp", zones(), &["warm up", "heat"]),
            InterfaceMethod::new("coolDown", zones(), &["cool down", "chill"]),
        ],
        GenerationRanges::new(&[("zones", 2, 5), ("temperature", 15, 25)]),
        Arc::new(Thermostat),
    )
    .expect("valid domain")
}

fn main() {
    let domain = Arc::new(thermostat());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let initial = generate_initial_state(&domain, &mut rng);
    let zone = initial.entity("zone1").unwrap().clone();
    let name = initial.object(&zone, "name").unwrap();
    let gold = MethodCall::new("coolDown", vec![BTreeSet::from([Value::Entity(zone.clone())])]);
    let desired = domain.invoke(&initial, &gold).unwrap();
    let utterance = format!("cool down the {name}");

    let lexicon = Lexicon::build(&domain, false);
    let input = ParseInput::new(&utterance, &initial, domain.clone(), &lexicon, FeatureConfig::default());
    let mut w = WeightVector::new();
    w.set("cooc|cool down|coolDown", 1.0);
    w.set("cooc-any|value|anchor", 1.0);
    w.set("missing-any|value|anchor", -1.0);
    let config = ParserConfig {
        beam_size: 50,
        max_rule_applications: 10,
    };
    let p = predict(&input, &w, &config).expect("a call survives");
    println!("{utterance:?}:");
    println!("  {} tied best, first: {}", p.best.len(), p.best[0].derivation);
    println!("credit: {}", p.credit(&desired));
}
