//! Parses printed logical forms and executes them against a lighting state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zsparse::domain::{builtin, generate_initial_state};
use zsparse::logical_form::{execute, parse, Denotation};

fn main() {
    let domain = builtin::lighting::domain();
    let state = generate_initial_state(&domain, &mut ChaCha8Rng::seed_from_u64(1));
    for t in state.triples().iter().filter(|t| !t.relation.is_type()) {
        println!("  {} {} {}", t.subject.id, t.relation.name(), t.object);
    }
    println!();
    for text in [
        "R[floor].2",
        "argmax(R[type].Room, R[floor])",
        "and(R[floor].2, R[lightMode].ON)",
        "turnLightOff(R[floor].2)",
        "turnLightOn(R[floor].9)",
    ] {
        let lf = parse(text).expect("valid syntax");
        match execute(&lf, &state, Some(&domain)) {
            Ok(Denotation::Set(values)) => {
                let ids: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                println!("{lf}  ->  {{{}}}", ids.join(", "));
            }
            Ok(Denotation::State(next)) => {
                let changed = next.triples().symmetric_difference(state.triples()).count() / 2;
                println!("{lf}  ->  new state, {changed} triples changed");
            }
            Err(e) => println!("{lf}  ->  error: {e}"),
        }
    }
}
