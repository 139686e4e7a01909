use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use zsparse::cli::dataset::{
    gold_path, read_examples, read_records, to_dataset, write_examples, GoldRecord, Split, TaggedValue,
};
use zsparse::cli::{run, Cli, EvalReport};
use zsparse::domain::{DomainRegistry, MethodCall};
use zsparse::knowledge::{states_equal, Value};
use zsparse::synthetic::{synthetic_corpus, SyntheticConfig};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run_ok(args: &[&str]) -> String {
    let mut out = Vec::new();
    let cli = Cli::try_parse_from(std::iter::once("zsparse").chain(args.iter().copied())).unwrap();
    run(cli, &mut out).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    String::from_utf8(out).unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_zsparse"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_one_record_per_method_and_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    run_ok(&["generate", "--domain", "lighting", "--count", "10", "--seed", "4", "--out", s(&a)]);
    run_ok(&["generate", "--domain", "Lighting", "--count", "10", "--seed", "4", "--out", s(&b)]);
    let records = read_records(&a).unwrap();
    assert_eq!(records.len(), 20);
    assert!(records.iter().all(|r| r.utterance.is_empty()));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // the sidecar holds calls that reproduce each desired state
    let reg = DomainRegistry::builtin();
    let d = reg.get("lighting").unwrap();
    let examples = read_examples(&a, &reg).unwrap();
    let gold_text = std::fs::read_to_string(gold_path(&a)).unwrap();
    let gold: Vec<GoldRecord> = gold_text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(gold.len(), 20);
    for ((ex, _), g) in examples.iter().zip(&gold) {
        assert_eq!(ex.id, g.id);
        let args = g
            .arguments
            .iter()
            .map(|a| {
                a.iter()
                    .map(|v| match v {
                        TaggedValue::Ent(id) => Value::Entity(ex.initial.entity(id).unwrap().clone()),
                        TaggedValue::Int(i) => Value::Int(*i),
                        TaggedValue::Sym(x) => Value::sym(x.as_str()),
                        TaggedValue::Str(x) => Value::text(x.as_str()),
                    })
                    .collect()
            })
            .collect();
        let next = d.invoke(&ex.initial, &MethodCall::new(&g.method, args)).unwrap();
        assert!(states_equal(&next, &ex.desired).unwrap());
    }
    // gold files are not datasets
    assert!(read_records(&gold_path(&a)).is_err());
}

#[test]
fn generate_zero_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.jsonl");
    run_ok(&["generate", "--domain", "list", "--count", "0", "--out", s(&p)]);
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains("zsparse-dataset"));
    assert!(read_records(&p).unwrap().is_empty());
}

#[test]
fn dataset_round_trip_preserves_examples() {
    let reg = DomainRegistry::builtin();
    let ids: Vec<String> = reg.ids().map(String::from).collect();
    let corpus = synthetic_corpus(&reg, &ids, &SyntheticConfig { per_domain: 6, ..Default::default() });
    let examples: Vec<_> = corpus
        .into_values()
        .flatten()
        .enumerate()
        .map(|(i, e)| (e.example, Some(if i % 3 == 0 { Split::Test } else { Split::Train })))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.jsonl");
    write_examples(&p, &examples).unwrap();
    let back = read_examples(&p, &reg).unwrap();
    assert_eq!(back.len(), examples.len());
    for ((a, sa), (b, sb)) in examples.iter().zip(&back) {
        assert_eq!((a.id.as_str(), a.domain_id.as_str(), a.utterance.as_str()), (b.id.as_str(), b.domain_id.as_str(), b.utterance.as_str()));
        assert!(states_equal(&a.initial, &b.initial).unwrap());
        assert!(states_equal(&a.desired, &b.desired).unwrap());
        assert_eq!(sa, sb);
    }
    let ds = to_dataset(back, 0).unwrap();
    assert_eq!(ds.domains().len(), 7);
    assert_eq!(ds.test.values().map(Vec::len).sum::<usize>(), examples.len().div_ceil(3));
}

#[test]
fn malformed_records_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.jsonl");
    let good = r#"{"id":"x","domain":"lighting","utterance":"u","initial":{"entities":[{"id":"r","type":"Room"}],"triples":[["r","floor",{"int":1}]]},"desired":{"entities":[]}}"#;
    let bad = r#"{"id":"y","domain":"lighting","utterance":"u","initial":{"entities":[],"triples":[["r","floor",{"int":1}]]},"desired":{"entities":[]}}"#;
    std::fs::write(&p, format!("{{\"format\":\"zsparse-dataset\",\"version\":1}}\n{good}\n{bad}\n")).unwrap();
    let err = read_examples(&p, &DomainRegistry::builtin()).unwrap_err();
    assert_eq!(err.line, 3);
    assert!(err.message.contains("unknown entity"), "{err}");
    let wrong = good.replace(r#"{"int":1}"#, r#"{"str":"one"}"#);
    std::fs::write(&p, format!("{{\"format\":\"zsparse-dataset\",\"version\":1}}\n{wrong}\n")).unwrap();
    assert!(read_examples(&p, &DomainRegistry::builtin()).is_err());
}

#[test]
fn parse_ranks_the_intended_call_first_under_hand_weights() {
    let out = run_ok(&[
        "parse",
        "--domain",
        "lighting",
        "--state",
        s(&fixture("lighting_state.json")),
        "--weights",
        s(&fixture("hand_weights.json")),
        "--explain",
        "turn off the light in the bedroom on floor 2",
    ]);
    let first = out.lines().find(|l| l.trim_start().starts_with("1.")).unwrap();
    assert!(first.ends_with("turnLightOff(and(R[floor].2, R[name].bedroom))"), "{out}");
    assert!(out.contains("cooc|turn off|turnLightOff"), "{out}");
}

fn write_dataset(dir: &Path) -> PathBuf {
    let reg = DomainRegistry::builtin();
    let ids: Vec<String> = ["container", "lighting", "list", "messenger"].map(String::from).to_vec();
    let corpus = synthetic_corpus(&reg, &ids, &SyntheticConfig { per_domain: 16, ..Default::default() });
    let examples: Vec<_> = corpus
        .into_values()
        .flat_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, e)| (e.example, Some(if i < 8 { Split::Train } else { Split::Test })))
        })
        .collect();
    let p = dir.join("data.jsonl");
    write_examples(&p, &examples).unwrap();
    p
}

const CONFIG: &str = r#"
dataset = "data.jsonl"
target_domain = "lighting"
algorithm = "adagrad"
seed = 3

[parser]
beam_size = 30
max_rule_applications = 10

[grid]
l1_coefficients = [0.001]
step_sizes = [0.1]
iterations_step2 = [1, 2]
iterations_step1 = [1]
partition_sizes = [1]
orderings = 1
"#;

#[test]
fn tune_train_eval_and_significance_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let p = |n: &str| dir.path().join(n);

    run_ok(&["tune", "--config", s(&cfg), "--out", s(&p("tuned.json"))]);
    assert!(std::fs::read_to_string(p("tuned.json")).unwrap().contains("iterations_step2"));

    run_ok(&["train", "--config", s(&cfg), "--train-config", s(&p("tuned.json")), "--out", s(&p("model.json"))]);
    let out = run_ok(&["eval", "--config", s(&cfg), "--model", s(&p("model.json")), "--out", s(&p("a.json"))]);
    assert!(out.contains("target-domain accesses before testing: 0"), "{out}");
    let a: EvalReport = serde_json::from_str(&std::fs::read_to_string(p("a.json")).unwrap()).unwrap();
    assert_eq!(a.results["lighting"].scores.len(), 8);

    let out = run_ok(&["eval", "--config", s(&cfg), "--no-new-features", "--no-logic-filter", "--out", s(&p("b.json"))]);
    assert!(out.contains("AdaGrad-FA on lighting"), "{out}");
    assert!(out.contains("target-domain accesses before testing: 0"), "{out}");

    let same = run_ok(&["significance", s(&p("a.json")), s(&p("a.json"))]);
    assert!(same.contains("not significant"), "{same}");
    let diff = run_ok(&["significance", s(&p("a.json")), s(&p("b.json")), "--out", s(&p("sig.json"))]);
    assert!(diff.starts_with("lighting: "), "{diff}");
    assert!(p("sig.json").exists());
}

#[test]
fn eval_without_target_covers_every_domain() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, CONFIG.replace("target_domain = \"lighting\"\n", "")).unwrap();
    let report = dir.path().join("r.json");
    run_ok(&["eval", "--config", s(&cfg), "--out", s(&report)]);
    let r: EvalReport = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let domains: Vec<&String> = r.results.keys().collect();
    assert_eq!(domains, ["container", "lighting", "list", "messenger"]);
    assert!(r.results.values().all(|d| d.target_accesses_before_testing == 0));
    let mean = r.results.values().filter_map(|d| d.accuracy).sum::<f64>() / 4.0;
    assert!((r.average.unwrap() - mean).abs() < 1e-9);
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let p = |n: &str| dir.path().join(n);
    assert_eq!(exit_code(&["generate", "--domain", "list", "--count", "1", "--out", s(&p("g.jsonl"))]), 0);

    std::fs::write(p("unknown.toml"), "seed = 1\nbeam = 4\n").unwrap();
    assert_eq!(exit_code(&["tune", "--config", s(&p("unknown.toml"))]), 2);
    assert_eq!(exit_code(&["generate", "--domain", "nowhere", "--count", "1", "--out", s(&p("x.jsonl"))]), 2);
    assert_eq!(exit_code(&["tune", "--dataset", s(&data)]), 2);
    assert_eq!(exit_code(&["frobnicate"]), 2);

    std::fs::write(p("broken.jsonl"), "{\"format\":\"zsparse-dataset\",\"version\":1}\nnot json\n").unwrap();
    assert_eq!(exit_code(&["tune", "--dataset", s(&p("broken.jsonl")), "--target-domain", "list"]), 3);
    assert_eq!(exit_code(&["significance", s(&p("missing.json")), s(&p("missing.json"))]), 3);

    let unwritable = p("no/such/dir/model.json");
    std::fs::write(p("fixed.toml"), CONFIG).unwrap();
    assert_eq!(
        exit_code(&["train", "--config", s(&p("fixed.toml")), "--out", s(&unwritable)]),
        4
    );
}

#[test]
fn report_json_is_stable_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let mut texts = BTreeMap::new();
    for n in ["x.json", "y.json"] {
        let out = dir.path().join(n);
        run_ok(&["eval", "--config", s(&cfg), "--out", s(&out)]);
        texts.insert(n, std::fs::read_to_string(&out).unwrap());
    }
    assert_eq!(texts["x.json"], texts["y.json"]);
}
