use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfigFile;
use super::dataset::{gold_path, read_examples, to_dataset, write_gold, write_records, GoldRecord, Record, StateRecord};
use super::{CliError, Common};
use crate::domain::{generate_state_pair, DomainRegistry};
use crate::evaluation::{
    aggregate_accuracy, paired_bootstrap, run_ablation_table, run_experiment, AblationTable, AccessCount, Ablation,
    Dataset, ExampleScore, Experiment, ExperimentSpec,
};
use crate::features::{FeatureConfig, Lexicon};
use crate::parser::{candidates_with, ParseInput};
use crate::training::{Model, Pipeline, TrainConfig, TuningReport, WeightVector};

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    crate::write_atomic(path, text.as_bytes()).map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<RunConfigFile, CliError> {
    match path {
        Some(p) => RunConfigFile::load(p).map_err(CliError::Config),
        None => Ok(RunConfigFile::default()),
    }
}

/// The config with command-line flags applied on top.
fn resolve(common: &Common) -> Result<RunConfigFile, CliError> {
    let mut c = load_config(common.config.as_deref())?;
    if let Some(d) = &common.dataset {
        c.dataset = Some(d.clone());
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(t) = &common.target_domain {
        c.target_domain = Some(t.clone());
    }
    if let Some(a) = common.algorithm {
        c.algorithm = a;
    }
    c.ablation.new_features &= !common.no_new_features;
    c.ablation.logic_filter &= !common.no_logic_filter;
    c.in_domain |= common.in_domain;
    c.validate().map_err(CliError::Config)?;
    Ok(c)
}

fn load_dataset(c: &RunConfigFile, registry: &DomainRegistry) -> Result<Dataset, CliError> {
    let path = c
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::Config("no dataset given (--dataset or `dataset`)".into()))?;
    let examples = read_examples(path, registry).map_err(|e| CliError::Data(e.to_string()))?;
    to_dataset(examples, c.train_per_domain).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn spec_for(c: &RunConfigFile, target: &str) -> ExperimentSpec {
    ExperimentSpec {
        target_domain: target.to_string(),
        ablation: c.ablation(),
        in_domain: c.in_domain,
        seed: c.seed,
    }
}

fn spec(c: &RunConfigFile) -> Result<ExperimentSpec, CliError> {
    let target = c
        .target_domain
        .as_deref()
        .ok_or_else(|| CliError::Config("no target domain given (--target-domain or `target_domain`)".into()))?;
    Ok(spec_for(c, target))
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn registry(c: &RunConfigFile) -> Result<DomainRegistry, CliError> {
    c.registry().map_err(CliError::Config)
}

pub fn generate(
    domain: &str,
    count: usize,
    seed: u64,
    path: &Path,
    config: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let reg = registry(&load_config(config)?)?;
    let d = reg
        .get(domain)
        .ok_or_else(|| CliError::Config(format!("unknown domain `{domain}`")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut gold = Vec::new();
    for m in &d.methods {
        for _ in 0..count {
            let pair = generate_state_pair(d, &m.name, &mut rng).map_err(runtime)?;
            let id = format!("{}-{:05}", d.id, records.len());
            gold.push(GoldRecord::new(&id, &pair.call));
            records.push(Record {
                id,
                domain: d.id.clone(),
                utterance: String::new(),
                initial: StateRecord::from_state(&pair.initial),
                desired: StateRecord::from_state(&pair.desired),
                split: None,
            });
        }
    }
    write_records(path, &records).map_err(io_err(path))?;
    let gp = gold_path(path);
    write_gold(&gp, &gold).map_err(io_err(&gp))?;
    writeln!(out, "wrote {} records to {} (gold calls in {})", records.len(), path.display(), gp.display())
        .map_err(runtime)
}

pub fn train(common: &Common, train_config: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let c = resolve(common)?;
    let path = common
        .out
        .as_ref()
        .ok_or_else(|| CliError::Config("train needs --out for the model file".into()))?;
    let reg = registry(&c)?;
    let ds = load_dataset(&c, &reg)?;
    let settings = c.settings();
    let exp = Experiment::new(&spec(&c)?, &ds, &reg, &settings).map_err(runtime)?;
    let config: TrainConfig = match train_config {
        Some(p) => read_json(p)?,
        None => c.train.clone().unwrap_or(TrainConfig {
            seed: c.seed,
            ..TrainConfig::default()
        }),
    };
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let model = exp.train(&config).map_err(runtime)?;
    model.save(path).map_err(io_err(path))?;
    writeln!(
        out,
        "trained {} on {} with {} nonzero weights; model written to {}",
        c.ablation(),
        model.training_domains.join(", "),
        model.weights.iter().filter(|(_, w)| *w != 0.0).count(),
        path.display()
    )
    .map_err(runtime)
}

pub fn tune(common: &Common, out: &mut dyn Write) -> Result<(), CliError> {
    let c = resolve(common)?;
    let reg = registry(&c)?;
    let ds = load_dataset(&c, &reg)?;
    let settings = c.settings();
    let exp = Experiment::new(&spec(&c)?, &ds, &reg, &settings).map_err(runtime)?;
    let report = exp.tune().map_err(runtime)?;
    let acc = report.mean_accuracy[report.selected_index];
    writeln!(
        out,
        "selected entry {} of {} (mean held-out accuracy {})",
        report.selected_index,
        report.mean_accuracy.len(),
        acc.map_or("n/a".into(), |a| format!("{:.1}", 100.0 * a))
    )
    .map_err(runtime)?;
    match &common.out {
        Some(p) => write_json(p, &report.selected),
        None => writeln!(out, "{}", serde_json::to_string_pretty(&report.selected).map_err(runtime)?).map_err(runtime),
    }
}

/// One target domain's results inside an [`EvalReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainReport {
    pub accuracy: Option<f64>,
    pub target_accesses_before_testing: usize,
    pub scores: Vec<ExampleScore>,
    pub accesses: Vec<AccessCount>,
    pub tuning: Option<TuningReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub in_domain: bool,
    pub results: BTreeMap<String, DomainReport>,
    pub average: Option<f64>,
    pub table: Option<AblationTable>,
}

impl EvalReport {
    fn summary(&self, out: &mut dyn Write) -> std::io::Result<()> {
        if let Some(t) = &self.table {
            return write!(out, "{t}");
        }
        let cell = |v: Option<f64>| v.map_or("n/a".into(), |x| format!("{x:.1}"));
        for (d, r) in &self.results {
            let isolation = if self.in_domain {
                String::new()
            } else if r.target_accesses_before_testing == 0 {
                ", target-domain accesses before testing: 0".into()
            } else {
                format!(", target-domain accesses before testing: {} (NOT ISOLATED)", r.target_accesses_before_testing)
            };
            writeln!(out, "{} on {d}: {} over {} examples{isolation}", self.model, cell(r.accuracy), r.scores.len())?;
        }
        if self.results.len() > 1 {
            writeln!(out, "average: {}", cell(self.average))?;
        }
        Ok(())
    }
}

fn average(results: &BTreeMap<String, DomainReport>) -> Option<f64> {
    let xs: Vec<f64> = results.values().filter_map(|r| r.accuracy).collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn eval(common: &Common, model_path: Option<&Path>, table: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let c = resolve(common)?;
    let reg = registry(&c)?;
    let ds = load_dataset(&c, &reg)?;
    let settings = c.settings();
    let mut report = EvalReport {
        model: c.ablation().to_string(),
        in_domain: c.in_domain,
        results: BTreeMap::new(),
        average: None,
        table: None,
    };
    if table {
        let t = run_ablation_table(&ds, &reg, &settings, &Ablation::all(), c.in_domain, c.seed).map_err(runtime)?;
        report.model = "ablations".into();
        report.table = Some(t);
    } else if let Some(mp) = model_path {
        let model = Model::load(mp).map_err(|e| CliError::Data(format!("{}: {e}", mp.display())))?;
        let spec = spec(&c)?;
        let exp = Experiment::new(&spec, &ds, &reg, &settings).map_err(runtime)?;
        let scores = exp.test(&model).map_err(runtime)?;
        let target = exp.spec().target_domain.clone();
        // the model file records what it was trained on
        let leaked = usize::from(model.training_domains.contains(&target) && !c.in_domain);
        report.model = format!("{} ({})", mp.display(), model.algorithm);
        report.results.insert(
            target,
            DomainReport {
                accuracy: aggregate_accuracy(&scores),
                target_accesses_before_testing: leaked,
                scores,
                accesses: exp.accesses(),
                tuning: None,
            },
        );
    } else {
        let targets: Vec<String> = match &c.target_domain {
            Some(t) => vec![t.clone()],
            None => ds.domains(),
        };
        for t in targets {
            let r = run_experiment(&spec_for(&c, &t), &ds, &reg, &settings).map_err(runtime)?;
            report.results.insert(
                r.spec.target_domain.clone(),
                DomainReport {
                    accuracy: r.accuracy,
                    target_accesses_before_testing: r.target_accesses_before_testing(),
                    scores: r.scores.clone(),
                    accesses: r.accesses.clone(),
                    tuning: Some(r.tuning.clone()),
                },
            );
        }
    }
    report.average = average(&report.results);
    report.summary(out).map_err(runtime)?;
    if let Some(p) = &common.out {
        write_json(p, &report)?;
    }
    Ok(())
}

pub struct ParseRequest {
    pub domain: String,
    pub state: PathBuf,
    pub model: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub n_best: usize,
    pub explain: bool,
    pub config: Option<PathBuf>,
    pub no_new_features: bool,
    pub no_logic_filter: bool,
    pub utterance: String,
}

pub fn parse(req: &ParseRequest, out: &mut dyn Write) -> Result<(), CliError> {
    let c = load_config(req.config.as_deref())?;
    let reg = registry(&c)?;
    let domain = reg
        .get(&req.domain)
        .ok_or_else(|| CliError::Config(format!("unknown domain `{}`", req.domain)))?
        .clone();
    let (weights, pipeline) = match (&req.model, &req.weights) {
        (Some(p), _) => {
            let m = Model::load(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            (m.weights, m.pipeline)
        }
        (None, w) => {
            let weights: WeightVector = match w {
                Some(p) => read_json(p)?,
                None => WeightVector::new(),
            };
            let pipeline = Pipeline {
                features: FeatureConfig {
                    use_new_features: c.ablation.new_features && !req.no_new_features,
                    ..c.features
                },
                parser: c.parser,
                use_logic_filter: c.ablation.logic_filter && !req.no_logic_filter,
            };
            (weights, pipeline)
        }
    };
    let record: StateRecord = read_json(&req.state)?;
    let state = record
        .to_state(&domain.id)
        .map_err(|e| CliError::Data(format!("{}: {e}", req.state.display())))?;
    crate::domain::validate_state(&domain, &state).map_err(|e| CliError::Data(format!("{}: {e}", req.state.display())))?;
    let lexicon = Lexicon::build(&domain, pipeline.features.stemming);
    let input = ParseInput::new(&req.utterance, &state, Arc::clone(&domain), &lexicon, pipeline.features);
    let mut cands = match candidates_with(&input, &weights, &pipeline.parser, pipeline.use_logic_filter) {
        Ok(c) => c,
        Err(e) => return writeln!(out, "no parse: {e}").map_err(runtime),
    };
    cands.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.derivation.printed().cmp(b.derivation.printed()))
    });
    writeln!(out, "{} candidates", cands.len()).map_err(runtime)?;
    for (rank, cand) in cands.iter().take(req.n_best).enumerate() {
        let status = match &cand.result {
            Some(next) if *next == state => " [no effect]",
            Some(_) => "",
            None => " [raises]",
        };
        writeln!(out, "{:>3}. {:>9.4}  {}{status}", rank + 1, cand.score, cand.derivation).map_err(runtime)?;
        if req.explain {
            let mut parts: Vec<(String, f64, f64)> = cand
                .features(&input.features)
                .iter()
                .map(|(k, v)| (k.to_string(), v, v * weights.get(k)))
                .collect();
            parts.sort_by(|a, b| b.2.abs().total_cmp(&a.2.abs()).then_with(|| a.0.cmp(&b.0)));
            let silent = parts.iter().filter(|p| p.2 == 0.0).count();
            for (k, v, contrib) in parts.iter().filter(|p| p.2 != 0.0) {
                writeln!(out, "        {contrib:>+9.4}  {k} = {v}").map_err(runtime)?;
            }
            writeln!(out, "        ({silent} features with zero weight)").map_err(runtime)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceLine {
    pub domain: String,
    pub accuracy_a: Option<f64>,
    pub accuracy_b: Option<f64>,
    pub p_value: f64,
    pub significant: bool,
}

pub fn significance(
    a: &Path,
    b: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let c = load_config(config)?;
    let seed = seed.unwrap_or(c.seed);
    let ra: EvalReport = read_json(a)?;
    let rb: EvalReport = read_json(b)?;
    let mut lines = Vec::new();
    for (d, x) in &ra.results {
        let Some(y) = rb.results.get(d) else { continue };
        if x.scores.is_empty() {
            continue;
        }
        let r = paired_bootstrap(&x.scores, &y.scores, c.bootstrap.iterations, c.bootstrap.alpha, seed)
            .map_err(|e| CliError::Data(format!("{d}: {e}")))?;
        lines.push(SignificanceLine {
            domain: d.clone(),
            accuracy_a: x.accuracy,
            accuracy_b: y.accuracy,
            p_value: r.p_value,
            significant: r.significant,
        });
    }
    if lines.is_empty() {
        return Err(CliError::Data("the reports share no scored domain".into()));
    }
    let cell = |v: Option<f64>| v.map_or("n/a".into(), |x| format!("{x:.1}"));
    for l in &lines {
        writeln!(
            out,
            "{}: {} vs {}, p = {:.4}, {}",
            l.domain,
            cell(l.accuracy_a),
            cell(l.accuracy_b),
            l.p_value,
            if l.significant { "significant" } else { "not significant" }
        )
        .map_err(runtime)?;
    }
    match path {
        Some(p) => write_json(p, &lines),
        None => Ok(()),
    }
}
