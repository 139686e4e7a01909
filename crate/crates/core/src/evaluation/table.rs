use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{paired_bootstrap, run_experiment, Ablation, Dataset, EvaluationError, ExampleScore, ExperimentSettings, ExperimentSpec};
use crate::domain::DomainRegistry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub ablation: Ablation,
    /// Zero-shot accuracy per target domain.
    pub zero_shot: BTreeMap<String, Option<f64>>,
    /// In-domain accuracy per domain, when run.
    pub in_domain: BTreeMap<String, Option<f64>>,
    /// Domains where this row differs significantly from AdaGrad.
    pub significant: Vec<String>,
    pub scores: BTreeMap<String, Vec<ExampleScore>>,
}

fn mean(values: &BTreeMap<String, Option<f64>>) -> Option<f64> {
    let xs: Vec<f64> = values.values().flatten().copied().collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

impl AblationRow {
    pub fn average(&self) -> Option<f64> {
        mean(&self.zero_shot)
    }

    pub fn in_domain_average(&self) -> Option<f64> {
        mean(&self.in_domain)
    }
}

/// Per-domain accuracies of several ablations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub domains: Vec<String>,
    pub rows: Vec<AblationRow>,
}

/// Runs every ablation on every domain as target. In-domain results are
/// added to AdaGrad rows when `in_domain` is set. Full GMDP is compared with
/// full AdaGrad per domain by paired bootstrap.
pub fn run_ablation_table(
    dataset: &Dataset,
    registry: &DomainRegistry,
    settings: &ExperimentSettings,
    ablations: &[Ablation],
    in_domain: bool,
    seed: u64,
) -> Result<AblationTable, EvaluationError> {
    let domains = dataset.domains();
    let mut rows = Vec::new();
    for ablation in ablations {
        let mut row = AblationRow {
            ablation: *ablation,
            zero_shot: BTreeMap::new(),
            in_domain: BTreeMap::new(),
            significant: Vec::new(),
            scores: BTreeMap::new(),
        };
        for d in &domains {
            let spec = ExperimentSpec {
                target_domain: d.clone(),
                ablation: *ablation,
                in_domain: false,
                seed,
            };
            let r = run_experiment(&spec, dataset, registry, settings)?;
            row.zero_shot.insert(d.clone(), r.accuracy);
            row.scores.insert(d.clone(), r.scores);
            if in_domain && !ablation.use_gmdp {
                let r = run_experiment(&ExperimentSpec { in_domain: true, ..spec }, dataset, registry, settings)?;
                row.in_domain.insert(d.clone(), r.accuracy);
            }
        }
        rows.push(row);
    }
    let full = |gmdp| {
        rows.iter().position(|r: &AblationRow| {
            r.ablation
                == Ablation {
                    use_gmdp: gmdp,
                    ..Ablation::default()
                }
        })
    };
    if let (Some(g), Some(a)) = (full(true), full(false)) {
        for d in &domains {
            let (sg, sa) = (&rows[g].scores[d], &rows[a].scores[d]);
            if sg.is_empty() {
                continue;
            }
            if paired_bootstrap(sg, sa, 10_000, 0.05, seed)?.significant {
                rows[g].significant.push(d.clone());
            }
        }
    }
    Ok(AblationTable { domains, rows })
}

fn cell(v: Option<f64>) -> String {
    v.map_or("n/a".to_string(), |x| format!("{x:.1}"))
}

impl fmt::Display for AblationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut header = vec!["Training Algorithm and Model".to_string()];
        header.extend(self.domains.iter().map(|d| {
            let mut c = d.chars();
            c.next().map(|h| h.to_uppercase().chain(c).collect()).unwrap_or_default()
        }));
        header.push("Avg.".into());
        let mut lines = vec![header];
        for row in &self.rows {
            let mut line = vec![row.ablation.to_string()];
            for d in &self.domains {
                let mut c = cell(row.zero_shot.get(d).copied().flatten());
                if row.significant.contains(d) {
                    c.push_str(" *");
                }
                if let Some(v) = row.in_domain.get(d) {
                    c.push_str(&format!(" ({})", cell(*v)));
                }
                line.push(c);
            }
            let mut avg = cell(row.average());
            if !row.in_domain.is_empty() {
                avg.push_str(&format!(" ({})", cell(row.in_domain_average())));
            }
            line.push(avg);
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|i| lines.iter().map(|l| l[i].len()).max().unwrap_or(0))
            .collect();
        for (n, line) in lines.iter().enumerate() {
            let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            writeln!(f, "| {} |", cells.join(" | "))?;
            if n == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                writeln!(f, "|-{}-|", rule.join("-|-"))?;
            }
        }
        Ok(())
    }
}
