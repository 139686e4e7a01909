//! The TOML run configuration shared by every command.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{DomainRegistry, GenerationRanges};
use crate::evaluation::{Ablation, ExperimentSettings};
use crate::features::FeatureConfig;
use crate::parser::ParserConfig;
use crate::training::{Algorithm, Grid, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationFlags {
    pub new_features: bool,
    pub logic_filter: bool,
}

impl Default for AblationFlags {
    fn default() -> Self {
        AblationFlags {
            new_features: true,
            logic_filter: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapSettings {
    pub iterations: usize,
    pub alpha: f64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        BootstrapSettings {
            iterations: 10_000,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfigFile {
    /// Relative paths resolve against the config file's directory.
    pub dataset: Option<PathBuf>,
    pub target_domain: Option<String>,
    pub algorithm: Algorithm,
    pub in_domain: bool,
    pub seed: u64,
    /// Training examples per domain when records carry no split.
    pub train_per_domain: usize,
    pub in_domain_folds: usize,
    pub ablation: AblationFlags,
    pub parser: ParserConfig,
    pub features: FeatureConfig,
    pub grid: Grid,
    /// Fixed hyper-parameters for `train` when no tuned config is given.
    pub train: Option<TrainConfig>,
    /// Per-domain overrides of generation ranges, `key = [min, max]`.
    pub generation: BTreeMap<String, BTreeMap<String, (i64, i64)>>,
    pub bootstrap: BootstrapSettings,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        RunConfigFile {
            dataset: None,
            target_domain: None,
            algorithm: Algorithm::Gmdp,
            in_domain: false,
            seed: 0,
            train_per_domain: 100,
            in_domain_folds: 3,
            ablation: AblationFlags::default(),
            parser: ParserConfig::default(),
            features: FeatureConfig::default(),
            grid: Grid::default(),
            train: None,
            generation: BTreeMap::new(),
            bootstrap: BootstrapSettings::default(),
        }
    }
}

impl RunConfigFile {
    /// Parses and validates `path`. Errors name the offending line or field.
    pub fn load(path: &Path) -> Result<RunConfigFile, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut config = Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some(d) = &config.dataset {
            if d.is_relative() {
                config.dataset = Some(path.parent().unwrap_or(Path::new(".")).join(d));
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<RunConfigFile, String> {
        let config: RunConfigFile = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.parser.beam_size == 0 {
            return Err("parser.beam_size must be positive".into());
        }
        if self.parser.max_rule_applications < 3 {
            return Err("parser.max_rule_applications must be at least 3".into());
        }
        if !(0.0..1.0).contains(&self.bootstrap.alpha) || self.bootstrap.alpha == 0.0 {
            return Err("bootstrap.alpha must be in (0, 1)".into());
        }
        if self.in_domain_folds < 2 {
            return Err("in_domain_folds must be at least 2".into());
        }
        if let Some(t) = &self.train {
            t.validate().map_err(|e| format!("train: {e}"))?;
        }
        let g = &self.grid;
        if g.l1_coefficients.is_empty() || g.step_sizes.is_empty() || g.iterations_step2.is_empty() {
            return Err("grid: every axis needs at least one value".into());
        }
        if self.algorithm == Algorithm::Gmdp
            && (g.iterations_step1.is_empty() || g.partition_sizes.is_empty() || g.orderings == 0)
        {
            return Err("grid: GMDP axes need at least one value".into());
        }
        Ok(())
    }

    pub fn ablation(&self) -> Ablation {
        Ablation {
            use_gmdp: self.algorithm == Algorithm::Gmdp,
            use_new_features: self.ablation.new_features,
            use_logic_filter: self.ablation.logic_filter,
        }
    }

    pub fn settings(&self) -> ExperimentSettings {
        ExperimentSettings {
            grid: self.grid.clone(),
            parser: self.parser,
            features: self.features,
            in_domain_folds: self.in_domain_folds,
        }
    }

    /// The built-in domains with this file's generation overrides applied.
    pub fn registry(&self) -> Result<DomainRegistry, String> {
        let mut reg = DomainRegistry::builtin();
        for (id, ranges) in &self.generation {
            let d = reg.get(id).ok_or_else(|| format!("generation: unknown domain `{id}`"))?;
            let pairs: Vec<(&str, i64, i64)> = ranges.iter().map(|(k, (lo, hi))| (k.as_str(), *lo, *hi)).collect();
            let mut d = (**d).clone();
            d.generation = d
                .generation
                .merged(&GenerationRanges::new(&pairs))
                .map_err(|e| format!("generation.{id}: {e}"))?;
            reg.register(d);
        }
        Ok(reg)
    }
}
