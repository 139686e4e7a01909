use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Algorithm, DomainPartition, Pipeline, TrainConfig, WeightVector};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained model as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub version: u32,
    pub algorithm: Algorithm,
    pub config: TrainConfig,
    pub partition: Option<DomainPartition>,
    pub training_domains: Vec<String>,
    pub pipeline: Pipeline,
    pub weights: WeightVector,
}

impl Model {
    pub fn load(path: &Path) -> io::Result<Model> {
        let text = std::fs::read_to_string(path)?;
        let model: Model = serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unsupported model version {}", model.version),
            ));
        }
        Ok(model)
    }

    /// Writes to a sibling temporary file, then renames it into place.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        crate::write_atomic(path, text.as_bytes())
    }
}
