//! Versioned JSON documents for trained models.

use std::path::Path;

use confair_core::dataset::Standardizer;
use confair_core::FairSvmModel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT: &str = "confair-svm-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    /// Names of the full input columns the model expects.
    pub feature_names: Vec<String>,
    /// Scaling applied to raw inputs before `model` sees them.
    #[serde(default)]
    pub standardizer: Option<Standardizer>,
    pub model: FairSvmModel,
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model document {format:?} version {version}")]
    Version { format: String, version: u32 },
}

impl ModelDocument {
    pub fn new(model: FairSvmModel, feature_names: Vec<String>, standardizer: Option<Standardizer>) -> Self {
        Self { format: FORMAT.into(), version: FORMAT_VERSION, feature_names, standardizer, model }
    }

    pub fn to_json(&self) -> Result<String, ModelIoError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelIoError> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != FORMAT || doc.version != FORMAT_VERSION {
            return Err(ModelIoError::Version { format: doc.format, version: doc.version });
        }
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelIoError> {
        std::fs::write(path, self.to_json()?).map_err(|source| ModelIoError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ModelIoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ModelIoError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}
