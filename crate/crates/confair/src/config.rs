//! Experiment configuration (JSON) and `key=value` overrides.

use std::path::{Path, PathBuf};

use confair_core::{ConstraintMode, FairnessCriterion, KernelSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetChoice {
    Adult,
    Compas,
    German,
    Custom(CustomDataset),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomDataset {
    pub name: String,
    pub train: PathBuf,
    /// A provided test file; a seeded holdout is used when absent.
    #[serde(default)]
    pub test: Option<PathBuf>,
    pub schema: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    UnconstrainedSvm,
    FairSvmFullFeatures,
    Confair,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::UnconstrainedSvm => "unconstrained_svm",
            Method::FairSvmFullFeatures => "fair_svm_full_features",
            Method::Confair => "confair",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Rbf,
}

impl KernelKind {
    pub fn spec(&self, gamma: f64) -> KernelSpec {
        match self {
            KernelKind::Linear => KernelSpec::Linear,
            KernelKind::Rbf => KernelSpec::rbf(gamma),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dataset: DatasetChoice,
    /// Directory holding the bundled CSVs and `schemas/`.
    pub data_dir: PathBuf,
    pub method: Method,
    pub kernel: KernelKind,
    pub c_grid: Vec<f64>,
    /// Ignored for the linear kernel.
    pub gamma_grid: Vec<f64>,
    pub f_tol_list: Vec<f64>,
    pub criterion: FairnessCriterion,
    pub constraint_mode: ConstraintMode,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub cv_folds: usize,
    pub k_permutations: usize,
    pub tau: f64,
    /// Cap on training rows (stratified, seeded).
    pub subsample: Option<usize>,
    pub holdout_fraction: f64,
    pub stratify: bool,
    pub output_dir: PathBuf,
    pub save_models: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetChoice::German,
            data_dir: PathBuf::from("data"),
            method: Method::Confair,
            kernel: KernelKind::Rbf,
            c_grid: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            gamma_grid: vec![0.001, 0.01, 0.1, 1.0, 10.0],
            f_tol_list: vec![0.0, 0.1, 0.001],
            criterion: FairnessCriterion::EqualOpportunity,
            constraint_mode: ConstraintMode::TwoSidedInequality,
            runs: 5,
            seeds: vec![1, 2, 3, 4, 5],
            cv_folds: 10,
            k_permutations: 5,
            tau: 0.0,
            subsample: None,
            holdout_fraction: 0.2,
            stratify: true,
            output_dir: PathBuf::from("results"),
            save_models: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("override {0:?} is not of the form key=value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Resolved input files for one dataset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataPaths {
    pub name: String,
    pub train: PathBuf,
    pub test: Option<PathBuf>,
    pub schema: PathBuf,
}

impl ExperimentConfig {
    /// Reads a config, applies overrides, resolves relative paths against the
    /// config file's directory and validates.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut value: Value = serde_json::from_str(&text)?;
        apply_overrides(&mut value, overrides)?;
        let mut cfg: ExperimentConfig = serde_json::from_value(value)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_dir);
        fix(&mut self.output_dir);
        if let DatasetChoice::Custom(c) = &mut self.dataset {
            fix(&mut c.train);
            fix(&mut c.schema);
            if let Some(t) = &mut c.test {
                fix(t);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.c_grid.is_empty() || self.c_grid.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return bad(format!("c_grid must be non-empty and positive, got {:?}", self.c_grid));
        }
        if self.kernel == KernelKind::Rbf
            && (self.gamma_grid.is_empty() || self.gamma_grid.iter().any(|&g| !(g > 0.0 && g.is_finite())))
        {
            return bad(format!("gamma_grid must be non-empty and positive, got {:?}", self.gamma_grid));
        }
        if self.f_tol_list.is_empty() || self.f_tol_list.iter().any(|&f| !(f >= 0.0)) {
            return bad(format!("f_tol_list must be non-empty and nonnegative, got {:?}", self.f_tol_list));
        }
        if self.seeds.is_empty() || self.runs != self.seeds.len() {
            return bad(format!("runs ({}) must equal the number of seeds ({})", self.runs, self.seeds.len()));
        }
        if self.cv_folds < 2 {
            return bad(format!("cv_folds must be at least 2, got {}", self.cv_folds));
        }
        if self.k_permutations == 0 {
            return bad("k_permutations must be positive".into());
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return bad(format!("holdout_fraction must lie in (0, 1), got {}", self.holdout_fraction));
        }
        if self.subsample.is_some_and(|s| s < 2) {
            return bad("subsample must be at least 2".into());
        }
        if !self.tau.is_finite() {
            return bad("tau must be finite".into());
        }
        Ok(())
    }

    pub fn data_paths(&self) -> DataPaths {
        let d = &self.data_dir;
        let bundled = |name: &str, train: &str, test: Option<&str>| DataPaths {
            name: name.into(),
            train: d.join(train),
            test: test.map(|t| d.join(t)),
            schema: d.join("schemas").join(format!("{name}.json")),
        };
        match &self.dataset {
            DatasetChoice::Adult => bundled("adult", "adult_train.csv", Some("adult_test.csv")),
            DatasetChoice::Compas => bundled("compas", "compas.csv", None),
            DatasetChoice::German => bundled("german", "german.csv", None),
            DatasetChoice::Custom(c) => {
                DataPaths { name: c.name.clone(), train: c.train.clone(), test: c.test.clone(), schema: c.schema.clone() }
            }
        }
    }

    /// `(C, γ)` cells in grid order; γ is `NaN` for the linear kernel.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let gammas = match self.kernel {
            KernelKind::Linear => vec![f64::NAN],
            KernelKind::Rbf => self.gamma_grid.clone(),
        };
        self.c_grid.iter().flat_map(|&c| gammas.iter().map(move |&g| (c, g))).collect()
    }
}

/// Sets `key=value` pairs on a JSON document. Keys may be dotted paths; the
/// value is parsed as JSON, falling back to a plain string.
pub fn apply_overrides(doc: &mut Value, overrides: &[String]) -> Result<(), ConfigError> {
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| ConfigError::Override(o.clone()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Override(o.clone()));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut node = &mut *doc;
        let parts: Vec<&str> = key.split('.').collect();
        for part in &parts[..parts.len() - 1] {
            if !node.is_object() {
                *node = Value::Object(Default::default());
            }
            node = node.as_object_mut().unwrap().entry(part.to_string()).or_insert(Value::Object(Default::default()));
        }
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        node.as_object_mut().unwrap().insert(parts[parts.len() - 1].to_string(), value);
    }
    Ok(())
}
