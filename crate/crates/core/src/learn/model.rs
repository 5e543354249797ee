//! Versioned JSON model files.
//!
//! A model file carries everything needed to featurize new instances and
//! score them: the feature configuration, scaler, grid map, support set and
//! provenance of the training run. Readers accept any `1.x` version and
//! ignore fields they do not know.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::features::{apply_scaler, FeatureConfig, FeatureVector, GridMap, ScalerState, Scaling};
use crate::kernel::{KernelConfig, Samples};
use crate::learn::svm::{SvmModel, SvrModel};

pub const MODEL_FORMAT: &str = "cwi-model";
pub const MODEL_MAJOR: u32 = 1;
pub const MODEL_MINOR: u32 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Predictor {
    Svm(SvmModel),
    Svr(SvrModel),
}

impl Predictor {
    pub fn kernel(&self) -> KernelConfig {
        match self {
            Predictor::Svm(m) => m.support.kernel,
            Predictor::Svr(m) => m.support.kernel,
        }
    }

    pub fn task(&self) -> Task {
        match self {
            Predictor::Svm(_) => Task::Classify,
            Predictor::Svr(_) => Task::Regress,
        }
    }

    /// Labels for classification, scores for regression.
    pub fn predict(&self, x: &Samples, clamp: bool) -> Result<Vec<f64>> {
        match self {
            Predictor::Svm(m) => Ok(m.predict(x)?.0),
            Predictor::Svr(m) => m.predict(x, clamp),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 over the training split(s) as read from disk.
    pub dataset_hash: String,
    /// Hyperparameters the model was fitted with.
    pub c: f64,
    pub r: Option<f64>,
    pub nu: Option<f64>,
    /// Input file name to SHA-256 of its contents.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    /// Fully resolved run configuration.
    #[serde(default)]
    pub config: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: String,
    pub task: Task,
    pub features: FeatureConfig,
    pub scaler: Option<ScalerState>,
    pub grid_map: Option<GridMap>,
    pub predictor: Predictor,
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn new(
        features: FeatureConfig,
        scaler: Option<ScalerState>,
        grid_map: Option<GridMap>,
        predictor: Predictor,
        provenance: Provenance,
    ) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: format!("{MODEL_MAJOR}.{MODEL_MINOR}"),
            task: predictor.task(),
            features,
            scaler,
            grid_map,
            predictor,
            provenance,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let head: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let format = head.get("format").and_then(|v| v.as_str());
        if format != Some(MODEL_FORMAT) {
            return Err(Error::Format(format!(
                "not a model file (format {format:?})"
            )));
        }
        let version = head.get("version").and_then(|v| v.as_str()).unwrap_or("");
        let major = version
            .split('.')
            .next()
            .and_then(|m| m.parse::<u32>().ok());
        if major != Some(MODEL_MAJOR) {
            return Err(Error::Format(format!(
                "unsupported model version {version:?}"
            )));
        }
        let model: ModelFile =
            serde_json::from_value(head).map_err(|e| Error::Format(e.to_string()))?;
        if model.task != model.predictor.task() {
            return Err(Error::Format("task does not match predictor".into()));
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Turns raw feature vectors into kernel samples using this model's
    /// scaler and layout.
    pub fn samples(&self, vectors: &[FeatureVector]) -> Result<Samples> {
        vectorize(vectors, self.scaler.as_ref(), &self.features)
    }
}

/// Applies the scaler (if any) and lays vectors out in the global index space.
pub fn vectorize(
    vectors: &[FeatureVector],
    scaler: Option<&ScalerState>,
    config: &FeatureConfig,
) -> Result<Samples> {
    let rows = vectors
        .iter()
        .map(|v| match scaler {
            Some(s) => apply_scaler(s, v).to_sparse(config),
            None => v.to_sparse(config),
        })
        .collect();
    Samples::new(config.dim(), rows)
}

/// Scaler fitted on `train`, or `None` when scaling is off.
pub fn fit_scaling(train: &[FeatureVector], config: &FeatureConfig) -> Result<Option<ScalerState>> {
    match config.scaling {
        Scaling::Minmax => Ok(Some(crate::features::fit_scaler(train)?)),
        Scaling::None => Ok(None),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
