//! Single-file model persistence.
//!
//! A model file is one JSON document holding the format version, the
//! fitted TF-IDF vocabulary and idf weights, the SVM weight vector and some
//! training metadata. Floats are written in shortest round-trip form, so a
//! reloaded model reproduces the in-memory predictions bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::Pipeline;

pub const FORMAT_VERSION: u32 = 1;

/// Largest model file written or read (256 MiB).
pub const MAX_MODEL_BYTES: u64 = 256 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file is not valid: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format version {found} (this build reads version {FORMAT_VERSION})")]
    Version { found: u64 },
    #[error("model file has no format_version field")]
    MissingVersion,
    #[error("feature dimension {features} does not match classifier dimension {classifier}")]
    Dimension { features: usize, classifier: usize },
    #[error("model is {size} bytes, over the {MAX_MODEL_BYTES}-byte limit")]
    TooLarge { size: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    /// Seconds since the Unix epoch at training time.
    pub created_unix: u64,
    /// SHA-256 of the training corpus in canonical TSV form.
    pub corpus_fingerprint: String,
    pub train_docs: usize,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelContainer {
    pub format_version: u32,
    #[serde(flatten)]
    pub pipeline: Pipeline,
    pub metadata: TrainingMetadata,
}

impl ModelContainer {
    pub fn new(pipeline: Pipeline, metadata: TrainingMetadata) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            pipeline,
            metadata,
        }
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let json = serde_json::to_string(self)?;
        if json.len() as u64 > MAX_MODEL_BYTES {
            return Err(ModelError::TooLarge {
                size: json.len() as u64,
            });
        }
        Ok(json)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        if text.len() as u64 > MAX_MODEL_BYTES {
            return Err(ModelError::TooLarge {
                size: text.len() as u64,
            });
        }
        // Check the version before the full schema so old or future files
        // fail with a clear message.
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("format_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            Some(found) => return Err(ModelError::Version { found }),
            None => return Err(ModelError::MissingVersion),
        }
        let container: ModelContainer = serde_json::from_value(value)?;
        let (features, classifier) = (container.pipeline.features.dim(), container.pipeline.classifier.dim());
        if features != classifier {
            return Err(ModelError::Dimension { features, classifier });
        }
        Ok(container)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let json = self.to_json()?;
        fs::write(path, json).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let io = |source| ModelError::Io {
            path: path.display().to_string(),
            source,
        };
        let size = fs::metadata(path).map_err(io)?.len();
        if size > MAX_MODEL_BYTES {
            return Err(ModelError::TooLarge { size });
        }
        let text = fs::read_to_string(path).map_err(io)?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Label, LabeledCorpus};
    use crate::svm::SvmConfig;
    use crate::textfeat::FeatureConfig;

    fn container() -> ModelContainer {
        let corpus = LabeledCorpus::from_docs(
            vec![
                Document::new("1", "nalla padam", Some(Label::Not)),
                Document::new("2", "mosham padam", Some(Label::Off)),
            ],
            "mem",
        )
        .unwrap();
        let pipeline = Pipeline::fit(&corpus, &FeatureConfig::default(), &SvmConfig::default()).unwrap();
        ModelContainer::new(
            pipeline,
            TrainingMetadata {
                seed: 0,
                created_unix: 0,
                corpus_fingerprint: corpus.fingerprint(),
                train_docs: 2,
                tool_version: "test".into(),
            },
        )
    }

    #[test]
    fn json_round_trip_is_exact() {
        let c = container();
        let back = ModelContainer::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn version_checked_on_load() {
        let json = container().to_json().unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
        value["format_version"] = 2.into();
        assert!(matches!(
            ModelContainer::from_json(&value.to_string()),
            Err(ModelError::Version { found: 2 })
        ));
        value.as_object_mut().unwrap().remove("format_version");
        assert!(matches!(
            ModelContainer::from_json(&value.to_string()),
            Err(ModelError::MissingVersion)
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let json = container().to_json().unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
        value["classifier"]["weights"].as_array_mut().unwrap().push(0.5.into());
        assert!(matches!(
            ModelContainer::from_json(&value.to_string()),
            Err(ModelError::Dimension { .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            ModelContainer::load(Path::new("/nonexistent/model.json")),
            Err(ModelError::Io { .. })
        ));
    }
}
