//! Run configuration and the TF-IDF → SVM composition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, Label, LabeledCorpus};
use crate::metrics::{self, EvalReport};
use crate::svm::{self, LinearSvmModel, SvmConfig, SvmError, TrainingSet};
use crate::textfeat::{self, FeatureConfig, FeatureError, TfidfModel};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error("invalid run configuration: {0}")]
    Config(String),
}

/// Everything needed to reproduce a split-and-train run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub features: FeatureConfig,
    pub svm: SvmConfig,
    pub split_fraction: f64,
    pub split_seed: u64,
}

impl Default for RunConfig {
    /// Char 1-6 plus word 1-3 grams, C = 1, 85/15 split.
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            svm: SvmConfig::default(),
            split_fraction: 0.85,
            split_seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.features.validate()?;
        self.svm.validate()?;
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(PipelineError::Config(format!(
                "split fraction must lie strictly between 0 and 1, got {}",
                self.split_fraction
            )));
        }
        Ok(())
    }
}

/// One scored document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

/// A fitted featurizer paired with a classifier of matching width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub features: TfidfModel,
    pub classifier: LinearSvmModel,
}

impl Pipeline {
    pub fn new(features: TfidfModel, classifier: LinearSvmModel) -> Result<Self, PipelineError> {
        if features.dim() != classifier.dim() {
            return Err(SvmError::Dimension {
                expected: features.dim(),
                found: classifier.dim(),
            }
            .into());
        }
        Ok(Self { features, classifier })
    }

    /// Fits TF-IDF on `train` only, then trains the SVM on the resulting vectors.
    pub fn fit(train: &LabeledCorpus, features: &FeatureConfig, svm_config: &SvmConfig) -> Result<Self, PipelineError> {
        svm_config.validate()?;
        let labels = train.labels()?;
        let tfidf = textfeat::fit_tfidf(train, features)?;
        let xs = tfidf.transform_all(train.texts());
        let data = TrainingSet::from_labels(xs, &labels, svm_config.positive_label)?;
        let classifier = svm::train_svm(&data, svm_config)?;
        Self::new(tfidf, classifier)
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    pub fn predict(&self, text: &str) -> Prediction {
        let x = self.features.transform(text);
        let score = self
            .classifier
            .decision_value(&x)
            .expect("featurizer and classifier widths agree");
        Prediction {
            label: self.classifier.label_for(score),
            score,
        }
    }

    pub fn predict_corpus(&self, corpus: &LabeledCorpus) -> Vec<Prediction> {
        corpus.texts().map(|t| self.predict(t)).collect()
    }

    /// Predicts every document of a fully labeled corpus and scores the result.
    pub fn evaluate(&self, gold: &LabeledCorpus) -> Result<EvalReport, PipelineError> {
        let golds = gold.labels()?;
        let preds: Vec<Label> = self.predict_corpus(gold).into_iter().map(|p| p.label).collect();
        let matrix = metrics::confusion(&golds, &preds).map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(metrics::evaluate(&matrix))
    }
}
