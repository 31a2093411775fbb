//! Offensive-language detection for code-mixed social-media text.
//!
//! The pipeline is deliberately small:
//!
//! - [`corpus`]: TSV ingestion, label statistics and seeded stratified splits.
//! - [`textfeat`]: character and word n-gram TF-IDF features.
//! - [`svm`]: an L2-regularized hinge-loss linear SVM trained by dual
//!   coordinate descent.
//! - [`interchange`]: the `id<TAB>label[<TAB>score]` prediction files any
//!   classifier can emit for scoring.
//! - [`metrics`]: confusion matrices and support-weighted precision/recall/F1.
//! - [`model`]: the single-file JSON container holding a complete predictor.
//! - [`pipeline`]: run configuration and the fit/predict composition used by
//!   the command-line tool.
//!
//! All fitted artifacts are immutable once built and can be shared across
//! threads.

pub mod corpus;
pub mod interchange;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod svm;
pub mod synthetic;
pub mod textfeat;

pub use corpus::{ClassCounts, Document, Label, LabeledCorpus};
pub use metrics::{ConfusionMatrix, EvalReport};
pub use model::ModelContainer;
pub use pipeline::{Pipeline, RunConfig};
pub use svm::{LinearSvmModel, SvmConfig, TrainingSet};
pub use textfeat::{Analyzer, FeatureConfig, SparseVector, TfidfModel};
