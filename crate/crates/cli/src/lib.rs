//! `codemix` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use codemix::corpus::{self, Label, LabeledCorpus};
use codemix::interchange::{self, PredictionRow};
use codemix::metrics::{self, ReportFormat};
use codemix::model::{ModelContainer, ModelError, TrainingMetadata};
use codemix::pipeline::{Pipeline, PipelineError, RunConfig};
use codemix::textfeat::{Analyzer, FeatureError, NgramRange};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Features(FeatureError::Range { .. } | FeatureError::MinDf)
            | PipelineError::Config(_)
            | PipelineError::Svm(codemix::svm::SvmError::Config(_)) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "codemix", version, about = "Offensive-language detection with TF-IDF n-grams and a linear SVM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print per-label counts and percentages of a labeled TSV file.
    Stats {
        input: PathBuf,
    },
    /// Stratified split of a labeled TSV file into train and dev files.
    Split {
        input: PathBuf,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        dev_out: PathBuf,
        /// Fraction of each label kept for training.
        #[arg(long, default_value_t = 0.85)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit TF-IDF features and an SVM on a labeled TSV file and save the model.
    Train(TrainArgs),
    /// Label every row of a TSV file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a predictions file against gold labels.
    Evaluate {
        gold: PathBuf,
        predictions: PathBuf,
        #[arg(long, default_value = "table", value_parser = parse_format)]
        format: ReportFormat,
        /// Also write the JSON report to this path.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub train: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled development file to report scores on after training.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long, default_value = "char+word", value_parser = parse_analyzer)]
    pub analyzer: Analyzer,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1, 6])]
    pub char_ngrams: Vec<usize>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1, 3])]
    pub word_ngrams: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_df: usize,
    /// Keep letter case instead of case folding.
    #[arg(long)]
    pub no_lowercase: bool,
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cost multiplier for OFF examples.
    #[arg(long, default_value_t = 1.0)]
    pub off_weight: f64,
    /// Append a constant feature with this value to learn a bias.
    #[arg(long)]
    pub bias: Option<f64>,
    #[arg(long, default_value = "table", value_parser = parse_format)]
    pub format: ReportFormat,
}

fn parse_analyzer(s: &str) -> Result<Analyzer, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

impl TrainArgs {
    pub fn run_config(&self) -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.features.analyzer = self.analyzer;
        cfg.features.char_range = NgramRange::new(self.char_ngrams[0], self.char_ngrams[1]);
        cfg.features.word_range = NgramRange::new(self.word_ngrams[0], self.word_ngrams[1]);
        cfg.features.min_df = self.min_df;
        cfg.features.lowercase = !self.no_lowercase;
        cfg.svm.c = self.c;
        cfg.svm.tolerance = self.tolerance;
        cfg.svm.max_epochs = self.max_epochs;
        cfg.svm.seed = self.seed;
        cfg.svm.class_weights[Label::Off.index()] = self.off_weight;
        cfg.svm.bias_feature = self.bias;
        cfg
    }
}

fn read_corpus(path: &Path) -> Result<LabeledCorpus, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    corpus::parse_dataset(&bytes, path.display().to_string())
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Internal(format!("writing output: {e}")))
}

fn load_model(path: &Path) -> Result<ModelContainer, Failure> {
    ModelContainer::load(path).map_err(|e| Failure::Data(e.to_string()))
}

/// Parses `args` (including the program name) and runs the command,
/// writing reports to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => emit(out, &e.to_string()),
                _ => Err(Failure::Usage(e.to_string())),
            };
        }
    };
    match cli.command {
        Command::Stats { input } => cmd_stats(&input, out),
        Command::Split {
            input,
            train_out,
            dev_out,
            fraction,
            seed,
        } => cmd_split(&input, fraction, seed, &train_out, &dev_out, out),
        Command::Train(args) => cmd_train(&args, out),
        Command::Predict { model, input, out: dest } => cmd_predict(&model, &input, dest.as_deref(), out),
        Command::Evaluate {
            gold,
            predictions,
            format,
            json_out,
        } => cmd_evaluate(&gold, &predictions, format, json_out.as_deref(), out),
    }
}

pub fn cmd_stats(input: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let corpus = read_corpus(input)?;
    let stats = corpus::corpus_stats(&corpus).map_err(|e| Failure::Data(e.to_string()))?;
    emit(out, &stats.render_table())
}

pub fn cmd_split(
    input: &Path,
    fraction: f64,
    seed: u64,
    train_out: &Path,
    dev_out: &Path,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Failure::Usage(format!("--fraction must lie strictly between 0 and 1, got {fraction}")));
    }
    let corpus = read_corpus(input)?;
    let (train, dev) = corpus::stratified_split(&corpus, fraction, seed).map_err(|e| Failure::Data(e.to_string()))?;
    write_file(train_out, &train.to_tsv())?;
    write_file(dev_out, &dev.to_tsv())?;
    emit(
        out,
        &format!(
            "train: {} documents -> {}\ndev: {} documents -> {}\n",
            train.len(),
            train_out.display(),
            dev.len(),
            dev_out.display()
        ),
    )
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let config = args.run_config();
    config.validate()?;
    let train = read_corpus(&args.train)?;
    let dev = args.dev.as_deref().map(read_corpus).transpose()?;

    let pipeline = Pipeline::fit(&train, &config.features, &config.svm)?;
    let diag = &pipeline.classifier.diagnostics;
    emit(
        out,
        &format!(
            "trained on {} documents: {} features ({}), {} epoch(s), converged: {}, dual objective {:.6}\n",
            train.len(),
            pipeline.dim(),
            config.features.analyzer,
            diag.epochs,
            diag.converged,
            diag.dual_objective
        ),
    )?;

    if let Some(dev) = dev {
        let report = pipeline.evaluate(&dev)?;
        emit(out, &format!("dev set ({}):\n", dev.provenance()))?;
        emit(out, &metrics::render_report(&report, args.format))?;
    }

    let created_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let container = ModelContainer::new(
        pipeline,
        TrainingMetadata {
            seed: config.svm.seed,
            created_unix,
            corpus_fingerprint: train.fingerprint(),
            train_docs: train.len(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    );
    container.save(&args.model).map_err(|e| match e {
        ModelError::TooLarge { .. } => Failure::Data(e.to_string()),
        other => Failure::Internal(other.to_string()),
    })?;
    emit(out, &format!("model written to {}\n", args.model.display()))
}

pub fn cmd_predict(model: &Path, input: &Path, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let container = load_model(model)?;
    let corpus = read_corpus(input)?;
    let rows: Vec<PredictionRow> = corpus
        .docs()
        .iter()
        .map(|doc| {
            let p = container.pipeline.predict(&doc.text);
            PredictionRow {
                id: doc.id.clone(),
                label: p.label,
                score: Some(p.score),
            }
        })
        .collect();
    let tsv = interchange::write_predictions(&rows);
    match dest {
        Some(path) => write_file(path, &tsv),
        None => emit(out, &tsv),
    }
}

pub fn cmd_evaluate(
    gold: &Path,
    predictions: &Path,
    format: ReportFormat,
    json_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let gold_corpus = read_corpus(gold)?;
    if gold_corpus.is_empty() {
        return Err(Failure::Data(format!("{}: no documents to evaluate", gold.display())));
    }
    let bytes = fs::read(predictions).map_err(|e| Failure::Data(format!("{}: {e}", predictions.display())))?;
    let rows = interchange::parse_predictions(&bytes).map_err(|e| Failure::Data(format!("{}: {e}", predictions.display())))?;
    let (golds, preds) = interchange::join_predictions(&gold_corpus, &rows).map_err(|e| Failure::Data(e.to_string()))?;
    let matrix = metrics::confusion(&golds, &preds).map_err(|e| Failure::Data(e.to_string()))?;
    let report = metrics::evaluate(&matrix);
    if let Some(path) = json_out {
        write_file(path, &metrics::render_report(&report, ReportFormat::Json))?;
    }
    emit(out, &metrics::render_report(&report, format))
}
