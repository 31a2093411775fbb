//! Binary linear SVM with L2 regularization and hinge loss.
//!
//! Training solves the dual problem
//!
//! ```text
//! max_α  Σ α_i − ½ ‖Σ α_i y_i x_i‖²   subject to 0 ≤ α_i ≤ C_i
//! ```
//!
//! one coordinate at a time. Each sweep visits the examples in a freshly
//! shuffled order, takes the exact minimizer along the chosen coordinate
//! and clips it into the box, while keeping `w = Σ α_i y_i x_i` up to date.
//! Training stops once the largest projected gradient seen in a sweep
//! falls below the tolerance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::rng::SeededRng;
use crate::textfeat::SparseVector;

#[derive(Debug, Error, PartialEq)]
pub enum SvmError {
    #[error("training set needs at least 2 examples, got {0}")]
    TooFew(usize),
    #[error("{xs} feature vectors but {ys} targets")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("target at position {0} is not +1 or -1")]
    BadTarget(usize),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid SVM configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Misclassification cost.
    pub c: f64,
    /// Stopping threshold on the largest projected gradient of a sweep.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Label mapped to the +1 side of the decision function.
    pub positive_label: Label,
    /// Cost multipliers indexed by [`Label::index`]; the effective bound of
    /// example `i` is `c * class_weights[label_i]`.
    pub class_weights: [f64; 2],
    /// Value of an appended constant feature; `None` trains without bias.
    pub bias_feature: Option<f64>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-4,
            max_epochs: 1000,
            seed: 0,
            positive_label: Label::Off,
            class_weights: [1.0, 1.0],
            bias_feature: None,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<(), SvmError> {
        let bad = |msg: String| Err(SvmError::Config(msg));
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad(format!("C must be positive, got {}", self.c));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if self.class_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return bad(format!("class weights must be positive, got {:?}", self.class_weights));
        }
        if let Some(b) = self.bias_feature {
            if !(b.is_finite() && b > 0.0) {
                return bad(format!("bias feature must be positive, got {b}"));
            }
        }
        Ok(())
    }
}

/// Feature vectors with ±1 targets.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    xs: Vec<SparseVector>,
    ys: Vec<f64>,
    dim: usize,
}

impl TrainingSet {
    pub fn new(xs: Vec<SparseVector>, ys: Vec<i8>) -> Result<Self, SvmError> {
        if xs.len() != ys.len() {
            return Err(SvmError::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(SvmError::TooFew(xs.len()));
        }
        if let Some(pos) = ys.iter().position(|&y| y != 1 && y != -1) {
            return Err(SvmError::BadTarget(pos));
        }
        if !(ys.contains(&1) && ys.contains(&-1)) {
            return Err(SvmError::SingleClass);
        }
        let dim = xs[0].dim();
        if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
            return Err(SvmError::Dimension {
                expected: dim,
                found: x.dim(),
            });
        }
        Ok(Self {
            xs,
            ys: ys.into_iter().map(f64::from).collect(),
            dim,
        })
    }

    /// Targets are +1 for `positive` and −1 for the other label.
    pub fn from_labels(xs: Vec<SparseVector>, labels: &[Label], positive: Label) -> Result<Self, SvmError> {
        let ys = labels.iter().map(|&l| if l == positive { 1 } else { -1 }).collect();
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xs(&self) -> &[SparseVector] {
        &self.xs
    }

    pub fn target(&self, i: usize) -> f64 {
        self.ys[i]
    }
}

/// State at the end of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub dual_objective: f64,
    pub max_projected_gradient: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Largest amount by which any α_i leaves its box `[0, C_i]`.
    pub box_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDiagnostics {
    pub epochs: usize,
    pub converged: bool,
    pub dual_objective: f64,
    pub history: Vec<EpochStats>,
}

/// Raw solver output: primal weights (including the bias coordinate when
/// enabled) together with the dual multipliers.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub weights: Vec<f64>,
    pub alpha: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub diagnostics: TrainingDiagnostics,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs dual coordinate descent.
pub fn solve_dual(data: &TrainingSet, config: &SvmConfig) -> Result<DualSolution, SvmError> {
    config.validate()?;
    let n = data.len();
    let dim = data.dim();
    let bias = config.bias_feature;
    let width = dim + usize::from(bias.is_some());
    let bias_value = bias.unwrap_or(0.0);

    let upper_bounds: Vec<f64> = data
        .ys
        .iter()
        .map(|&y| {
            let label = if y > 0.0 {
                config.positive_label
            } else {
                config.positive_label.other()
            };
            config.c * config.class_weights[label.index()]
        })
        .collect();
    let diag: Vec<f64> = data
        .xs
        .iter()
        .map(|x| x.squared_norm() + bias_value * bias_value)
        .collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; width];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SeededRng::new(config.seed);
    let mut history = Vec::new();
    let mut converged = false;

    let margin = |w: &[f64], i: usize| -> f64 {
        let mut v = data.xs[i].dot(&w[..dim]);
        if bias.is_some() {
            v += w[dim] * bias_value;
        }
        v
    };

    for epoch in 1..=config.max_epochs {
        rng.shuffle(&mut order);
        let mut max_pg: f64 = 0.0;
        for &i in &order {
            let y = data.ys[i];
            let g = y * margin(&w, i) - 1.0;
            let upper = upper_bounds[i];
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= upper {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg.abs());
            if pg == 0.0 {
                continue;
            }
            let old = alpha[i];
            let new = if diag[i] > 0.0 {
                (old - g / diag[i]).clamp(0.0, upper)
            } else if g < 0.0 {
                // Zero vector without bias: the objective is linear along α_i.
                upper
            } else {
                0.0
            };
            let delta = (new - old) * y;
            if delta != 0.0 {
                data.xs[i].add_scaled_to(delta, &mut w[..dim]);
                if bias.is_some() {
                    w[dim] += delta * bias_value;
                }
            }
            alpha[i] = new;
        }

        let dual_objective = alpha.iter().sum::<f64>() - 0.5 * dot(&w, &w);
        let (mut alpha_min, mut alpha_max, mut box_violation) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for (&a, &u) in alpha.iter().zip(&upper_bounds) {
            alpha_min = alpha_min.min(a);
            alpha_max = alpha_max.max(a);
            box_violation = box_violation.max(-a).max(a - u);
        }
        history.push(EpochStats {
            epoch,
            dual_objective,
            max_projected_gradient: max_pg,
            alpha_min,
            alpha_max,
            box_violation,
        });
        if max_pg < config.tolerance {
            converged = true;
            break;
        }
    }

    let last = history.last().expect("at least one epoch runs");
    let diagnostics = TrainingDiagnostics {
        epochs: last.epoch,
        converged,
        dual_objective: last.dual_objective,
        history,
    };
    Ok(DualSolution {
        weights: w,
        alpha,
        upper_bounds,
        diagnostics,
    })
}

/// Trained weights plus the label each side of the hyperplane stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Predicted when the decision value is strictly positive.
    pub positive_label: Label,
    pub diagnostics: TrainingDiagnostics,
}

pub fn train_svm(data: &TrainingSet, config: &SvmConfig) -> Result<LinearSvmModel, SvmError> {
    let solution = solve_dual(data, config)?;
    let dim = data.dim();
    let mut weights = solution.weights;
    let bias = match config.bias_feature {
        Some(b) => weights.pop().map_or(0.0, |wb| wb * b),
        None => 0.0,
    };
    debug_assert_eq!(weights.len(), dim);
    Ok(LinearSvmModel {
        weights,
        bias,
        positive_label: config.positive_label,
        diagnostics: solution.diagnostics,
    })
}

impl LinearSvmModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn negative_label(&self) -> Label {
        self.positive_label.other()
    }

    /// `w·x + b`.
    pub fn decision_value(&self, x: &SparseVector) -> Result<f64, SvmError> {
        if x.dim() != self.dim() {
            return Err(SvmError::Dimension {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(x.dot(&self.weights) + self.bias)
    }

    /// Positive label when the decision value is strictly positive; a tie at
    /// zero goes to the negative label.
    pub fn label_for(&self, decision: f64) -> Label {
        if decision > 0.0 {
            self.positive_label
        } else {
            self.negative_label()
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Label, SvmError> {
        self.decision_value(x).map(|d| self.label_for(d))
    }
}
