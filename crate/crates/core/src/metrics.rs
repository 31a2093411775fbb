//! Confusion matrices and support-weighted precision, recall and F1.
//!
//! Undefined ratios (zero denominators) count as 0. Weighted averages
//! weight each label's score by its gold support, so weighted recall is
//! always equal to accuracy.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{golds} gold labels but {preds} predictions")]
    LengthMismatch { golds: usize, preds: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("malformed report: {0}")]
    Report(String),
}

/// 2×2 counts indexed `[gold][predicted]` in [`Label::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub const fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        Self { counts }
    }

    pub fn get(&self, gold: Label, pred: Label) -> u64 {
        self.counts[gold.index()][pred.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        self.counts[0][0] + self.counts[1][1]
    }

    /// Gold support of a label (row sum).
    pub fn support(&self, label: Label) -> u64 {
        self.counts[label.index()].iter().sum()
    }

    /// Number of predictions of a label (column sum).
    pub fn predicted(&self, label: Label) -> u64 {
        self.counts.iter().map(|row| row[label.index()]).sum()
    }

    /// Matrix with both label axes swapped.
    pub fn swapped(&self) -> Self {
        let c = self.counts;
        Self {
            counts: [[c[1][1], c[1][0]], [c[0][1], c[0][0]]],
        }
    }
}

pub fn confusion(golds: &[Label], preds: &[Label]) -> Result<ConfusionMatrix, MetricsError> {
    if golds.len() != preds.len() {
        return Err(MetricsError::LengthMismatch {
            golds: golds.len(),
            preds: preds.len(),
        });
    }
    if golds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut counts = [[0u64; 2]; 2];
    for (g, p) in golds.iter().zip(preds) {
        counts[g.index()][p.index()] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub label: Label,
    #[serde(flatten)]
    pub scores: Scores,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub per_label: Vec<LabelScores>,
    pub weighted: Scores,
    pub accuracy: f64,
    pub total: u64,
    pub matrix: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Per-label and weighted scores of a confusion matrix. An empty matrix
/// yields all-zero scores.
pub fn evaluate(matrix: &ConfusionMatrix) -> EvalReport {
    let total = matrix.total();
    let per_label: Vec<LabelScores> = Label::ALL
        .iter()
        .map(|&label| {
            let tp = matrix.get(label, label);
            let precision = ratio(tp, matrix.predicted(label));
            let recall = ratio(tp, matrix.support(label));
            LabelScores {
                label,
                scores: Scores {
                    precision,
                    recall,
                    f1: harmonic(precision, recall),
                },
                support: matrix.support(label),
            }
        })
        .collect();

    let weigh = |pick: fn(&Scores) -> f64| -> f64 {
        if total == 0 {
            return 0.0;
        }
        per_label
            .iter()
            .map(|l| l.support as f64 * pick(&l.scores))
            .sum::<f64>()
            / total as f64
    };
    let weighted = Scores {
        precision: weigh(|s| s.precision),
        recall: weigh(|s| s.recall),
        f1: weigh(|s| s.f1),
    };
    EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        per_label,
        weighted,
        accuracy: ratio(matrix.trace(), total),
        total,
        matrix: *matrix,
    }
}

/// Rounds half-up to `decimals` places and formats with exactly that many.
pub fn format_fixed(value: f64, decimals: u32) -> String {
    let scale = 10f64.powi(decimals as i32);
    let rounded = (value * scale + 0.5).floor() / scale;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:.prec$}", prec = decimals as usize)
}

fn f4(x: f64) -> String {
    format_fixed(x, 4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?} (expected table or json)")),
        }
    }
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_table(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

impl EvalReport {
    pub fn from_json(text: &str) -> Result<Self, MetricsError> {
        let report: EvalReport = serde_json::from_str(text).map_err(|e| MetricsError::Report(e.to_string()))?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(MetricsError::Report(format!(
                "unsupported schema version {} (expected {REPORT_SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }
}

fn render_table(report: &EvalReport) -> String {
    let mut rows: Vec<[String; 5]> = vec![[
        "Label".into(),
        "Precision".into(),
        "Recall".into(),
        "F1".into(),
        "Support".into(),
    ]];
    for l in &report.per_label {
        rows.push([
            l.label.to_string(),
            f4(l.scores.precision),
            f4(l.scores.recall),
            f4(l.scores.f1),
            l.support.to_string(),
        ]);
    }
    rows.push([
        "Weighted".into(),
        f4(report.weighted.precision),
        f4(report.weighted.recall),
        f4(report.weighted.f1),
        report.total.to_string(),
    ]);

    let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let _ = write!(out, "{:<w$}", row[0], w = widths[0]);
        for c in 1..5 {
            let _ = write!(out, "  {:>w$}", row[c], w = widths[c]);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "Accuracy: {}", f4(report.accuracy));
    out.push('\n');

    let m = &report.matrix;
    let cells: Vec<String> = m.counts.iter().flatten().map(u64::to_string).collect();
    let w = cells.iter().map(String::len).max().unwrap_or(1).max(3);
    let _ = writeln!(out, "Confusion matrix (rows: gold, columns: predicted)");
    let _ = writeln!(out, "{:<4}  {:>w$}  {:>w$}", "", "NOT", "OFF");
    for gold in Label::ALL {
        let _ = writeln!(
            out,
            "{:<4}  {:>w$}  {:>w$}",
            gold.as_str(),
            m.get(gold, Label::Not),
            m.get(gold, Label::Off)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Not, Off};

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[Not, Off], &[Not, Off]).unwrap().counts, [[1, 0], [0, 1]]);
        assert_eq!(confusion(&[Not, Not], &[Off, Off]).unwrap().counts, [[0, 2], [0, 0]]);
        assert_eq!(
            confusion(&[Not], &[Not, Off]).unwrap_err(),
            MetricsError::LengthMismatch { golds: 1, preds: 2 }
        );
        assert_eq!(confusion(&[], &[]).unwrap_err(), MetricsError::Empty);
    }

    #[test]
    fn task_one_svm_reconstruction() {
        let mut golds = vec![Not; 334];
        golds.extend(vec![Off; 66]);
        let mut preds = vec![Not; 332];
        preds.extend([Off, Off]);
        preds.extend(vec![Not; 18]);
        preds.extend(vec![Off; 48]);
        assert_eq!(confusion(&golds, &preds).unwrap().counts, [[332, 2], [18, 48]]);
    }

    #[test]
    fn perfect_diagonal_scores_one() {
        let r = evaluate(&ConfusionMatrix::from_counts([[7, 0], [0, 3]]));
        assert_eq!(r.weighted, Scores { precision: 1.0, recall: 1.0, f1: 1.0 });
        assert_eq!(r.accuracy, 1.0);
        assert!(r.per_label.iter().all(|l| l.scores.f1 == 1.0));
    }

    #[test]
    fn zero_denominators_yield_zero() {
        // OFF is never predicted and never gold.
        let r = evaluate(&ConfusionMatrix::from_counts([[5, 0], [0, 0]]));
        let off = &r.per_label[1];
        assert_eq!(off.scores, Scores { precision: 0.0, recall: 0.0, f1: 0.0 });
        assert_eq!(r.weighted.f1, 1.0);
        let table = render_report(&r, ReportFormat::Table);
        assert!(table.contains("0.0000") && !table.contains("NaN"), "{table}");

        let empty = evaluate(&ConfusionMatrix::from_counts([[0, 0], [0, 0]]));
        assert_eq!(empty.accuracy, 0.0);
        assert_eq!(empty.weighted.f1, 0.0);
    }

    #[test]
    fn table_layout() {
        let r = evaluate(&ConfusionMatrix::from_counts([[332, 2], [18, 48]]));
        let table = render_report(&r, ReportFormat::Table);
        assert!(table.contains("0.9505"), "{table}");
        assert!(table.contains("0.9500"), "{table}");
        assert!(table.contains("0.9471"), "{table}");
        assert!(table.contains("332") && table.contains("48"));
    }

    #[test]
    fn json_round_trips_exactly() {
        let r = evaluate(&ConfusionMatrix::from_counts([[127, 361], [59, 453]]));
        let json = render_report(&r, ReportFormat::Json);
        assert_eq!(EvalReport::from_json(&json).unwrap(), r);
        let bumped = json.replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(EvalReport::from_json(&bumped).is_err());
    }

    #[test]
    fn fixed_formatting_rounds_half_up() {
        assert_eq!(format_fixed(0.94713656, 4), "0.9471");
        assert_eq!(format_fixed(0.95045702, 4), "0.9505");
        assert_eq!(format_fixed(0.0, 4), "0.0000");
        assert_eq!(format_fixed(0.125, 2), "0.13");
        assert_eq!(format_fixed(82.28125, 1), "82.3");
    }
}
