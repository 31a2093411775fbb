//! Prediction interchange TSV.
//!
//! Any classifier can be scored by the `evaluate` command as long as it
//! writes one row per document as `id<TAB>label[<TAB>score]`, where label is
//! `NOT` or `OFF` and score is a finite real. A leading header row whose
//! first column is `id` is optional on input and always written on output.
//! Ids use the same escaping as dataset files.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::corpus::{escape_field as escape, unescape_field as unescape, Label, LabeledCorpus};

#[derive(Debug, Error, PartialEq)]
pub enum InterchangeError {
    #[error("predictions are not valid UTF-8: {0}")]
    Encoding(String),
    #[error("line {line}: expected 2 or 3 columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: unknown label {value:?} (expected NOT or OFF)")]
    UnknownLabel { line: usize, value: String },
    #[error("line {line}: score {value:?} is not a finite number")]
    BadScore { line: usize, value: String },
    #[error("line {line}: empty id")]
    EmptyId { line: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: String,
    pub label: Label,
    pub score: Option<f64>,
}

pub fn write_predictions(rows: &[PredictionRow]) -> String {
    let with_score = rows.iter().any(|r| r.score.is_some());
    let mut out = String::from(if with_score { "id\tlabel\tscore\n" } else { "id\tlabel\n" });
    for row in rows {
        out.push_str(&escape(&row.id));
        out.push('\t');
        out.push_str(row.label.as_str());
        if with_score {
            out.push('\t');
            if let Some(score) = row.score {
                // Shortest representation that parses back to the same f64.
                out.push_str(&format!("{score:?}"));
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_predictions(bytes: &[u8]) -> Result<Vec<PredictionRow>, InterchangeError> {
    let text = std::str::from_utf8(bytes).map_err(|e| InterchangeError::Encoding(e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if i == 0 && fields[0] == "id" {
            continue;
        }
        if !(2..=3).contains(&fields.len()) {
            return Err(InterchangeError::ColumnCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let id = unescape(fields[0]);
        if id.is_empty() {
            return Err(InterchangeError::EmptyId { line: line_no });
        }
        let label = fields[1].parse::<Label>().map_err(|e| InterchangeError::UnknownLabel {
            line: line_no,
            value: e.0,
        })?;
        let score = match fields.get(2) {
            None | Some(&"") => None,
            Some(raw) => match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Some(v),
                _ => {
                    return Err(InterchangeError::BadScore {
                        line: line_no,
                        value: raw.to_string(),
                    })
                }
            },
        };
        rows.push(PredictionRow { id, label, score });
    }
    Ok(rows)
}

/// Problems found when lining predictions up with gold documents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JoinError {
    pub unlabeled_gold: Vec<String>,
    pub missing: Vec<String>,
    pub unknown: Vec<String>,
    pub duplicated: Vec<String>,
}

impl JoinError {
    fn is_empty(&self) -> bool {
        self.unlabeled_gold.is_empty() && self.missing.is_empty() && self.unknown.is_empty() && self.duplicated.is_empty()
    }
}

impl std::fmt::Display for JoinError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        let mut list = |what: &str, ids: &[String]| {
            if !ids.is_empty() {
                const SHOWN: usize = 20;
                let mut s = format!("{} {what}: {}", ids.len(), ids.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", "));
                if ids.len() > SHOWN {
                    s.push_str(", ...");
                }
                parts.push(s);
            }
        };
        list("gold document(s) without a label", &self.unlabeled_gold);
        list("gold id(s) without a prediction", &self.missing);
        list("predicted id(s) not in the gold file", &self.unknown);
        list("id(s) predicted more than once", &self.duplicated);
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for JoinError {}

/// Pairs every gold document with its prediction, in gold order.
///
/// Fails listing every offending id when the two sides do not cover exactly
/// the same id set.
pub fn join_predictions(gold: &LabeledCorpus, preds: &[PredictionRow]) -> Result<(Vec<Label>, Vec<Label>), JoinError> {
    let mut err = JoinError::default();
    let mut by_id: HashMap<&str, Label> = HashMap::with_capacity(preds.len());
    let mut dup_seen = HashSet::new();
    for row in preds {
        if by_id.insert(row.id.as_str(), row.label).is_some() && dup_seen.insert(row.id.as_str()) {
            err.duplicated.push(row.id.clone());
        }
    }
    let gold_ids: HashSet<&str> = gold.docs().iter().map(|d| d.id.as_str()).collect();
    let mut golds = Vec::with_capacity(gold.len());
    let mut predicted = Vec::with_capacity(gold.len());
    for doc in gold.docs() {
        match (doc.label, by_id.get(doc.id.as_str())) {
            (None, _) => err.unlabeled_gold.push(doc.id.clone()),
            (Some(_), None) => err.missing.push(doc.id.clone()),
            (Some(g), Some(&p)) => {
                golds.push(g);
                predicted.push(p);
            }
        }
    }
    let mut reported = HashSet::new();
    for row in preds {
        if !gold_ids.contains(row.id.as_str()) && reported.insert(row.id.as_str()) {
            err.unknown.push(row.id.clone());
        }
    }
    if err.is_empty() {
        Ok((golds, predicted))
    } else {
        Err(err)
    }
}
