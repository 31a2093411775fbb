//! Labeled datasets: TSV ingestion, class statistics and stratified splits.
//!
//! The on-disk format is a UTF-8 TSV file with a header row, either
//! `id<TAB>text<TAB>label` (gold data) or `id<TAB>text` (unlabeled data).
//! Tabs, newlines, carriage returns and backslashes inside a field are
//! written as `\t`, `\n`, `\r` and `\\`; parsing reverses the escapes so
//! the text survives a write/read cycle unchanged.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::SeededRng;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
    #[error("missing header row")]
    MissingHeader,
    #[error("line {line}: unrecognised header {found:?}; expected `id<TAB>text[<TAB>label]`")]
    BadHeader { line: usize, found: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: empty document id")]
    EmptyId { line: usize },
    #[error("line {line}: duplicate document id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: unknown label {value:?} (expected NOT or OFF)")]
    UnknownLabel { line: usize, value: String },
    #[error("document {id:?} has no label")]
    Unlabeled { id: String },
    #[error("corpus is empty")]
    Empty,
    #[error("label {label} has {count} document(s); at least 2 are needed to split")]
    TooFewForSplit { label: Label, count: usize },
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    Fraction(f64),
}

/// Gold label of the binary task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Not offensive.
    #[serde(rename = "NOT")]
    Not,
    /// Offensive.
    #[serde(rename = "OFF")]
    Off,
}

impl Label {
    /// Fixed label order used by tables and confusion matrices.
    pub const ALL: [Label; 2] = [Label::Not, Label::Off];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Not => "NOT",
            Label::Off => "OFF",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::Not => 0,
            Label::Off => 1,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Not => Label::Off,
            Label::Off => Label::Not,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseLabelError(pub String);

impl fmt::Display for ParseLabelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown label {:?} (expected NOT or OFF)", self.0)
    }
}

impl std::error::Error for ParseLabelError {}

impl FromStr for Label {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NOT" => Ok(Label::Not),
            "OFF" => Ok(Label::Off),
            other => Err(ParseLabelError(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label,
        }
    }
}

/// Ordered documents plus a description of where they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    docs: Vec<Document>,
    provenance: String,
}

impl LabeledCorpus {
    /// Builds a corpus from in-memory documents, enforcing non-empty unique ids.
    pub fn from_docs(docs: Vec<Document>, provenance: impl Into<String>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if doc.id.is_empty() {
                return Err(CorpusError::EmptyId { line: i + 1 });
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    line: i + 1,
                    id: doc.id.clone(),
                });
            }
        }
        Ok(Self {
            docs,
            provenance: provenance.into(),
        })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.text.as_str())
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.docs.iter().all(|d| d.label.is_some())
    }

    /// Gold labels in document order; fails on the first unlabeled document.
    pub fn labels(&self) -> Result<Vec<Label>, CorpusError> {
        self.docs
            .iter()
            .map(|d| {
                d.label.ok_or_else(|| CorpusError::Unlabeled { id: d.id.clone() })
            })
            .collect()
    }

    /// Writes the corpus back out in the TSV format accepted by [`parse_dataset`].
    /// A label column is emitted when any document carries a label.
    pub fn to_tsv(&self) -> String {
        let labeled = self.docs.iter().any(|d| d.label.is_some());
        let mut out = String::from(if labeled { "id\ttext\tlabel\n" } else { "id\ttext\n" });
        for doc in &self.docs {
            out.push_str(&escape_field(&doc.id));
            out.push('\t');
            out.push_str(&escape_field(&doc.text));
            if labeled {
                out.push('\t');
                if let Some(label) = doc.label {
                    out.push_str(label.as_str());
                }
            }
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical TSV serialization, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_tsv().as_bytes()))
    }
}

/// Per-label counts for a fully labeled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    /// `(label, count, percentage)` in [`Label::ALL`] order; percentages are
    /// rounded half-up to one decimal.
    pub rows: Vec<ClassCount>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub label: Label,
    pub count: usize,
    pub percent: f64,
}

impl ClassCounts {
    pub fn count(&self, label: Label) -> usize {
        self.rows[label.index()].count
    }

    pub fn percent(&self, label: Label) -> f64 {
        self.rows[label.index()].percent
    }

    /// Aligned text table with label, count and percentage columns.
    pub fn render_table(&self) -> String {
        let mut lines = vec![("Label".to_string(), "Count".to_string(), "Percent".to_string())];
        for row in &self.rows {
            lines.push((
                row.label.to_string(),
                row.count.to_string(),
                format!("{:.1}%", row.percent),
            ));
        }
        lines.push(("Total".into(), self.total.to_string(), "100.0%".into()));

        let w0 = lines.iter().map(|l| l.0.len()).max().unwrap_or(0);
        let w1 = lines.iter().map(|l| l.1.len()).max().unwrap_or(0);
        let w2 = lines.iter().map(|l| l.2.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (a, b, c) in &lines {
            out.push_str(&format!("{a:<w0$}  {b:>w1$}  {c:>w2$}\n"));
        }
        out
    }
}

pub(crate) fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Reverses [`escape_field`]. Unknown escapes are kept verbatim.
pub(crate) fn unescape_field(s: &str) -> String {
    if !s.contains('\\') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Splits input into lines, stripping `\n` or `\r\n` terminators. Line
/// numbers reported in errors are 1-based and count the header.
fn split_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l))
}

/// Parses a TSV dataset.
pub fn parse_dataset(bytes: &[u8], provenance: impl Into<String>) -> Result<LabeledCorpus, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::Encoding(e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = split_lines(text);

    let (_, header) = lines.next().ok_or(CorpusError::MissingHeader)?;
    let columns = match header.split('\t').collect::<Vec<_>>().as_slice() {
        ["id", "text"] => 2,
        ["id", "text", "label"] => 3,
        _ => {
            return Err(CorpusError::BadHeader {
                line: 1,
                found: header.to_string(),
            })
        }
    };

    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != columns {
            return Err(CorpusError::ColumnCount {
                line,
                expected: columns,
                found: fields.len(),
            });
        }
        let id = unescape_field(fields[0]);
        if id.is_empty() {
            return Err(CorpusError::EmptyId { line });
        }
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { line, id });
        }
        let label = match fields.get(2) {
            None | Some(&"") => None,
            Some(raw) => Some(raw.parse::<Label>().map_err(|e| CorpusError::UnknownLabel {
                line,
                value: e.0,
            })?),
        };
        docs.push(Document {
            id,
            text: unescape_field(fields[1]),
            label,
        });
    }

    Ok(LabeledCorpus {
        docs,
        provenance: provenance.into(),
    })
}

/// Round half-up to one decimal place.
fn round1(x: f64) -> f64 {
    (x * 10.0 + 0.5).floor() / 10.0
}

/// Counts and percentages per label.
pub fn corpus_stats(corpus: &LabeledCorpus) -> Result<ClassCounts, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut counts = [0usize; 2];
    for label in corpus.labels()? {
        counts[label.index()] += 1;
    }
    let total = corpus.len();
    let rows = Label::ALL
        .iter()
        .map(|&label| {
            let count = counts[label.index()];
            ClassCount {
                label,
                count,
                percent: round1(100.0 * count as f64 / total as f64),
            }
        })
        .collect();
    Ok(ClassCounts { rows, total })
}

/// Number of documents of a label that go to the training side:
/// `round_half_up(fraction * count)`.
///
/// A relative slack of 1e-9 absorbs binary representation error so that
/// decimal fractions such as 0.85 × 10 = 8.5 round up as written.
pub fn train_quota(fraction: f64, count: usize) -> usize {
    let exact = fraction * count as f64;
    let quota = (exact + 0.5 + 1e-9 * exact.max(1.0)).floor() as usize;
    quota.min(count)
}

/// Seeded stratified split into `(train, dev)`.
///
/// Labels are processed in [`Label::ALL`] order with one generator seeded
/// from `seed`. For each label the positions of its documents (in corpus
/// order) are shuffled with Fisher-Yates and the first
/// [`train_quota`] of them go to training. Both outputs keep the original
/// corpus order.
pub fn stratified_split(
    corpus: &LabeledCorpus,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::Fraction(train_fraction));
    }
    let labels = corpus.labels()?;

    let mut by_label: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, label) in labels.iter().enumerate() {
        by_label[label.index()].push(i);
    }
    for label in Label::ALL {
        let count = by_label[label.index()].len();
        if count < 2 {
            return Err(CorpusError::TooFewForSplit { label, count });
        }
    }

    let mut rng = SeededRng::new(seed);
    let mut to_train = vec![false; corpus.len()];
    for label in Label::ALL {
        let positions = &mut by_label[label.index()];
        rng.shuffle(positions);
        let quota = train_quota(train_fraction, positions.len());
        for &pos in &positions[..quota] {
            to_train[pos] = true;
        }
    }

    let (mut train, mut dev) = (Vec::new(), Vec::new());
    for (doc, in_train) in corpus.docs.iter().zip(to_train) {
        if in_train {
            train.push(doc.clone());
        } else {
            dev.push(doc.clone());
        }
    }
    let name = |part: &str| format!("{} [{part} {train_fraction} seed={seed}]", corpus.provenance);
    Ok((
        LabeledCorpus {
            docs: train,
            provenance: name("train"),
        },
        LabeledCorpus {
            docs: dev,
            provenance: name("dev"),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced(n_not: usize, n_off: usize) -> LabeledCorpus {
        let mut docs = Vec::new();
        for i in 0..n_not {
            docs.push(Document::new(format!("n{i}"), format!("nalla padam {i}"), Some(Label::Not)));
        }
        for i in 0..n_off {
            docs.push(Document::new(format!("o{i}"), format!("mosham {i}"), Some(Label::Off)));
        }
        LabeledCorpus::from_docs(docs, "test").unwrap()
    }

    #[test]
    fn parses_two_labeled_rows() {
        let tsv = "id\ttext\tlabel\n1\tnalla padam\tNOT\n2\tworst movie\tOFF\n";
        let corpus = parse_dataset(tsv.as_bytes(), "mem").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.docs()[0].label, Some(Label::Not));
        assert_eq!(corpus.docs()[1].label, Some(Label::Off));
        assert_eq!(corpus.docs()[1].text, "worst movie");
    }

    #[test]
    fn unknown_label_names_line_and_value() {
        let tsv = "id\ttext\tlabel\n1\tok\tNOT\n2\thmm\tMAYBE\n";
        let err = parse_dataset(tsv.as_bytes(), "mem").unwrap_err();
        assert_eq!(
            err,
            CorpusError::UnknownLabel {
                line: 3,
                value: "MAYBE".into()
            }
        );
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("MAYBE"), "{msg}");
    }

    #[test]
    fn wrong_column_count_reports_line() {
        let tsv = "id\ttext\tlabel\n1\tok\n";
        assert_eq!(
            parse_dataset(tsv.as_bytes(), "mem").unwrap_err(),
            CorpusError::ColumnCount {
                line: 2,
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn duplicate_id_rejected() {
        let tsv = "id\ttext\n7\ta\n7\tb\n";
        assert!(matches!(
            parse_dataset(tsv.as_bytes(), "mem"),
            Err(CorpusError::DuplicateId { line: 3, .. })
        ));
    }

    #[test]
    fn header_required() {
        assert_eq!(parse_dataset(b"", "mem").unwrap_err(), CorpusError::MissingHeader);
        assert!(matches!(
            parse_dataset(b"1\tx\tNOT\n", "mem"),
            Err(CorpusError::BadHeader { .. })
        ));
    }

    #[test]
    fn unlabeled_file_and_crlf() {
        let tsv = "id\ttext\r\na\tpadam 👍\r\nb\tപടം Super\r\n";
        let corpus = parse_dataset(tsv.as_bytes(), "mem").unwrap();
        assert_eq!(corpus.docs()[1].text, "പടം Super");
        assert!(corpus.docs().iter().all(|d| d.label.is_none()));
        assert!(!corpus.is_fully_labeled());
    }

    #[test]
    fn escapes_round_trip() {
        let doc = Document::new("x\t1", "line one\nline\ttwo \\n literal\r", Some(Label::Off));
        let corpus = LabeledCorpus::from_docs(vec![doc.clone()], "mem").unwrap();
        let tsv = corpus.to_tsv();
        assert_eq!(tsv.lines().count(), 2);
        let back = parse_dataset(tsv.as_bytes(), "mem").unwrap();
        assert_eq!(back.docs()[0], doc);
    }

    #[test]
    fn unknown_escape_kept_verbatim() {
        assert_eq!(unescape_field(r"a\qb\"), r"a\qb\");
    }

    #[test]
    fn invalid_utf8_rejected() {
        assert!(matches!(
            parse_dataset(b"id\ttext\n1\t\xff\n", "mem"),
            Err(CorpusError::Encoding(_))
        ));
    }

    #[test]
    fn stats_balanced() {
        let stats = corpus_stats(&balanced(10, 10)).unwrap();
        assert_eq!(stats.total, 20);
        assert_eq!(stats.percent(Label::Not), 50.0);
        assert_eq!(stats.percent(Label::Off), 50.0);
    }

    #[test]
    fn stats_task_one_train_proportions() {
        let stats = corpus_stats(&balanced(2633, 567)).unwrap();
        assert_eq!(stats.total, 3200);
        assert_eq!(stats.count(Label::Not), 2633);
        assert_eq!(stats.percent(Label::Not), 82.3);
        assert_eq!(stats.percent(Label::Off), 17.7);
        let table = stats.render_table();
        assert!(table.contains("82.3%") && table.contains("3200"), "{table}");
    }

    #[test]
    fn stats_errors() {
        let empty = LabeledCorpus::from_docs(vec![], "e").unwrap();
        assert_eq!(corpus_stats(&empty).unwrap_err(), CorpusError::Empty);
        let partial = LabeledCorpus::from_docs(
            vec![Document::new("a", "x", Some(Label::Not)), Document::new("b", "y", None)],
            "p",
        )
        .unwrap();
        assert!(matches!(corpus_stats(&partial), Err(CorpusError::Unlabeled { .. })));
    }

    #[test]
    fn quota_rounds_half_up() {
        assert_eq!(train_quota(0.85, 20), 17);
        assert_eq!(train_quota(0.85, 10), 9);
        assert_eq!(train_quota(0.5, 3), 2);
        assert_eq!(train_quota(0.85, 60), 51);
        assert_eq!(train_quota(0.85, 40), 34);
        assert_eq!(train_quota(0.99, 2), 2);
    }

    #[test]
    fn split_forty_balanced() {
        let (train, dev) = stratified_split(&balanced(20, 20), 0.85, 42).unwrap();
        let t = corpus_stats(&train).unwrap();
        let d = corpus_stats(&dev).unwrap();
        assert_eq!((t.count(Label::Not), t.count(Label::Off)), (17, 17));
        assert_eq!((d.count(Label::Not), d.count(Label::Off)), (3, 3));
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let corpus = balanced(30, 25);
        let a = stratified_split(&corpus, 0.85, 9).unwrap();
        let b = stratified_split(&corpus, 0.85, 9).unwrap();
        assert_eq!(a.0.to_tsv(), b.0.to_tsv());
        assert_eq!(a.1.to_tsv(), b.1.to_tsv());
        let c = stratified_split(&corpus, 0.85, 10).unwrap();
        assert_ne!(a.1.to_tsv(), c.1.to_tsv());
    }

    #[test]
    fn split_errors() {
        assert_eq!(
            stratified_split(&balanced(5, 1), 0.85, 0).unwrap_err(),
            CorpusError::TooFewForSplit {
                label: Label::Off,
                count: 1
            }
        );
        for bad in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(
                stratified_split(&balanced(5, 5), bad, 0),
                Err(CorpusError::Fraction(_))
            ));
        }
    }
}
