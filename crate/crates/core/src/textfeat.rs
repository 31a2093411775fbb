//! Character and word n-gram TF-IDF features.
//!
//! Weighting is raw term count times smoothed inverse document frequency,
//! `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, followed by one L2
//! normalization of the whole document vector. With the `char+word`
//! analyzer the character block occupies columns `0..|char vocab|` and the
//! word block follows it.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_case_mapping::case_folded;
use unicode_normalization::char::is_combining_mark;

use crate::corpus::LabeledCorpus;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("invalid {what} n-gram range {min}..={max}: need 1 <= min <= max")]
    Range {
        what: &'static str,
        min: usize,
        max: usize,
    },
    #[error("min_df must be at least 1")]
    MinDf,
    #[error("cannot fit TF-IDF on an empty corpus")]
    EmptyCorpus,
    #[error("vocabulary is empty after applying min_df = {0}")]
    EmptyVocabulary(usize),
    #[error("malformed TF-IDF model: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Analyzer {
    #[serde(rename = "char")]
    Char,
    #[serde(rename = "word")]
    Word,
    #[serde(rename = "char+word")]
    CharWord,
}

impl Analyzer {
    pub fn as_str(self) -> &'static str {
        match self {
            Analyzer::Char => "char",
            Analyzer::Word => "word",
            Analyzer::CharWord => "char+word",
        }
    }

    fn blocks(self) -> &'static [BlockKind] {
        match self {
            Analyzer::Char => &[BlockKind::Char],
            Analyzer::Word => &[BlockKind::Word],
            Analyzer::CharWord => &[BlockKind::Char, BlockKind::Word],
        }
    }
}

impl fmt::Display for Analyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Analyzer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" => Ok(Analyzer::Char),
            "word" => Ok(Analyzer::Word),
            "char+word" | "char_word" | "union" => Ok(Analyzer::CharWord),
            other => Err(format!("unknown analyzer {other:?} (expected char, word or char+word)")),
        }
    }
}

/// Inclusive n-gram size range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramRange {
    pub min: usize,
    pub max: usize,
}

impl NgramRange {
    pub const fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    fn is_valid(self) -> bool {
        1 <= self.min && self.min <= self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub analyzer: Analyzer,
    pub char_range: NgramRange,
    pub word_range: NgramRange,
    pub min_df: usize,
    pub lowercase: bool,
}

impl Default for FeatureConfig {
    /// Character 1-6 grams together with word 1-3 grams.
    fn default() -> Self {
        Self {
            analyzer: Analyzer::CharWord,
            char_range: NgramRange::new(1, 6),
            word_range: NgramRange::new(1, 3),
            min_df: 1,
            lowercase: true,
        }
    }
}

impl FeatureConfig {
    pub fn with_analyzer(analyzer: Analyzer) -> Self {
        Self {
            analyzer,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        for (what, range) in [("char", self.char_range), ("word", self.word_range)] {
            if !range.is_valid() {
                return Err(FeatureError::Range {
                    what,
                    min: range.min,
                    max: range.max,
                });
            }
        }
        if self.min_df == 0 {
            return Err(FeatureError::MinDf);
        }
        Ok(())
    }
}

/// Simple case folding (when enabled), whitespace runs collapsed to one
/// space, ends trimmed.
pub fn normalize(text: &str, config: &FeatureConfig) -> String {
    let folded: String = if config.lowercase {
        text.chars()
            .map(|c| case_folded(c).and_then(|cp| char::from_u32(cp.get())).unwrap_or(c))
            .collect()
    } else {
        text.to_string()
    };
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Zero-width joiner and non-joiner, which Indic scripts use inside words.
fn is_joiner(c: char) -> bool {
    matches!(c, '\u{200c}' | '\u{200d}')
}

/// Splits normalized text into maximal runs of letters and digits.
///
/// Combining marks and zero-width (non-)joiners continue a run that has
/// already started, so vowel signs and viramas in Brahmic scripts stay
/// inside their word.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, c) in text.char_indices() {
        let continues = c.is_alphanumeric() || (start.is_some() && (is_combining_mark(c) || is_joiner(c)));
        match (continues, start) {
            (true, None) => start = Some(pos),
            (false, Some(s)) => {
                tokens.push(&text[s..pos]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(&text[s..]);
    }
    tokens
}

/// All contiguous codepoint n-grams of the whole string for each size in
/// `range`, spaces included.
pub fn char_ngrams(text: &str, range: NgramRange) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    for n in range.min..=range.max {
        if n > chars.len() {
            break;
        }
        out.extend(chars.windows(n).map(|w| w.iter().collect::<String>()));
    }
    out
}

/// Contiguous token n-grams joined by single spaces.
pub fn word_ngrams<S: AsRef<str>>(tokens: &[S], range: NgramRange) -> Vec<String> {
    let mut out = Vec::new();
    for n in range.min..=range.max {
        if n > tokens.len() {
            break;
        }
        out.extend(tokens.windows(n).map(|w| {
            w.iter().map(AsRef::as_ref).collect::<Vec<&str>>().join(" ")
        }));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Char,
    Word,
}

impl BlockKind {
    fn terms(self, normalized: &str, config: &FeatureConfig) -> Vec<String> {
        match self {
            BlockKind::Char => char_ngrams(normalized, config.char_range),
            BlockKind::Word => word_ngrams(&tokenize(normalized), config.word_range),
        }
    }
}

/// One contiguous block of feature columns with its own vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermBlock {
    pub kind: BlockKind,
    /// Sorted lexicographically; position is the column within the block.
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
}

impl TermBlock {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Serialized shape of a [`TfidfModel`]; the term lookup is rebuilt on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TfidfModelRepr {
    config: FeatureConfig,
    n_docs: usize,
    blocks: Vec<TermBlock>,
}

/// A fitted vocabulary with idf weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TfidfModelRepr", into = "TfidfModelRepr")]
pub struct TfidfModel {
    config: FeatureConfig,
    n_docs: usize,
    blocks: Vec<TermBlock>,
    /// Column offset of each block.
    offsets: Vec<usize>,
    lookup: Vec<HashMap<String, usize>>,
}

impl From<TfidfModel> for TfidfModelRepr {
    fn from(m: TfidfModel) -> Self {
        Self {
            config: m.config,
            n_docs: m.n_docs,
            blocks: m.blocks,
        }
    }
}

impl TryFrom<TfidfModelRepr> for TfidfModel {
    type Error = FeatureError;

    fn try_from(repr: TfidfModelRepr) -> Result<Self, Self::Error> {
        repr.config.validate()?;
        let expected: Vec<BlockKind> = repr.config.analyzer.blocks().to_vec();
        let found: Vec<BlockKind> = repr.blocks.iter().map(|b| b.kind).collect();
        if expected != found {
            return Err(FeatureError::Malformed(format!(
                "analyzer {} needs blocks {expected:?}, found {found:?}",
                repr.config.analyzer
            )));
        }
        for block in &repr.blocks {
            if block.terms.len() != block.idf.len() {
                return Err(FeatureError::Malformed(format!(
                    "{:?} block has {} terms but {} idf weights",
                    block.kind,
                    block.terms.len(),
                    block.idf.len()
                )));
            }
            if block.terms.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FeatureError::Malformed(format!(
                    "{:?} block terms are not strictly sorted",
                    block.kind
                )));
            }
            if let Some(bad) = block.idf.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(FeatureError::Malformed(format!("non-positive idf weight {bad}")));
            }
        }
        Ok(Self::assemble(repr.config, repr.n_docs, repr.blocks))
    }
}

fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

impl TfidfModel {
    fn assemble(config: FeatureConfig, n_docs: usize, blocks: Vec<TermBlock>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut next = 0;
        for block in &blocks {
            offsets.push(next);
            next += block.len();
        }
        let lookup = blocks
            .iter()
            .map(|b| b.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect())
            .collect();
        Self {
            config,
            n_docs,
            blocks,
            offsets,
            lookup,
        }
    }

    /// Fits vocabulary and idf weights on `texts`.
    pub fn fit<'a, I>(texts: I, config: &FeatureConfig) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        config.validate()?;
        let normalized: Vec<String> = texts.into_iter().map(|t| normalize(t, config)).collect();
        if normalized.is_empty() {
            return Err(FeatureError::EmptyCorpus);
        }
        let n_docs = normalized.len();

        let mut blocks = Vec::new();
        for &kind in config.analyzer.blocks() {
            // BTreeMap keeps terms in byte order, which for UTF-8 is codepoint order.
            let mut df: BTreeMap<String, usize> = BTreeMap::new();
            for doc in &normalized {
                let distinct: HashSet<String> = kind.terms(doc, config).into_iter().collect();
                for term in distinct {
                    *df.entry(term).or_insert(0) += 1;
                }
            }
            let (terms, idf) = df
                .into_iter()
                .filter(|&(_, count)| count >= config.min_df)
                .map(|(term, count)| (term, smoothed_idf(n_docs, count)))
                .unzip();
            blocks.push(TermBlock { kind, terms, idf });
        }
        if blocks.iter().all(TermBlock::is_empty) {
            return Err(FeatureError::EmptyVocabulary(config.min_df));
        }
        Ok(Self::assemble(config.clone(), n_docs, blocks))
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn blocks(&self) -> &[TermBlock] {
        &self.blocks
    }

    /// Total number of feature columns.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(TermBlock::len).sum()
    }

    /// Global column of `term` in the block of the given kind.
    pub fn column(&self, kind: BlockKind, term: &str) -> Option<usize> {
        let b = self.blocks.iter().position(|b| b.kind == kind)?;
        self.lookup[b].get(term).map(|&i| self.offsets[b] + i)
    }

    /// Idf of a global column.
    pub fn idf(&self, column: usize) -> Option<f64> {
        let b = self.offsets.iter().rposition(|&o| o <= column)?;
        self.blocks[b].idf.get(column - self.offsets[b]).copied()
    }

    /// Term at a global column.
    pub fn term(&self, column: usize) -> Option<(BlockKind, &str)> {
        let b = self.offsets.iter().rposition(|&o| o <= column)?;
        let block = &self.blocks[b];
        block.terms.get(column - self.offsets[b]).map(|t| (block.kind, t.as_str()))
    }

    /// L2-normalized tf-idf vector of `text`. Out-of-vocabulary terms are
    /// dropped; a document with no known terms maps to the zero vector.
    pub fn transform(&self, text: &str) -> SparseVector {
        let normalized = normalize(text, &self.config);
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for (b, block) in self.blocks.iter().enumerate() {
            for term in block.kind.terms(&normalized, &self.config) {
                if let Some(&local) = self.lookup[b].get(&term) {
                    *counts.entry(self.offsets[b] + local).or_insert(0.0) += 1.0;
                }
            }
        }
        let mut entries: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(col, tf)| (col, tf * self.idf(col).unwrap_or(0.0)))
            .collect();
        entries.sort_unstable_by_key(|&(col, _)| col);
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut entries {
                *w /= norm;
            }
        }
        SparseVector {
            dim: self.dim(),
            entries,
        }
    }

    pub fn transform_all<'a, I>(&self, texts: I) -> Vec<SparseVector>
    where
        I: IntoIterator<Item = &'a str>,
    {
        texts.into_iter().map(|t| self.transform(t)).collect()
    }
}

/// Fits a TF-IDF model on every document text of `corpus`.
pub fn fit_tfidf(corpus: &LabeledCorpus, config: &FeatureConfig) -> Result<TfidfModel, FeatureError> {
    TfidfModel::fit(corpus.texts(), config)
}

#[derive(Debug, Error, PartialEq)]
pub enum SparseError {
    #[error("index {index} out of range for dimension {dim}")]
    OutOfRange { index: usize, dim: usize },
    #[error("indices must be strictly ascending (at position {0})")]
    Unordered(usize),
    #[error("weight at index {0} is zero or not finite")]
    BadWeight(usize),
}

/// Sparse real vector with strictly ascending indices and non-zero weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self, SparseError> {
        for (pos, &(index, weight)) in entries.iter().enumerate() {
            if index >= dim {
                return Err(SparseError::OutOfRange { index, dim });
            }
            if pos > 0 && entries[pos - 1].0 >= index {
                return Err(SparseError::Unordered(pos));
            }
            if weight == 0.0 || !weight.is_finite() {
                return Err(SparseError::BadWeight(index));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds from a dense slice, dropping exact zeros.
    pub fn from_dense(values: &[f64]) -> Self {
        Self {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, *v))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    /// Dot product with a dense vector of at least `dim` entries.
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, w)| w * dense[i]).sum()
    }

    /// `dense += scale * self`.
    pub fn add_scaled_to(&self, scale: f64, dense: &mut [f64]) {
        for &(i, w) in &self.entries {
            dense[i] += scale * w;
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, w) in &self.entries {
            out[i] = w;
        }
        out
    }
}
