//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the code paths it is used to check: text is
//! normalized, tokenized and counted with separate naive routines, split
//! quotas use exact integer arithmetic, and metrics are recounted from the
//! raw label lists.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use codemix::corpus::Label;
use codemix::rng::SeededRng;

/// Characters the random-corpus generator draws from. Every cased letter
/// here lowercases to exactly one codepoint, so `to_lowercase` agrees with
/// simple case folding on this alphabet.
pub const ALPHABET: &[char] = &[
    'a', 'b', 'c', 'A', 'B', 'z', 'Z', '1', '7', ' ', ' ', '\t', '\n', '!', '-', '.', '😂', 'é', 'É', 'Σ',
    'σ', 'പ', 'ട', 'ം', 'ந', 'ல',
];

pub fn random_text(rng: &mut SeededRng, max_len: usize) -> String {
    let len = rng.below(max_len as u64 + 1) as usize;
    (0..len).map(|_| ALPHABET[rng.below(ALPHABET.len() as u64) as usize]).collect()
}

// ---------------------------------------------------------------- TF-IDF

pub fn oracle_normalize(text: &str, lowercase: bool) -> Vec<char> {
    let mut out: Vec<char> = Vec::new();
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        if lowercase {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Token boundaries for the oracle alphabet: letters and digits plus the
/// Malayalam anusvara, which is a spacing combining mark.
fn oracle_token_char(c: char, inside: bool) -> bool {
    c.is_alphanumeric() || (inside && c == 'ം')
}

pub fn oracle_tokens(chars: &[char]) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for &c in chars {
        if oracle_token_char(c, !cur.is_empty()) {
            cur.push(c);
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

/// Term counts for one document, keyed by (block, term) with block 0 for
/// characters and 1 for words.
pub fn oracle_counts(
    text: &str,
    lowercase: bool,
    char_range: Option<(usize, usize)>,
    word_range: Option<(usize, usize)>,
) -> BTreeMap<(u8, String), usize> {
    let chars = oracle_normalize(text, lowercase);
    let mut counts = BTreeMap::new();
    if let Some((lo, hi)) = char_range {
        for start in 0..chars.len() {
            for n in lo..=hi {
                if start + n <= chars.len() {
                    let term: String = chars[start..start + n].iter().collect();
                    *counts.entry((0, term)).or_insert(0) += 1;
                }
            }
        }
    }
    if let Some((lo, hi)) = word_range {
        let tokens = oracle_tokens(&chars);
        for start in 0..tokens.len() {
            for n in lo..=hi {
                if start + n <= tokens.len() {
                    let term = tokens[start..start + n].join(" ");
                    *counts.entry((1, term)).or_insert(0) += 1;
                }
            }
        }
    }
    counts
}

/// Dense tf-idf vectors over the oracle's own vocabulary, which is ordered
/// by (block, term) exactly like the column layout under test.
pub struct OracleTfidf {
    pub vocab: Vec<(u8, String)>,
    pub idf: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn oracle_tfidf(
    docs: &[String],
    lowercase: bool,
    char_range: Option<(usize, usize)>,
    word_range: Option<(usize, usize)>,
    min_df: usize,
) -> OracleTfidf {
    let per_doc: Vec<_> = docs
        .iter()
        .map(|d| oracle_counts(d, lowercase, char_range, word_range))
        .collect();
    let all_terms: BTreeSet<(u8, String)> = per_doc.iter().flat_map(|m| m.keys().cloned()).collect();
    let n = docs.len() as f64;
    let mut vocab = Vec::new();
    let mut idf = Vec::new();
    for term in all_terms {
        let df = per_doc.iter().filter(|m| m.contains_key(&term)).count();
        if df >= min_df {
            idf.push(((1.0 + n) / (1.0 + df as f64)).ln() + 1.0);
            vocab.push(term);
        }
    }
    let vectors = per_doc
        .iter()
        .map(|m| {
            let raw: Vec<f64> = vocab
                .iter()
                .zip(&idf)
                .map(|(t, w)| *m.get(t).unwrap_or(&0) as f64 * w)
                .collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                raw
            } else {
                raw.iter().map(|x| x / norm).collect()
            }
        })
        .collect();
    OracleTfidf { vocab, idf, vectors }
}

// ---------------------------------------------------------------- split

/// Training quota for `count` documents at fraction `percent / 100`:
/// the nearest integer to `count * percent / 100`, halves rounding up,
/// found by exhaustive search in exact integer arithmetic.
pub fn oracle_quota(percent: u64, count: u64) -> u64 {
    let target = count * percent; // scaled by 100
    let mut best = 0;
    let mut best_gap = u64::MAX;
    for q in 0..=count {
        let gap = (q * 100).abs_diff(target);
        if gap <= best_gap {
            best = q;
            best_gap = gap;
        }
    }
    best
}

// ---------------------------------------------------------------- metrics

pub struct NaiveScores {
    pub precision: [f64; 2],
    pub recall: [f64; 2],
    pub f1: [f64; 2],
    pub weighted: [f64; 3],
    pub accuracy: f64,
}

pub fn naive_scores(golds: &[Label], preds: &[Label]) -> NaiveScores {
    let labels = [Label::Not, Label::Off];
    let mut precision = [0.0; 2];
    let mut recall = [0.0; 2];
    let mut f1 = [0.0; 2];
    let mut support = [0usize; 2];
    for (k, &label) in labels.iter().enumerate() {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (&g, &p) in golds.iter().zip(preds) {
            if g == label && p == label {
                tp += 1;
            } else if g != label && p == label {
                fp += 1;
            } else if g == label && p != label {
                fn_ += 1;
            }
        }
        support[k] = tp + fn_;
        precision[k] = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        recall[k] = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
        f1[k] = if precision[k] + recall[k] > 0.0 {
            2.0 * precision[k] * recall[k] / (precision[k] + recall[k])
        } else {
            0.0
        };
    }
    let total = golds.len() as f64;
    let w = |v: &[f64; 2]| (support[0] as f64 * v[0] + support[1] as f64 * v[1]) / total;
    let correct = golds.iter().zip(preds).filter(|(g, p)| g == p).count();
    NaiveScores {
        precision,
        recall,
        f1,
        weighted: [w(&precision), w(&recall), w(&f1)],
        accuracy: correct as f64 / total,
    }
}

/// Expands a confusion matrix back into aligned gold/prediction lists.
pub fn expand_matrix(counts: [[u64; 2]; 2]) -> (Vec<Label>, Vec<Label>) {
    let labels = [Label::Not, Label::Off];
    let mut golds = Vec::new();
    let mut preds = Vec::new();
    for (g, row) in counts.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            for _ in 0..n {
                golds.push(labels[g]);
                preds.push(labels[p]);
            }
        }
    }
    (golds, preds)
}

// ---------------------------------------------------------------- svm

/// Whether some line through the origin strictly separates the points,
/// checked on a 0.1 degree grid of directions.
pub fn separable_through_origin(points: &[[f64; 2]], ys: &[i8]) -> bool {
    (0..3600).any(|k| {
        let theta = (k as f64) * std::f64::consts::PI / 1800.0;
        let (c, s) = (theta.cos(), theta.sin());
        points
            .iter()
            .zip(ys)
            .all(|(p, &y)| f64::from(y) * (c * p[0] + s * p[1]) > 0.0)
    })
}

/// Random 2-D points labeled by a hidden direction, each at least `margin`
/// from the separating line. Both labels are always present.
pub fn random_separable(rng: &mut SeededRng, max_points: usize, margin: f64) -> (Vec<[f64; 2]>, Vec<i8>) {
    loop {
        let n = 2 + rng.below(max_points as u64 - 1) as usize;
        let theta = rng.unit() * std::f64::consts::TAU;
        let dir = [theta.cos(), theta.sin()];
        let mut pts = Vec::new();
        let mut ys = Vec::new();
        while pts.len() < n {
            let p = [rng.unit() * 2.0 - 1.0, rng.unit() * 2.0 - 1.0];
            let s = dir[0] * p[0] + dir[1] * p[1];
            if s.abs() >= margin {
                pts.push(p);
                ys.push(if s > 0.0 { 1 } else { -1 });
            }
        }
        if ys.contains(&1) && ys.contains(&-1) {
            return (pts, ys);
        }
    }
}
