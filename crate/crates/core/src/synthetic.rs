//! Generated code-mixed style corpora for smoke tests and demos.
//!
//! Documents mix romanized Malayalam/Tamil, English and a little native
//! script. Each label draws a share of its tokens from its own cue pool and
//! the rest from a pool shared by both labels; a small fraction of cue
//! tokens is taken from the other label's pool so the task is not
//! trivially separable.

use crate::corpus::{Document, Label, LabeledCorpus};
use crate::rng::SeededRng;

const SHARED: &[&str] = &[
    "padam", "movie", "trailer", "ente", "njan", "bro", "chetta", "ningal", "scene", "song", "ithu",
    "enna", "da", "machan", "thala", "release", "fans", "kerala", "tamil", "ivide", "aanu", "alle",
    "pinne", "ippo", "eppo", "athu", "onnu", "ee", "director", "hero", "climax", "first", "day",
    "show", "teaser", "like", "comment", "share", "video", "ini", "inge", "ellam", "oru", "kaanan",
    "vannu", "poyi", "nammude", "avan", "aval", "epi", "bgm", "theatre", "pakka", "sollu", "paaru",
    "പടം", "ഇത്", "படம்", "இது", "the", "is", "and", "for", "this", "time",
];

const NOT_CUES: &[&str] = &[
    "nalla", "adipoli", "super", "kidilan", "poli", "love", "thanks", "best", "semma", "mass",
    "waiting", "congrats", "beautiful", "happy", "nanni", "vera", "level", "awesome", "blessed",
    "superb", "നല്ല", "சூப்பர்", "respect", "wow", "fantastic",
];

const OFF_CUES: &[&str] = &[
    "mosham", "waste", "chali", "pottan", "mandan", "fraud", "shame", "worst", "idiot", "boring",
    "flop", "kuthara", "thallu", "naanam", "dislike", "loser", "useless", "fake", "cheap",
    "nonsense", "മോശം", "மோசம்", "disgusting", "pathetic", "trash",
];

const DECOR: &[&str] = &["!!", "...", "😂", "👍", "🔥", "😡", "?", "#", "@user"];

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub n_docs: usize,
    /// Probability that a document is labeled OFF.
    pub off_rate: f64,
    /// Probability that a token comes from a label cue pool rather than the shared pool.
    pub cue_rate: f64,
    /// Probability that a cue token is drawn from the other label's pool.
    pub cross_rate: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_docs: 1000,
            off_rate: 0.3,
            cue_rate: 0.4,
            cross_rate: 0.1,
            min_tokens: 5,
            max_tokens: 14,
            seed: 2020,
        }
    }
}

fn pick<'a>(rng: &mut SeededRng, pool: &[&'a str]) -> &'a str {
    pool[rng.below(pool.len() as u64) as usize]
}

fn sample_text(rng: &mut SeededRng, label: Label, spec: &SyntheticSpec) -> String {
    let span = (spec.max_tokens - spec.min_tokens + 1) as u64;
    let len = spec.min_tokens + rng.below(span) as usize;
    let (own, other) = match label {
        Label::Not => (NOT_CUES, OFF_CUES),
        Label::Off => (OFF_CUES, NOT_CUES),
    };
    let mut words: Vec<String> = Vec::with_capacity(len + 1);
    for _ in 0..len {
        let word = if rng.unit() < spec.cue_rate {
            if rng.unit() < spec.cross_rate {
                pick(rng, other)
            } else {
                pick(rng, own)
            }
        } else {
            pick(rng, SHARED)
        };
        let mut word = word.to_string();
        // Romanized social-media spelling: stretched last letter, shouting.
        let roll = rng.unit();
        if roll < 0.05 {
            if let Some(last) = word.chars().last() {
                word.push(last);
                word.push(last);
            }
        } else if roll < 0.08 {
            word = word.to_uppercase();
        }
        words.push(word);
    }
    if rng.unit() < 0.4 {
        words.push(pick(rng, DECOR).to_string());
    }
    words.join(" ")
}

/// Generates a labeled corpus with ids `syn-00000`, `syn-00001`, ...
pub fn generate(spec: &SyntheticSpec) -> LabeledCorpus {
    assert!(spec.min_tokens >= 1 && spec.min_tokens <= spec.max_tokens);
    let mut rng = SeededRng::new(spec.seed);
    let docs = (0..spec.n_docs)
        .map(|i| {
            let label = if rng.unit() < spec.off_rate { Label::Off } else { Label::Not };
            let text = sample_text(&mut rng, label, spec);
            Document::new(format!("syn-{i:05}"), text, Some(label))
        })
        .collect();
    LabeledCorpus::from_docs(docs, format!("synthetic(seed={})", spec.seed)).expect("generated ids are unique")
}

/// Splits off the first `n_train` documents as training data and the rest as test data.
pub fn head_tail(corpus: &LabeledCorpus, n_train: usize) -> (LabeledCorpus, LabeledCorpus) {
    let (a, b) = corpus.docs().split_at(n_train.min(corpus.len()));
    (
        LabeledCorpus::from_docs(a.to_vec(), format!("{} [head]", corpus.provenance())).expect("unique ids"),
        LabeledCorpus::from_docs(b.to_vec(), format!("{} [tail]", corpus.provenance())).expect("unique ids"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_stats;

    #[test]
    fn deterministic_and_roughly_imbalanced() {
        let spec = SyntheticSpec::default();
        let a = generate(&spec);
        assert_eq!(a, generate(&spec));
        let stats = corpus_stats(&a).unwrap();
        assert_eq!(stats.total, 1000);
        let off = stats.percent(Label::Off);
        assert!((20.0..40.0).contains(&off), "{off}");
    }

    #[test]
    fn head_tail_partitions() {
        let corpus = generate(&SyntheticSpec {
            n_docs: 10,
            ..SyntheticSpec::default()
        });
        let (h, t) = head_tail(&corpus, 8);
        assert_eq!((h.len(), t.len()), (8, 2));
        assert_eq!(t.docs()[0].id, "syn-00008");
    }
}
