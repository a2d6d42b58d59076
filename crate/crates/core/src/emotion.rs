//! Reader-emotion classification of short texts.
//!
//! Multinomial Naive Bayes with additive smoothing, where every occurrence
//! of an emotion-lexicon token is counted `boost` times during training.
//! Classification uses the plain token counts of the input text; tokens
//! never seen in training are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io;
use crate::{Error, Result};

pub const DEFAULT_BOOST: f64 = 2.0;
pub const DEFAULT_SMOOTHING: f64 = 1.0;

/// The four reader-emotion classes. Declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Angry,
    Funny,
    Surprised,
    Moving,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 4] = [
        EmotionLabel::Angry,
        EmotionLabel::Funny,
        EmotionLabel::Surprised,
        EmotionLabel::Moving,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Angry => "angry",
            EmotionLabel::Funny => "funny",
            EmotionLabel::Surprised => "surprised",
            EmotionLabel::Moving => "moving",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EmotionLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::validation("label", format!("unknown emotion label {s:?}")))
    }
}

/// Lowercased runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledText {
    pub text: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionModel {
    /// Class priors in [`EmotionLabel::ALL`] order.
    pub priors: [f64; 4],
    /// Per-token smoothed log-likelihood for each class.
    pub log_likelihood: BTreeMap<String, [f64; 4]>,
    /// SHA-256 over the sorted lexicon, one token per line.
    pub lexicon_hash: String,
    pub boost: f64,
    pub smoothing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: EmotionLabel,
    pub posterior: [f64; 4],
}

pub fn lexicon_hash(lexicon: &BTreeSet<String>) -> String {
    let mut h = Sha256::new();
    for tok in lexicon {
        h.update(tok.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Weighted token counts per class; lexicon tokens count `boost` times.
fn weighted_counts(
    docs: &[(EmotionLabel, Vec<String>)],
    lexicon: &BTreeSet<String>,
    boost: f64,
) -> (BTreeMap<String, [f64; 4]>, [usize; 4]) {
    let mut counts: BTreeMap<String, [f64; 4]> = BTreeMap::new();
    let mut docs_per_class = [0usize; 4];
    for (label, tokens) in docs {
        docs_per_class[label.index()] += 1;
        for tok in tokens {
            let w = if lexicon.contains(tok) { boost } else { 1.0 };
            counts.entry(tok.clone()).or_insert([0.0; 4])[label.index()] += w;
        }
    }
    (counts, docs_per_class)
}

pub fn train_emotion_model(
    corpus: &[LabeledText],
    lexicon: &BTreeSet<String>,
    boost: f64,
    smoothing: f64,
) -> Result<EmotionModel> {
    if corpus.is_empty() {
        return Err(Error::validation("corpus", "empty training corpus"));
    }
    if !(boost >= 1.0) {
        return Err(Error::validation("boost", format!("boost {boost} must be >= 1")));
    }
    if !(smoothing > 0.0) {
        return Err(Error::validation("smoothing", format!("smoothing {smoothing} must be > 0")));
    }
    let docs = corpus
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let label = d
                .label
                .parse::<EmotionLabel>()
                .map_err(|_| Error::validation(format!("corpus[{i}].label"), format!("unknown emotion label {:?}", d.label)))?;
            Ok((label, tokenize(&d.text)))
        })
        .collect::<Result<Vec<_>>>()?;

    let (counts, docs_per_class) = weighted_counts(&docs, lexicon, boost);
    let n = docs.len() as f64;
    let priors = docs_per_class.map(|c| c as f64 / n);

    let vocab = counts.len() as f64;
    let mut totals = [0.0; 4];
    for c in counts.values() {
        for k in 0..4 {
            totals[k] += c[k];
        }
    }
    let log_likelihood = counts
        .into_iter()
        .map(|(tok, c)| {
            let mut ll = [0.0; 4];
            for k in 0..4 {
                ll[k] = ((c[k] + smoothing) / (totals[k] + smoothing * vocab)).ln();
            }
            (tok, ll)
        })
        .collect();

    Ok(EmotionModel {
        priors,
        log_likelihood,
        lexicon_hash: lexicon_hash(lexicon),
        boost,
        smoothing,
    })
}

impl EmotionModel {
    pub fn classify_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Classification {
        let mut log_post = [0.0f64; 4];
        for k in 0..4 {
            log_post[k] = if self.priors[k] > 0.0 {
                self.priors[k].ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        for tok in tokens {
            if let Some(ll) = self.log_likelihood.get(tok.as_ref()) {
                for k in 0..4 {
                    log_post[k] += ll[k];
                }
            }
        }
        let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut posterior = log_post.map(|l| (l - max).exp());
        let z: f64 = posterior.iter().sum();
        for p in &mut posterior {
            *p /= z;
        }
        let mut best = 0;
        for k in 1..4 {
            if log_post[k] > log_post[best] {
                best = k;
            }
        }
        Classification {
            label: EmotionLabel::ALL[best],
            posterior,
        }
    }

    pub fn classify(&self, text: &str) -> Classification {
        self.classify_tokens(&tokenize(text))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, &io::to_pretty_json(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: EmotionModel = io::read_json(path)?;
        let sum: f64 = model.priors.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::validation("priors", format!("priors sum to {sum}, not 1")));
        }
        Ok(model)
    }
}

/// Counts of predicted labels in [`EmotionLabel::ALL`] order.
pub fn emotion_histogram<S: AsRef<str>>(model: &EmotionModel, texts: &[S]) -> [usize; 4] {
    let mut hist = [0usize; 4];
    for t in texts {
        hist[model.classify(t.as_ref()).label.index()] += 1;
    }
    hist
}

/// Index of the largest count, ties to the earlier label.
pub fn top_emotion(hist: &[usize; 4]) -> Option<EmotionLabel> {
    let total: usize = hist.iter().sum();
    if total == 0 {
        return None;
    }
    let mut best = 0;
    for k in 1..4 {
        if hist[k] > hist[best] {
            best = k;
        }
    }
    Some(EmotionLabel::ALL[best])
}

pub fn read_corpus(path: &Path) -> Result<Vec<LabeledText>> {
    io::read_jsonl(path)
}

/// One token per line; blank lines and surrounding whitespace are ignored.
pub fn read_lexicon(path: &Path) -> Result<BTreeSet<String>> {
    Ok(parse_lexicon(&io::read_to_string(path)?))
}

pub fn parse_lexicon(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}
