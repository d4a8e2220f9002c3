//! Topic quality: PMI and UMass coherence over document co-occurrence, and
//! held-out per-word log-likelihood.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lda::{LdaError, TopicModel, TopicTopWords};
use crate::vectorize::{BowDocument, Vocabulary};

/// Stands in for a zero joint probability inside logarithms.
pub const EPSILON: f64 = 1e-12;

fn smoothed(joint: f64) -> f64 {
    if joint > 0.0 {
        joint
    } else {
        EPSILON
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("co-occurrence statistics need at least one document")]
    EmptyCorpus,
    #[error("token `{0}` never occurs in the reference corpus")]
    UnknownToken(String),
    #[error("coherence needs at least 2 top words, got {0}")]
    TooFewWords(usize),
    #[error("held-out set has no in-vocabulary tokens")]
    ZeroTokens,
    #[error("sliding window must hold at least 2 tokens")]
    BadWindow,
    #[error(transparent)]
    Model(#[from] LdaError),
}

/// What counts as co-occurring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum Window {
    /// Anywhere in the same document.
    #[default]
    Document,
    /// Within the same run of `size` consecutive tokens; every window is one
    /// pseudo-document.
    Sliding(usize),
}

/// Document frequencies and on-demand joint frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceStats {
    postings: BTreeMap<String, Vec<u32>>,
    num_docs: u32,
}

impl CooccurrenceStats {
    pub fn build<S: AsRef<str>>(token_docs: &[Vec<S>], window: Window) -> Result<Self, EvalError> {
        if token_docs.is_empty() {
            return Err(EvalError::EmptyCorpus);
        }
        let mut postings: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut num_docs = 0u32;
        let mut add_unit = |tokens: &[S]| {
            for token in tokens {
                let list = postings.entry(token.as_ref().to_string()).or_default();
                if list.last() != Some(&num_docs) {
                    list.push(num_docs);
                }
            }
            num_docs += 1;
        };
        match window {
            Window::Document => token_docs.iter().for_each(|doc| add_unit(doc)),
            Window::Sliding(size) => {
                if size < 2 {
                    return Err(EvalError::BadWindow);
                }
                for doc in token_docs {
                    if doc.len() <= size {
                        add_unit(doc);
                    } else {
                        doc.windows(size).for_each(&mut add_unit);
                    }
                }
            }
        }
        Ok(CooccurrenceStats { postings, num_docs })
    }

    pub fn num_docs(&self) -> u32 {
        self.num_docs
    }

    pub fn df(&self, token: &str) -> Option<u32> {
        self.postings.get(token).map(|p| p.len() as u32)
    }

    /// Number of documents containing both tokens.
    pub fn joint_df(&self, a: &str, b: &str) -> Option<u32> {
        let (pa, pb) = (self.postings.get(a)?, self.postings.get(b)?);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < pa.len() && j < pb.len() {
            match pa[i].cmp(&pb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Some(n)
    }

    pub fn probability(&self, token: &str) -> Result<f64, EvalError> {
        self.df(token)
            .map(|df| df as f64 / self.num_docs as f64)
            .ok_or_else(|| EvalError::UnknownToken(token.to_string()))
    }

    pub fn joint_probability(&self, a: &str, b: &str) -> Result<f64, EvalError> {
        self.probability(a)?;
        self.probability(b)?;
        Ok(self.joint_df(a, b).unwrap_or(0) as f64 / self.num_docs as f64)
    }
}

/// `ln(P(a,b) / (P(a) P(b)))`, with ε in place of a zero `P(a,b)`.
pub fn pmi_pair(a: &str, b: &str, stats: &CooccurrenceStats) -> Result<f64, EvalError> {
    let joint = stats.joint_probability(a, b)?;
    let (pa, pb) = (stats.probability(a)?, stats.probability(b)?);
    Ok((smoothed(joint) / (pa * pb)).ln())
}

/// Mean PMI over all distinct pairs of `words`.
pub fn pmi_coherence<S: AsRef<str>>(words: &[S], stats: &CooccurrenceStats) -> Result<f64, EvalError> {
    if words.len() < 2 {
        return Err(EvalError::TooFewWords(words.len()));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            sum += pmi_pair(words[i].as_ref(), words[j].as_ref(), stats)?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// `2 / (N(N-1)) · Σ_{i≥2} Σ_{j<i} ln(P(v_i, v_j) / P(v_j))` with words in
/// descending topic weight and the same zero smoothing as [`pmi_pair`].
pub fn umass_coherence<S: AsRef<str>>(words: &[S], stats: &CooccurrenceStats) -> Result<f64, EvalError> {
    let n = words.len();
    if n < 2 {
        return Err(EvalError::TooFewWords(n));
    }
    let mut sum = 0.0;
    for i in 1..n {
        for j in 0..i {
            let (vi, vj) = (words[i].as_ref(), words[j].as_ref());
            sum += (smoothed(stats.joint_probability(vi, vj)?) / stats.probability(vj)?).ln();
        }
    }
    Ok(2.0 / (n * (n - 1)) as f64 * sum)
}

pub fn coherence_pmi(top: &TopicTopWords, stats: &CooccurrenceStats) -> Result<f64, EvalError> {
    pmi_coherence(&top.tokens().collect::<Vec<_>>(), stats)
}

pub fn coherence_umass(top: &TopicTopWords, stats: &CooccurrenceStats) -> Result<f64, EvalError> {
    umass_coherence(&top.tokens().collect::<Vec<_>>(), stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceMetric {
    #[default]
    Pmi,
    Umass,
}

/// How a trained model is scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    /// Top words per topic fed to coherence.
    pub top_n: usize,
    /// Coherence variant reported in the `coherence` column and used for ranking.
    pub metric: CoherenceMetric,
    pub window: Window,
    /// Trailing share of documents held out for perplexity.
    pub heldout_fraction: f64,
    pub fold_in_iterations: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            top_n: 10,
            metric: CoherenceMetric::Pmi,
            window: Window::Document,
            heldout_fraction: 0.1,
            fold_in_iterations: 50,
        }
    }
}

impl EvalSettings {
    pub fn validate(&self) -> Result<(), String> {
        if self.top_n < 2 {
            return Err("coherence needs top_n >= 2".into());
        }
        if !(self.heldout_fraction > 0.0 && self.heldout_fraction < 1.0) {
            return Err("heldout_fraction must lie in (0, 1)".into());
        }
        if self.fold_in_iterations < 2 {
            return Err("fold_in_iterations must be at least 2".into());
        }
        if let Window::Sliding(size) = self.window {
            if size < 2 {
                return Err("sliding window must hold at least 2 tokens".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelCoherence {
    pub pmi: f64,
    pub umass: f64,
}

impl ModelCoherence {
    pub fn get(&self, metric: CoherenceMetric) -> f64 {
        match metric {
            CoherenceMetric::Pmi => self.pmi,
            CoherenceMetric::Umass => self.umass,
        }
    }
}

/// Both coherence scores averaged over topics, using each topic's top `n` words.
pub fn model_coherence(
    model: &TopicModel,
    vocab: &Vocabulary,
    stats: &CooccurrenceStats,
    n: usize,
) -> Result<ModelCoherence, EvalError> {
    let mut pmi = 0.0;
    let mut umass = 0.0;
    for topic in 0..model.topics() {
        let top = model.top_words(vocab, topic, n)?;
        pmi += coherence_pmi(&top, stats)?;
        umass += coherence_umass(&top, stats)?;
    }
    let k = model.topics() as f64;
    Ok(ModelCoherence {
        pmi: pmi / k,
        umass: umass / k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perplexity {
    /// Mean natural-log predictive probability per held-out token (negative).
    pub log_likelihood_per_word: f64,
    /// `exp(-log_likelihood_per_word)`.
    pub perplexity: f64,
}

/// Held-out per-word log-likelihood with θ inferred per document by fold-in.
pub fn perplexity(
    model: &TopicModel,
    heldout: &[BowDocument],
    fold_in_iterations: usize,
    seed: u64,
) -> Result<Perplexity, EvalError> {
    let thetas = model.infer_corpus(heldout, fold_in_iterations, seed)?;
    perplexity_with(model, heldout, &thetas)
}

/// Held-out per-word log-likelihood given each document's θ.
pub fn perplexity_with(model: &TopicModel, docs: &[BowDocument], thetas: &[Vec<f64>]) -> Result<Perplexity, EvalError> {
    let mut total = 0.0;
    let mut tokens = 0u64;
    for (doc, theta) in docs.iter().zip(thetas) {
        for &(id, count) in doc.entries() {
            total += count as f64 * model.predictive_word_probability(theta, id)?.ln();
            tokens += count as u64;
        }
    }
    if tokens == 0 {
        return Err(EvalError::ZeroTokens);
    }
    let mean = total / tokens as f64;
    Ok(Perplexity {
        log_likelihood_per_word: mean,
        perplexity: (-mean).exp(),
    })
}

/// Indices `(train, heldout)` keeping the last `fraction` of documents for
/// evaluation. At least one document stays on each side when there are two or
/// more and `fraction > 0`.
pub fn heldout_split(len: usize, fraction: f64) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    if len < 2 || fraction <= 0.0 {
        return (0..len, len..len);
    }
    let heldout = ((len as f64 * fraction).ceil() as usize).clamp(1, len - 1);
    (0..len - heldout, len - heldout..len)
}

/// One scored configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub alpha: String,
    pub beta: f64,
    pub topics: usize,
    pub coherence: f64,
    pub perplexity: f64,
    #[serde(default)]
    pub coherence_pmi: Option<f64>,
    #[serde(default)]
    pub coherence_umass: Option<f64>,
    #[serde(default)]
    pub exp_perplexity: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<EvaluationRow>,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl EvaluationReport {
    /// CSV with the columns `alpha,beta,k,coherence,perplexity` followed by
    /// both coherence variants and classical perplexity.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "alpha",
            "beta",
            "k",
            "coherence",
            "perplexity",
            "coherence_pmi",
            "coherence_umass",
            "exp_perplexity",
        ])?;
        for row in &self.rows {
            writer.write_record([
                row.alpha.clone(),
                row.beta.to_string(),
                row.topics.to_string(),
                row.coherence.to_string(),
                row.perplexity.to_string(),
                opt(row.coherence_pmi),
                opt(row.coherence_umass),
                opt(row.exp_perplexity),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}
