use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, SeededRng};
use super::sampler::GibbsSampler;
use super::{Estimator, HyperParams, LdaError};
use crate::vectorize::{BowDocument, TokenId, Vocabulary};

const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Collapsed joint log-likelihood after each sweep.
    pub joint_log_likelihood: Vec<f64>,
    /// Count tables matched the assignments at the end of training.
    pub counts_reconciled: bool,
}

/// A trained model: Θ (topic × word) and θ (document × topic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub hyperparams: HyperParams,
    pub vocabulary_fingerprint: String,
    topic_word: Vec<Vec<f64>>,
    doc_topic: Vec<Vec<f64>>,
    pub training_log: TrainingLog,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopWord {
    pub id: TokenId,
    pub token: String,
    /// Display form (most frequent surface word for the stem).
    pub label: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicTopWords {
    pub topic: usize,
    pub words: Vec<TopWord>,
}

impl TopicTopWords {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|w| w.token.as_str())
    }
}

/// Runs the collapsed Gibbs sampler for `hp.iterations` sweeps.
pub fn train(bows: &[BowDocument], vocab: &Vocabulary, hp: &HyperParams) -> Result<TopicModel, LdaError> {
    let mut sampler = GibbsSampler::new(bows, vocab.len(), hp)?;
    let mut log = Vec::with_capacity(hp.iterations);
    let mut topic_sum: Option<Vec<Vec<f64>>> = None;
    let mut doc_sum: Option<Vec<Vec<f64>>> = None;
    let mut samples = 0usize;

    for sweep in 0..hp.iterations {
        sampler.sweep();
        log.push(sampler.joint_log_likelihood());
        if hp.estimator == Estimator::Averaged && sweep >= hp.burn_in {
            accumulate(&mut topic_sum, sampler.topic_word_estimate());
            accumulate(&mut doc_sum, sampler.doc_topic_estimate());
            samples += 1;
        }
    }

    let (topic_word, doc_topic) = match hp.estimator {
        Estimator::Final => (sampler.topic_word_estimate(), sampler.doc_topic_estimate()),
        Estimator::Averaged => {
            let scale = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                rows.into_iter()
                    .map(|r| r.into_iter().map(|x| x / samples as f64).collect())
                    .collect()
            };
            (
                scale(topic_sum.expect("at least one post-burn-in sweep")),
                scale(doc_sum.expect("at least one post-burn-in sweep")),
            )
        }
    };

    let counts_reconciled = sampler.counts_consistent();
    if !counts_reconciled {
        return Err(LdaError::InvalidModel("count tables diverged from assignments".into()));
    }
    Ok(TopicModel {
        hyperparams: hp.clone(),
        vocabulary_fingerprint: vocab.fingerprint(),
        topic_word,
        doc_topic,
        training_log: TrainingLog {
            joint_log_likelihood: log,
            counts_reconciled,
        },
    })
}

fn accumulate(sum: &mut Option<Vec<Vec<f64>>>, rows: Vec<Vec<f64>>) {
    match sum {
        None => *sum = Some(rows),
        Some(acc) => {
            for (a, r) in acc.iter_mut().zip(rows) {
                for (x, y) in a.iter_mut().zip(r) {
                    *x += y;
                }
            }
        }
    }
}

fn check_simplex(rows: &[Vec<f64>], width: usize, what: &str) -> Result<(), LdaError> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(LdaError::InvalidModel(format!(
                "{what} row {i} has {} entries, expected {width}",
                row.len()
            )));
        }
        let sum: f64 = row.iter().sum();
        if row.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(LdaError::NotOnSimplex(format!("{what} row {i} sums to {sum}")));
        }
    }
    Ok(())
}

impl TopicModel {
    /// Assembles a model from explicit distributions, validating both simplexes.
    pub fn from_distributions(
        hyperparams: HyperParams,
        vocabulary_fingerprint: impl Into<String>,
        topic_word: Vec<Vec<f64>>,
        doc_topic: Vec<Vec<f64>>,
    ) -> Result<Self, LdaError> {
        let model = TopicModel {
            hyperparams,
            vocabulary_fingerprint: vocabulary_fingerprint.into(),
            topic_word,
            doc_topic,
            training_log: TrainingLog {
                joint_log_likelihood: Vec::new(),
                counts_reconciled: true,
            },
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks shapes and that every Θ row and θ row lies on the simplex.
    pub fn validate(&self) -> Result<(), LdaError> {
        let topics = self.hyperparams.topics;
        if self.topic_word.len() != topics {
            return Err(LdaError::InvalidModel(format!(
                "{} topic rows for K = {topics}",
                self.topic_word.len()
            )));
        }
        let vocab_size = self.vocab_size();
        if vocab_size == 0 {
            return Err(LdaError::InvalidModel("empty vocabulary".into()));
        }
        check_simplex(&self.topic_word, vocab_size, "topic-word")?;
        check_simplex(&self.doc_topic, topics, "document-topic")
    }

    pub fn topics(&self) -> usize {
        self.hyperparams.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.topic_word.first().map_or(0, Vec::len)
    }

    pub fn topic_word(&self) -> &[Vec<f64>] {
        &self.topic_word
    }

    pub fn doc_topics(&self) -> &[Vec<f64>] {
        &self.doc_topic
    }

    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<(), LdaError> {
        let found = vocab.fingerprint();
        if found != self.vocabulary_fingerprint {
            return Err(LdaError::VocabularyMismatch {
                expected: self.vocabulary_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    fn check_doc(&self, doc: &BowDocument) -> Result<(), LdaError> {
        let size = self.vocab_size();
        match doc.entries().iter().find(|&&(id, _)| id >= size) {
            Some(&(id, _)) => Err(LdaError::InvalidToken { id, size }),
            None => Ok(()),
        }
    }

    /// `Σ count · ln Θ_kv` for every topic.
    fn topic_scores(&self, doc: &BowDocument) -> Vec<f64> {
        self.topic_word
            .iter()
            .map(|row| {
                doc.entries()
                    .iter()
                    .map(|&(id, count)| count as f64 * row[id].ln())
                    .sum()
            })
            .collect()
    }

    /// Topic with the highest `ln p(doc | topic)`; ties go to the lowest index.
    pub fn assign_topic(&self, doc: &BowDocument) -> Result<usize, LdaError> {
        self.check_doc(doc)?;
        if doc.is_empty() {
            return Err(LdaError::Unassignable);
        }
        let scores = self.topic_scores(doc);
        let mut best = 0;
        for (k, &score) in scores.iter().enumerate().skip(1) {
            if score > scores[best] {
                best = k;
            }
        }
        Ok(best)
    }

    /// `Σ_x ln p(x | z_best(x))` where each document is scored under its
    /// single most likely topic.
    pub fn log_likelihood(&self, bows: &[BowDocument]) -> Result<f64, LdaError> {
        let mut total = 0.0;
        for doc in bows {
            self.check_doc(doc)?;
            if doc.is_empty() {
                continue;
            }
            total += self
                .topic_scores(doc)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
        }
        Ok(total)
    }

    /// `Σ_k θ_dk · Θ_kv` for a document-topic vector `doc_topics`.
    pub fn predictive_word_probability(&self, doc_topics: &[f64], word: TokenId) -> Result<f64, LdaError> {
        if word >= self.vocab_size() {
            return Err(LdaError::InvalidToken {
                id: word,
                size: self.vocab_size(),
            });
        }
        if doc_topics.len() != self.topics() {
            return Err(LdaError::InvalidModel(format!(
                "{} topic weights for K = {}",
                doc_topics.len(),
                self.topics()
            )));
        }
        Ok(doc_topics
            .iter()
            .zip(&self.topic_word)
            .map(|(t, row)| t * row[word])
            .sum())
    }

    /// θ for a document not seen in training: Gibbs sampling of its token
    /// topics with Θ held fixed, averaging the estimate over the second half
    /// of the sweeps. An empty document gets the prior mean.
    pub fn infer_doc_topics(&self, doc: &BowDocument, iterations: usize, seed: u64) -> Result<Vec<f64>, LdaError> {
        self.check_doc(doc)?;
        let alpha = self.hyperparams.alpha_values();
        let alpha_sum: f64 = alpha.iter().sum();
        let topics = self.topics();
        let tokens: Vec<TokenId> = doc.expand().collect();
        if tokens.is_empty() || iterations == 0 {
            return Ok(alpha.iter().map(|a| a / alpha_sum).collect());
        }

        let mut rng = SeededRng::new(seed);
        let mut z: Vec<usize> = tokens.iter().map(|_| rng.below(topics)).collect();
        let mut counts = vec![0u32; topics];
        for &k in &z {
            counts[k] += 1;
        }
        let mut cumulative = vec![0.0; topics];
        let mut sum = vec![0.0; topics];
        let mut samples = 0usize;
        let keep_from = iterations / 2;
        let denom = tokens.len() as f64 + alpha_sum;

        for sweep in 0..iterations {
            for (i, &w) in tokens.iter().enumerate() {
                counts[z[i]] -= 1;
                let mut total = 0.0;
                for k in 0..topics {
                    total += (counts[k] as f64 + alpha[k]) * self.topic_word[k][w];
                    cumulative[k] = total;
                }
                let u = rng.next_f64() * total;
                let k = cumulative.iter().position(|&c| u < c).unwrap_or(topics - 1);
                z[i] = k;
                counts[k] += 1;
            }
            if sweep >= keep_from {
                for k in 0..topics {
                    sum[k] += (counts[k] as f64 + alpha[k]) / denom;
                }
                samples += 1;
            }
        }
        Ok(sum.into_iter().map(|s| s / samples as f64).collect())
    }

    /// θ for each of `bows`, seeding document `i` with `seed + i`.
    pub fn infer_corpus(&self, bows: &[BowDocument], iterations: usize, seed: u64) -> Result<Vec<Vec<f64>>, LdaError> {
        bows.iter()
            .enumerate()
            .map(|(i, doc)| self.infer_doc_topics(doc, iterations, derive_seed(seed, i as u64)))
            .collect()
    }

    /// The `n` heaviest words of `topic` (clamped to the vocabulary size),
    /// ties broken by ascending token id.
    pub fn top_words(&self, vocab: &Vocabulary, topic: usize, n: usize) -> Result<TopicTopWords, LdaError> {
        if topic >= self.topics() {
            return Err(LdaError::TopicOutOfRange {
                topic,
                topics: self.topics(),
            });
        }
        if vocab.len() != self.vocab_size() {
            return Err(LdaError::VocabularyMismatch {
                expected: format!("{} tokens", self.vocab_size()),
                found: format!("{} tokens", vocab.len()),
            });
        }
        let row = &self.topic_word[topic];
        let mut ids: Vec<TokenId> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let words = ids
            .into_iter()
            .take(n)
            .map(|id| TopWord {
                id,
                token: vocab.token(id).unwrap_or_default().to_string(),
                label: vocab.label(id).unwrap_or_default().to_string(),
                weight: row[id],
            })
            .collect();
        Ok(TopicTopWords { topic, words })
    }

    /// Relabels topics: new topic `i` is old topic `permutation[i]`.
    pub fn permute_topics(&self, permutation: &[usize]) -> Result<Self, LdaError> {
        let topics = self.topics();
        let mut seen = vec![false; topics];
        if permutation.len() != topics
            || permutation.iter().any(|&p| p >= topics || std::mem::replace(&mut seen[p], true))
        {
            return Err(LdaError::InvalidModel(format!("{permutation:?} is not a permutation")));
        }
        let mut hyperparams = self.hyperparams.clone();
        if let super::Alpha::Vector(v) = &self.hyperparams.alpha {
            hyperparams.alpha = super::Alpha::Vector(permutation.iter().map(|&p| v[p]).collect());
        }
        Ok(TopicModel {
            hyperparams,
            vocabulary_fingerprint: self.vocabulary_fingerprint.clone(),
            topic_word: permutation.iter().map(|&p| self.topic_word[p].clone()).collect(),
            doc_topic: self
                .doc_topic
                .iter()
                .map(|row| permutation.iter().map(|&p| row[p]).collect())
                .collect(),
            training_log: self.training_log.clone(),
        })
    }
}
