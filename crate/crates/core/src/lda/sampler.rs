use statrs::function::gamma::ln_gamma;

use super::rng::SeededRng;
use super::{HyperParams, LdaError};
use crate::vectorize::{BowDocument, TokenId};

/// Chain state: per-token assignments and the three count tables.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    topics: usize,
    vocab_size: usize,
    alpha: Vec<f64>,
    alpha_sum: f64,
    beta: f64,
    docs: Vec<Vec<TokenId>>,
    assignments: Vec<Vec<usize>>,
    /// `docs × topics`, row-major
    doc_topic: Vec<u32>,
    /// `topics × vocab`, row-major
    topic_word: Vec<u32>,
    topic_totals: Vec<u64>,
    rng: SeededRng,
    weights: Vec<f64>,
}

impl GibbsSampler {
    /// Validates inputs and draws the initial assignments uniformly.
    pub fn new(bows: &[BowDocument], vocab_size: usize, hp: &HyperParams) -> Result<Self, LdaError> {
        hp.validate()?;
        if bows.is_empty() {
            return Err(LdaError::EmptyCorpus);
        }
        let mut docs = Vec::with_capacity(bows.len());
        for (index, bow) in bows.iter().enumerate() {
            if bow.is_empty() {
                return Err(LdaError::EmptyDocument(index));
            }
            if let Some(&(id, _)) = bow.entries().iter().find(|&&(id, _)| id >= vocab_size) {
                return Err(LdaError::InvalidToken { id, size: vocab_size });
            }
            docs.push(bow.expand().collect::<Vec<_>>());
        }
        let tokens: u64 = docs.iter().map(|d| d.len() as u64).sum();
        if hp.topics as u64 > tokens {
            return Err(LdaError::TooManyTopics {
                topics: hp.topics,
                tokens,
            });
        }

        let topics = hp.topics;
        let alpha = hp.alpha_values();
        let mut sampler = GibbsSampler {
            topics,
            vocab_size,
            alpha_sum: alpha.iter().sum(),
            alpha,
            beta: hp.beta,
            assignments: Vec::with_capacity(docs.len()),
            doc_topic: vec![0; docs.len() * topics],
            topic_word: vec![0; topics * vocab_size],
            topic_totals: vec![0; topics],
            rng: SeededRng::new(hp.seed),
            weights: vec![0.0; topics],
            docs,
        };
        for d in 0..sampler.docs.len() {
            let mut z = Vec::with_capacity(sampler.docs[d].len());
            for i in 0..sampler.docs[d].len() {
                let k = sampler.rng.below(topics);
                sampler.add(d, sampler.docs[d][i], k);
                z.push(k);
            }
            sampler.assignments.push(z);
        }
        Ok(sampler)
    }

    fn add(&mut self, d: usize, w: TokenId, k: usize) {
        self.doc_topic[d * self.topics + k] += 1;
        self.topic_word[k * self.vocab_size + w] += 1;
        self.topic_totals[k] += 1;
    }

    fn remove(&mut self, d: usize, w: TokenId, k: usize) {
        self.doc_topic[d * self.topics + k] -= 1;
        self.topic_word[k * self.vocab_size + w] -= 1;
        self.topic_totals[k] -= 1;
    }

    /// One systematic pass over every token of every document.
    pub fn sweep(&mut self) {
        let vbeta = self.vocab_size as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.remove(d, w, old);

                let mut total = 0.0;
                for k in 0..self.topics {
                    let doc_part = self.doc_topic[d * self.topics + k] as f64 + self.alpha[k];
                    let word_part = (self.topic_word[k * self.vocab_size + w] as f64 + self.beta)
                        / (self.topic_totals[k] as f64 + vbeta);
                    total += doc_part * word_part;
                    self.weights[k] = total;
                }
                let u = self.rng.next_f64() * total;
                let new = self
                    .weights
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(self.topics - 1);

                self.add(d, w, new);
                self.assignments[d][i] = new;
            }
        }
        debug_assert!(self.counts_consistent());
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    pub fn doc_topic_count(&self, d: usize, k: usize) -> u32 {
        self.doc_topic[d * self.topics + k]
    }

    pub fn topic_word_count(&self, k: usize, w: TokenId) -> u32 {
        self.topic_word[k * self.vocab_size + w]
    }

    pub fn topic_total(&self, k: usize) -> u64 {
        self.topic_totals[k]
    }

    /// Rebuilds every table from the assignments and compares, then checks
    /// the marginals: each document row sums to its length and each topic row
    /// to its total.
    pub fn counts_consistent(&self) -> bool {
        let mut doc_topic = vec![0u32; self.doc_topic.len()];
        let mut topic_word = vec![0u32; self.topic_word.len()];
        let mut totals = vec![0u64; self.topics];
        for (d, (doc, z)) in self.docs.iter().zip(&self.assignments).enumerate() {
            for (&w, &k) in doc.iter().zip(z) {
                doc_topic[d * self.topics + k] += 1;
                topic_word[k * self.vocab_size + w] += 1;
                totals[k] += 1;
            }
        }
        let rows_match = (0..self.docs.len()).all(|d| {
            let row: u64 = (0..self.topics)
                .map(|k| self.doc_topic[d * self.topics + k] as u64)
                .sum();
            row == self.docs[d].len() as u64
        });
        let topics_match = (0..self.topics).all(|k| {
            let row: u64 = (0..self.vocab_size)
                .map(|w| self.topic_word[k * self.vocab_size + w] as u64)
                .sum();
            row == self.topic_totals[k]
        });
        rows_match
            && topics_match
            && doc_topic == self.doc_topic
            && topic_word == self.topic_word
            && totals == self.topic_totals
    }

    /// `Θ_kv = (n_kv + β) / (n_k + Vβ)`, one row per topic.
    pub fn topic_word_estimate(&self) -> Vec<Vec<f64>> {
        let vbeta = self.vocab_size as f64 * self.beta;
        (0..self.topics)
            .map(|k| {
                let denom = self.topic_totals[k] as f64 + vbeta;
                (0..self.vocab_size)
                    .map(|w| (self.topic_word[k * self.vocab_size + w] as f64 + self.beta) / denom)
                    .collect()
            })
            .collect()
    }

    /// `θ_dk = (n_dk + α_k) / (len_d + α₀)`, one row per document.
    pub fn doc_topic_estimate(&self) -> Vec<Vec<f64>> {
        (0..self.docs.len())
            .map(|d| {
                let denom = self.docs[d].len() as f64 + self.alpha_sum;
                (0..self.topics)
                    .map(|k| (self.doc_topic[d * self.topics + k] as f64 + self.alpha[k]) / denom)
                    .collect()
            })
            .collect()
    }

    /// Collapsed joint `ln p(w, z | α, β)` of the current state.
    pub fn joint_log_likelihood(&self) -> f64 {
        let v = self.vocab_size as f64;
        let mut ll = 0.0;
        for k in 0..self.topics {
            ll += ln_gamma(v * self.beta) - ln_gamma(self.topic_totals[k] as f64 + v * self.beta);
            for w in 0..self.vocab_size {
                let n = self.topic_word[k * self.vocab_size + w];
                if n > 0 {
                    ll += ln_gamma(n as f64 + self.beta) - ln_gamma(self.beta);
                }
            }
        }
        let alpha_norm = ln_gamma(self.alpha_sum) - self.alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>();
        for d in 0..self.docs.len() {
            ll += alpha_norm - ln_gamma(self.docs[d].len() as f64 + self.alpha_sum);
            for k in 0..self.topics {
                ll += ln_gamma(self.doc_topic[d * self.topics + k] as f64 + self.alpha[k]);
            }
        }
        ll
    }
}
