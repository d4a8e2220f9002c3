//! Bigram and trigram collocation detection.
//!
//! A pair `(a, b)` is accepted when it occurs at least `min_count` times and
//!
//! ```text
//! score = (count(ab) - min_count) * V / (count(a) * count(b)) >= threshold
//! ```
//!
//! where `V` is the number of distinct tokens. Trigrams come from a second
//! pass over documents whose accepted bigrams were already joined.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{PrepConfig, TextError, Token};

pub const SEPARATOR: char = '_';

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseEntry {
    pub ngram: Vec<String>,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseModel {
    bigrams: BTreeMap<(String, String), f64>,
    trigrams: BTreeMap<(String, String, String), f64>,
    threshold: f64,
}

impl PhraseModel {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_empty(&self) -> bool {
        self.bigrams.is_empty() && self.trigrams.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bigrams.len() + self.trigrams.len()
    }

    pub fn bigram_score(&self, a: &str, b: &str) -> Option<f64> {
        self.bigrams.get(&(a.to_string(), b.to_string())).copied()
    }

    pub fn trigram_score(&self, a: &str, b: &str, c: &str) -> Option<f64> {
        self.trigrams
            .get(&(a.to_string(), b.to_string(), c.to_string()))
            .copied()
    }

    /// Bigrams then trigrams, each in lexicographic order.
    pub fn entries(&self) -> Vec<PhraseEntry> {
        let bigrams = self.bigrams.iter().map(|((a, b), &score)| PhraseEntry {
            ngram: vec![a.clone(), b.clone()],
            score,
        });
        let trigrams = self.trigrams.iter().map(|((a, b, c), &score)| PhraseEntry {
            ngram: vec![a.clone(), b.clone(), c.clone()],
            score,
        });
        bigrams.chain(trigrams).collect()
    }

    pub fn from_entries(threshold: f64, entries: Vec<PhraseEntry>) -> Self {
        let mut model = PhraseModel {
            threshold,
            ..Default::default()
        };
        for entry in entries {
            match <[String; 3]>::try_from(entry.ngram) {
                Ok([a, b, c]) => {
                    model.trigrams.insert((a, b, c), entry.score);
                }
                Err(ngram) => {
                    if let Ok([a, b]) = <[String; 2]>::try_from(ngram) {
                        model.bigrams.insert((a, b), entry.score);
                    }
                }
            }
        }
        model
    }

    /// Length of the phrase starting at `i`, or 1 when none matches.
    fn span_at(&self, tokens: &[&str], i: usize) -> usize {
        let plain = |t: &str| !t.contains(SEPARATOR);
        let window = &tokens[i..];
        if window.len() >= 3
            && window[..3].iter().all(|t| plain(t))
            && self.trigram_score(window[0], window[1], window[2]).is_some()
        {
            return 3;
        }
        if window.len() >= 2
            && window[..2].iter().all(|t| plain(t))
            && self.bigram_score(window[0], window[1]).is_some()
        {
            return 2;
        }
        1
    }

    fn spans(&self, tokens: &[&str]) -> Vec<(usize, usize)> {
        let mut spans = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            let len = self.span_at(tokens, i);
            spans.push((i, len));
            i += len;
        }
        spans
    }
}

impl Serialize for PhraseModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            threshold: f64,
            phrases: Vec<PhraseEntry>,
        }
        Repr {
            threshold: self.threshold,
            phrases: self.entries(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhraseModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            threshold: f64,
            phrases: Vec<PhraseEntry>,
        }
        let repr = Repr::deserialize(d)?;
        Ok(PhraseModel::from_entries(repr.threshold, repr.phrases))
    }
}

fn join(parts: &[&str]) -> String {
    parts.join(&SEPARATOR.to_string())
}

fn parts(token: &str) -> usize {
    token.split(SEPARATOR).count()
}

#[derive(Default)]
struct Counts {
    unigrams: BTreeMap<String, u64>,
    pairs: BTreeMap<(String, String), u64>,
}

impl Counts {
    fn of(docs: &[Vec<String>]) -> Self {
        let mut counts = Counts::default();
        for doc in docs {
            for token in doc {
                *counts.unigrams.entry(token.clone()).or_default() += 1;
            }
            for pair in doc.windows(2) {
                *counts
                    .pairs
                    .entry((pair[0].clone(), pair[1].clone()))
                    .or_default() += 1;
            }
        }
        counts
    }

    /// Accepted pairs with their scores, restricted by `keep`.
    fn accepted(
        &self,
        config: &PrepConfig,
        keep: impl Fn(&str, &str) -> bool,
    ) -> Vec<((String, String), f64)> {
        let vocab_size = self.unigrams.len() as f64;
        let min_count = config.phrase_min_count;
        self.pairs
            .iter()
            .filter(|((a, b), &count)| count >= min_count && keep(a, b))
            .filter_map(|((a, b), &count)| {
                let score = (count - min_count) as f64 * vocab_size
                    / (self.unigrams[a] as f64 * self.unigrams[b] as f64);
                (score >= config.phrase_threshold).then(|| ((a.clone(), b.clone()), score))
            })
            .collect()
    }
}

pub fn build_phrase_model(
    token_docs: &[Vec<String>],
    config: &PrepConfig,
) -> Result<PhraseModel, TextError> {
    if token_docs.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut model = PhraseModel {
        threshold: config.phrase_threshold,
        ..Default::default()
    };
    let plain = |a: &str, b: &str| !a.contains(SEPARATOR) && !b.contains(SEPARATOR);
    model.bigrams = Counts::of(token_docs)
        .accepted(config, plain)
        .into_iter()
        .collect();

    let merged: Vec<Vec<String>> = token_docs
        .iter()
        .map(|doc| merge_bigrams(doc, &model))
        .collect();
    let trigram_pair = |a: &str, b: &str| parts(a) + parts(b) == 3;
    for ((a, b), score) in Counts::of(&merged).accepted(config, trigram_pair) {
        let mut words = a.split(SEPARATOR).chain(b.split(SEPARATOR)).map(str::to_string);
        let key = (
            words.next().expect("3 parts"),
            words.next().expect("3 parts"),
            words.next().expect("3 parts"),
        );
        model.trigrams.insert(key, score);
    }
    Ok(model)
}

fn merge_bigrams(doc: &[String], model: &PhraseModel) -> Vec<String> {
    let bigrams_only = PhraseModel {
        bigrams: model.bigrams.clone(),
        ..Default::default()
    };
    apply_phrases(doc, &bigrams_only)
}

/// Greedy left-to-right joining, longest phrase first. Tokens that already
/// contain the separator are never re-joined, so this is idempotent.
pub fn apply_phrases(tokens: &[String], model: &PhraseModel) -> Vec<String> {
    let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
    model
        .spans(&refs)
        .into_iter()
        .map(|(start, len)| join(&refs[start..start + len]))
        .collect()
}

/// Like [`apply_phrases`] on the stems, joining surface forms alongside.
pub fn apply_phrases_tokens(tokens: &[Token], model: &PhraseModel) -> Vec<Token> {
    let stems: Vec<&str> = tokens.iter().map(|t| t.stem.as_str()).collect();
    model
        .spans(&stems)
        .into_iter()
        .map(|(start, len)| {
            let group = &tokens[start..start + len];
            if len == 1 {
                return group[0].clone();
            }
            Token {
                stem: join(&stems[start..start + len]),
                surface: join(&group.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>()),
            }
        })
        .collect()
}

/// All distinct accepted n-grams as joined tokens.
pub fn phrase_tokens(model: &PhraseModel) -> BTreeSet<String> {
    model
        .entries()
        .into_iter()
        .map(|e| join(&e.ngram.iter().map(String::as_str).collect::<Vec<_>>()))
        .collect()
}
