//! Vocabulary, bag-of-words and TF-IDF.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VectorizeError {
    #[error("every document is empty")]
    EmptyCorpus,
    #[error("malformed vocabulary: {0}")]
    Malformed(String),
}

pub type TokenId = usize;

/// Dense token ids in first-appearance order, with document frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, TokenId>,
    df: Vec<u64>,
    num_docs: u64,
    surface: Vec<Option<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrequencyFilter {
    pub enabled: bool,
    /// Tokens in fewer documents than this are removed.
    pub min_df: u64,
    /// Tokens in more than this fraction of documents are removed.
    pub max_df_ratio: f64,
}

impl Default for FrequencyFilter {
    fn default() -> Self {
        FrequencyFilter {
            enabled: false,
            min_df: 2,
            max_df_ratio: 0.9,
        }
    }
}

impl Vocabulary {
    pub fn build<S: AsRef<str>>(token_docs: &[Vec<S>]) -> Result<Self, VectorizeError> {
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            ids: HashMap::new(),
            df: Vec::new(),
            num_docs: token_docs.len() as u64,
            surface: Vec::new(),
        };
        for doc in token_docs {
            let mut seen = std::collections::HashSet::new();
            for token in doc {
                let token = token.as_ref();
                let id = match vocab.ids.get(token) {
                    Some(&id) => id,
                    None => {
                        let id = vocab.tokens.len();
                        vocab.tokens.push(token.to_string());
                        vocab.ids.insert(token.to_string(), id);
                        vocab.df.push(0);
                        vocab.surface.push(None);
                        id
                    }
                };
                if seen.insert(id) {
                    vocab.df[id] += 1;
                }
            }
        }
        if vocab.tokens.is_empty() {
            return Err(VectorizeError::EmptyCorpus);
        }
        Ok(vocab)
    }

    /// Drops rare and ubiquitous tokens, re-assigning ids in their previous order.
    pub fn filtered(&self, filter: &FrequencyFilter) -> Result<Self, VectorizeError> {
        if !filter.enabled {
            return Ok(self.clone());
        }
        let max_df = filter.max_df_ratio * self.num_docs as f64;
        let mut out = Vocabulary {
            tokens: Vec::new(),
            ids: HashMap::new(),
            df: Vec::new(),
            num_docs: self.num_docs,
            surface: Vec::new(),
        };
        for (id, token) in self.tokens.iter().enumerate() {
            let df = self.df[id];
            if df >= filter.min_df && df as f64 <= max_df {
                out.ids.insert(token.clone(), out.tokens.len());
                out.tokens.push(token.clone());
                out.df.push(df);
                out.surface.push(self.surface[id].clone());
            }
        }
        if out.tokens.is_empty() {
            return Err(VectorizeError::EmptyCorpus);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn num_docs(&self) -> u64 {
        self.num_docs
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn df(&self, id: TokenId) -> Option<u64> {
        self.df.get(id).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// The display form for `id`: the recorded surface form, else the token.
    pub fn label(&self, id: TokenId) -> Option<&str> {
        self.surface
            .get(id)
            .map(|s| s.as_deref().unwrap_or(&self.tokens[id]))
    }

    /// Records, for every token, the surface form seen most often
    /// (ties broken by lexicographic order).
    pub fn set_surface_forms<'a, I>(&mut self, pairs: I)
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut counts: Vec<BTreeMap<&str, u64>> = vec![BTreeMap::new(); self.len()];
        for (token, surface) in pairs {
            if let Some(id) = self.id(token) {
                *counts[id].entry(surface).or_default() += 1;
            }
        }
        for (id, forms) in counts.into_iter().enumerate() {
            // max_by_key keeps the last maximum; iterate in reverse for lexicographic-first
            self.surface[id] = forms
                .into_iter()
                .rev()
                .max_by_key(|&(_, n)| n)
                .map(|(s, _)| s.to_string());
        }
    }

    /// 64-bit FNV-1a over the tokens in id order, as 16 hex digits.
    pub fn fingerprint(&self) -> String {
        let mut hash: u64 = 0xcbf29ce484222325;
        for token in &self.tokens {
            for byte in token.bytes().chain(std::iter::once(0)) {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        }
        format!("{hash:016x}")
    }
}

#[derive(Serialize, Deserialize)]
struct VocabEntry {
    token: String,
    id: TokenId,
    df: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    surface: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    num_docs: u64,
    tokens: Vec<VocabEntry>,
}

impl Serialize for Vocabulary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        VocabRepr {
            num_docs: self.num_docs,
            tokens: self
                .tokens
                .iter()
                .enumerate()
                .map(|(id, token)| VocabEntry {
                    token: token.clone(),
                    id,
                    df: self.df[id],
                    surface: self.surface[id].clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mut repr = VocabRepr::deserialize(d)?;
        repr.tokens.sort_by_key(|e| e.id);
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            ids: HashMap::new(),
            df: Vec::new(),
            num_docs: repr.num_docs,
            surface: Vec::new(),
        };
        for (expected, entry) in repr.tokens.into_iter().enumerate() {
            let bad = |m: String| serde::de::Error::custom(VectorizeError::Malformed(m));
            if entry.id != expected {
                return Err(bad(format!("ids not dense at {expected}")));
            }
            if entry.df == 0 || entry.df > repr.num_docs {
                return Err(bad(format!("df {} out of range for `{}`", entry.df, entry.token)));
            }
            if vocab.ids.insert(entry.token.clone(), entry.id).is_some() {
                return Err(bad(format!("duplicate token `{}`", entry.token)));
            }
            vocab.tokens.push(entry.token);
            vocab.df.push(entry.df);
            vocab.surface.push(entry.surface);
        }
        Ok(vocab)
    }
}

/// Sparse counts, strictly increasing by token id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowDocument(Vec<(TokenId, u32)>);

impl BowDocument {
    /// Builds from arbitrary `(id, count)` pairs, merging duplicates and dropping zeros.
    pub fn from_counts<I: IntoIterator<Item = (TokenId, u32)>>(pairs: I) -> Self {
        let mut merged: BTreeMap<TokenId, u32> = BTreeMap::new();
        for (id, count) in pairs {
            *merged.entry(id).or_default() += count;
        }
        BowDocument(merged.into_iter().filter(|&(_, c)| c > 0).collect())
    }

    pub fn entries(&self) -> &[(TokenId, u32)] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Token ids with multiplicity, in id order.
    pub fn expand(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.0
            .iter()
            .flat_map(|&(id, count)| std::iter::repeat_n(id, count as usize))
    }
}

pub fn to_bow<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> BowDocument {
    BowDocument::from_counts(tokens.iter().filter_map(|t| vocab.id(t.as_ref())).map(|id| (id, 1)))
}

/// Sparse `(id, count * ln(D / df))`, zero weights omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfidfDocument(pub Vec<(TokenId, f64)>);

pub fn tfidf(bow: &BowDocument, vocab: &Vocabulary) -> TfidfDocument {
    let num_docs = vocab.num_docs() as f64;
    TfidfDocument(
        bow.entries()
            .iter()
            .filter_map(|&(id, count)| {
                let df = vocab.df(id)? as f64;
                let weight = count as f64 * (num_docs / df).ln();
                (weight > 0.0).then_some((id, weight))
            })
            .collect(),
    )
}
