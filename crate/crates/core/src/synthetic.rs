//! Planted-topic corpora: each document draws every token uniformly from one
//! of several disjoint word blocks.

use chrono::NaiveDate;

use crate::corpus::{Corpus, Review};
use crate::lda::rng::SeededRng;
use crate::text::{tokenize, PrepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantedSpec {
    pub blocks: usize,
    pub words_per_block: usize,
    pub docs: usize,
    pub doc_len: usize,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            blocks: 2,
            words_per_block: 50,
            docs: 200,
            doc_len: 30,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    pub blocks: Vec<Vec<String>>,
    pub docs: Vec<Vec<String>>,
    /// Block each document was drawn from.
    pub labels: Vec<usize>,
}

const ONSETS: &[u8] = b"bdfgkmprtvz";
const VOWELS: &[u8] = b"aiou";
const CODAS: &[u8] = b"dgkmpt";

/// Five-letter pseudo-words that survive preprocessing unchanged, in a fixed
/// order.
pub fn pseudo_words(count: usize) -> Vec<String> {
    let config = PrepConfig {
        english_filter: false,
        phrases: false,
        ..Default::default()
    };
    let mut words = Vec::with_capacity(count);
    'outer: for &a in ONSETS {
        for &b in VOWELS {
            for &c in ONSETS {
                for &d in VOWELS {
                    for &e in CODAS {
                        if words.len() == count {
                            break 'outer;
                        }
                        let word = String::from_utf8(vec![a, b, c, d, e]).expect("ascii");
                        let tokens = tokenize(&word, &config);
                        if tokens.len() == 1 && tokens[0].stem == word {
                            words.push(word);
                        }
                    }
                }
            }
        }
    }
    assert_eq!(words.len(), count, "pseudo-word space exhausted");
    words
}

/// Documents alternate between blocks, so any trailing slice holds all of
/// them.
pub fn planted_corpus(spec: &PlantedSpec) -> PlantedCorpus {
    let vocabulary = pseudo_words(spec.blocks * spec.words_per_block);
    let blocks: Vec<Vec<String>> = vocabulary
        .chunks(spec.words_per_block)
        .map(<[String]>::to_vec)
        .collect();
    let mut rng = SeededRng::new(spec.seed);
    let mut docs = Vec::with_capacity(spec.docs);
    let mut labels = Vec::with_capacity(spec.docs);
    for d in 0..spec.docs {
        let block = d % spec.blocks;
        let doc = (0..spec.doc_len)
            .map(|_| blocks[block][rng.below(spec.words_per_block)].clone())
            .collect();
        docs.push(doc);
        labels.push(block);
    }
    PlantedCorpus { blocks, docs, labels }
}

impl PlantedCorpus {
    /// As reviews, one per document, for the file-based pipeline.
    pub fn to_corpus(&self) -> Corpus {
        let date = NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date");
        let reviews = self
            .docs
            .iter()
            .zip(&self.labels)
            .map(|(doc, label)| Review {
                title: String::new(),
                body: doc.join(" "),
                rating: 5,
                reviewer_location: None,
                date,
                venue_id: format!("planted-{label}"),
            })
            .collect();
        Corpus::new("planted", reviews)
    }
}

/// Share of documents whose planted block is the majority block of their
/// assigned topic.
pub fn purity(labels: &[usize], assigned: &[usize]) -> f64 {
    assert_eq!(labels.len(), assigned.len());
    if labels.is_empty() {
        return 0.0;
    }
    let blocks = labels.iter().max().map_or(0, |m| m + 1);
    let topics = assigned.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; blocks]; topics];
    for (&l, &a) in labels.iter().zip(assigned) {
        table[a][l] += 1;
    }
    let hits: usize = table.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    hits as f64 / labels.len() as f64
}
