//! Review text normalization: stripping, tokenization, stopwords, stemming,
//! collocations and a crude English filter.

mod phrases;
pub mod porter;

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

pub use phrases::{apply_phrases, apply_phrases_tokens, build_phrase_model, phrase_tokens, PhraseEntry, PhraseModel};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");
const BUNDLED_COMMON_WORDS: &str = include_str!("../../data/common_words_en.txt");

/// Documents whose share of known English words falls below this are dropped.
pub const ENGLISH_MIN_RATIO: f64 = 0.2;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot read stopword list {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("phrase model needs at least one document")]
    EmptyCorpus,
    #[error("invalid preprocessing config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripRule {
    Url,
    Email,
    Emoji,
    ExtraWhitespace,
}

impl StripRule {
    fn pattern(self) -> &'static Regex {
        static URL: OnceLock<Regex> = OnceLock::new();
        static EMAIL: OnceLock<Regex> = OnceLock::new();
        static EMOJI: OnceLock<Regex> = OnceLock::new();
        static SPACE: OnceLock<Regex> = OnceLock::new();
        let cell = match self {
            StripRule::Url => (&URL, r"(?i)\b(?:https?://|www\.)\S+"),
            StripRule::Email => (&EMAIL, r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+"),
            StripRule::Emoji => (
                &EMOJI,
                r"[\p{Extended_Pictographic}\p{Emoji_Modifier}\u{FE0F}\u{200D}\u{20E3}\u{1F1E6}-\u{1F1FF}]",
            ),
            StripRule::ExtraWhitespace => (&SPACE, r"\s+"),
        };
        cell.0.get_or_init(|| Regex::new(cell.1).expect("static pattern"))
    }
}

/// A set of stopwords in lowercase.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StopwordList(BTreeSet<String>);

impl StopwordList {
    /// The list shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    /// One token per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        StopwordList(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self, TextError> {
        std::fs::read_to_string(path)
            .map(|text| Self::parse(&text))
            .map_err(|source| TextError::Io {
                path: path.display().to_string(),
                source,
            })
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extend<I: IntoIterator<Item = String>>(&mut self, tokens: I) {
        self.0.extend(tokens.into_iter().map(|t| t.to_lowercase()));
    }
}

fn common_words() -> &'static BTreeSet<&'static str> {
    static WORDS: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| BUNDLED_COMMON_WORDS.lines().map(str::trim).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepConfig {
    pub min_token_length: usize,
    #[serde(skip_serializing)]
    pub stopwords: StopwordList,
    pub strip_patterns: Vec<StripRule>,
    pub phrase_min_count: u64,
    pub phrase_threshold: f64,
    /// Drop reviews that fail the English-vocabulary ratio check.
    pub english_filter: bool,
    /// Detect and join bigram/trigram collocations.
    pub phrases: bool,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            min_token_length: 3,
            stopwords: StopwordList::bundled(),
            strip_patterns: vec![
                StripRule::Url,
                StripRule::Email,
                StripRule::Emoji,
                StripRule::ExtraWhitespace,
            ],
            phrase_min_count: 5,
            phrase_threshold: 10.0,
            english_filter: true,
            phrases: true,
        }
    }
}

impl PrepConfig {
    pub fn validate(&self) -> Result<(), TextError> {
        if self.min_token_length < 1 {
            return Err(TextError::InvalidConfig("min_token_length must be >= 1".into()));
        }
        if self.phrase_min_count < 1 {
            return Err(TextError::InvalidConfig("phrase_min_count must be >= 1".into()));
        }
        if !self.phrase_threshold.is_finite() {
            return Err(TextError::InvalidConfig("phrase_threshold must be finite".into()));
        }
        Ok(())
    }
}

/// A stemmed token together with the lowercase word it came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token {
    pub stem: String,
    pub surface: String,
}

/// Irregular forms the stemmer cannot reach.
const LEMMA_EXCEPTIONS: &[(&str, &str)] = &[
    ("children", "child"),
    ("feet", "foot"),
    ("geese", "goose"),
    ("leaves", "leaf"),
    ("men", "man"),
    ("mice", "mouse"),
    ("teeth", "tooth"),
    ("women", "woman"),
];

/// Maps a word to its lemma when it is a known irregular form; identity otherwise.
pub fn lemmatize(word: &str) -> &str {
    LEMMA_EXCEPTIONS
        .binary_search_by(|(form, _)| form.cmp(&word))
        .map(|i| LEMMA_EXCEPTIONS[i].1)
        .unwrap_or(word)
}

fn strip(text: &str, rules: &[StripRule]) -> String {
    let mut out = text.to_string();
    for rule in rules {
        out = rule.pattern().replace_all(&out, " ").into_owned();
    }
    out
}

/// Lowercased alphabetic words, accents folded, everything else a separator.
fn words(text: &str) -> Vec<String> {
    let folded: String = text
        .nfkd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect();
    folded
        .split(|c: char| !c.is_ascii_lowercase())
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Full token pipeline keeping the surface form of every surviving stem.
pub fn tokenize(text: &str, config: &PrepConfig) -> Vec<Token> {
    words(&strip(text, &config.strip_patterns))
        .into_iter()
        .filter(|w| !config.stopwords.contains(w))
        .filter_map(|surface| {
            let stem = porter::stem(lemmatize(&surface));
            let keep = stem.len() >= config.min_token_length && !config.stopwords.contains(&stem);
            keep.then_some(Token { stem, surface })
        })
        .collect()
}

/// Normalized, stopword-free, stemmed tokens of `text`.
pub fn preprocess(text: &str, config: &PrepConfig) -> Vec<String> {
    tokenize(text, config).into_iter().map(|t| t.stem).collect()
}

/// Share of the raw words of `text` found in the stopword list or the bundled
/// common-word list. `None` when the text has no words at all.
pub fn english_ratio(text: &str, config: &PrepConfig) -> Option<f64> {
    let words = words(&strip(text, &config.strip_patterns));
    if words.is_empty() {
        return None;
    }
    let known = words
        .iter()
        .filter(|w| config.stopwords.contains(w) || common_words().contains(w.as_str()))
        .count();
    Some(known as f64 / words.len() as f64)
}

pub fn looks_english(text: &str, config: &PrepConfig) -> bool {
    english_ratio(text, config).is_some_and(|r| r >= ENGLISH_MIN_RATIO)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn review_sentence() {
        let config = PrepConfig::default();
        assert_eq!(
            preprocess("Absolutely beautiful if you get the weather to enjoy it.", &config),
            ["absolut", "beauti", "weather", "enjoi"]
        );
    }

    #[test]
    fn empty_text() {
        assert!(preprocess("", &PrepConfig::default()).is_empty());
    }

    #[test]
    fn strips_url_emoji_and_punctuation() {
        let config = PrepConfig::default();
        assert_eq!(preprocess("Visit https://example.com NOW!! 😀", &config), ["visit"]);
        assert_eq!(
            preprocess("mail park.office@dublin.ie about the swans", &config),
            ["mail", "swan"]
        );
    }

    #[test]
    fn surface_forms_are_kept() {
        let tokens = tokenize("Beautifully maintained gardens", &PrepConfig::default());
        let pairs: Vec<_> = tokens.iter().map(|t| (t.stem.as_str(), t.surface.as_str())).collect();
        assert_eq!(
            pairs,
            [("beautifulli", "beautifully"), ("maintain", "maintained"), ("garden", "gardens")]
        );
    }

    #[test]
    fn stopword_stems_are_dropped() {
        // "others" is not a stopword but stems to one
        assert!(preprocess("others", &PrepConfig::default()).is_empty());
    }

    #[test]
    fn accents_fold_to_ascii() {
        assert_eq!(preprocess("Café crème", &PrepConfig::default()), ["cafe", "creme"]);
    }

    #[test]
    fn min_length_applies_to_stems() {
        let config = PrepConfig {
            min_token_length: 5,
            ..PrepConfig::default()
        };
        assert_eq!(preprocess("lovely swans and flowers", &config), ["flower"]);
    }

    #[test]
    fn lemma_exceptions_are_sorted_and_applied() {
        assert!(LEMMA_EXCEPTIONS.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(lemmatize("geese"), "goose");
        assert_eq!(lemmatize("swans"), "swans");
        assert_eq!(preprocess("children", &PrepConfig::default()), ["child"]);
    }

    #[test]
    fn english_heuristic() {
        let config = PrepConfig::default();
        assert!(looks_english("Lovely park, we had a picnic by the pond.", &config));
        assert!(!looks_english("Un parque precioso, paseamos junto al estanque.", &config));
        assert!(!looks_english("!!!", &config));
    }

    #[test]
    fn config_validation() {
        let bad = PrepConfig {
            min_token_length: 0,
            ..PrepConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(PrepConfig::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn output_alphabet_and_stopwords(text in "\\PC{0,120}") {
            let config = PrepConfig::default();
            for token in preprocess(&text, &config) {
                prop_assert!(token.bytes().all(|b| b.is_ascii_lowercase() || b == b'_'));
                prop_assert!(!config.stopwords.contains(&token));
                prop_assert!(token.len() >= config.min_token_length);
            }
        }

        #[test]
        fn deterministic(text in "\\PC{0,80}") {
            let config = PrepConfig::default();
            prop_assert_eq!(preprocess(&text, &config), preprocess(&text, &config));
        }
    }
}
