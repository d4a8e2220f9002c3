//! Dirichlet topic model trained by collapsed Gibbs sampling.
//!
//! Each review is a mixture over `K` topics and each topic a distribution over
//! the vocabulary. With both distributions integrated out, the sampler
//! resamples every token's topic from
//!
//! ```text
//! p(z = k | rest) ∝ (n_dk + α_k) · (n_kv + β) / (n_k + V·β)
//! ```
//!
//! where counts exclude the token being resampled. Point estimates are
//! `Θ_kv = (n_kv + β) / (n_k + Vβ)` and `θ_dk = (n_dk + α_k) / (len_d + α₀)`.

mod dirichlet;
mod model;
pub mod rng;
mod sampler;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dirichlet::{dirichlet_ln_pdf, dirichlet_pdf};
pub use model::{train, TopWord, TopicModel, TopicTopWords, TrainingLog};
pub use sampler::GibbsSampler;

#[derive(Debug, Error, PartialEq)]
pub enum LdaError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("document {0} has no tokens")]
    EmptyDocument(usize),
    #[error("{topics} topics exceed the {tokens} tokens in the corpus")]
    TooManyTopics { topics: usize, tokens: u64 },
    #[error("token id {id} outside vocabulary of size {size}")]
    InvalidToken { id: usize, size: usize },
    #[error("topic {topic} out of range for {topics} topics")]
    TopicOutOfRange { topic: usize, topics: usize },
    #[error("document has no tokens and cannot be assigned a topic")]
    Unassignable,
    #[error("not on simplex: {0}")]
    NotOnSimplex(String),
    #[error("vocabulary fingerprint {found} does not match model ({expected})")]
    VocabularyMismatch { expected: String, found: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Document-topic concentration.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    /// `α_k = 1/K` for every topic.
    Symmetric,
    /// The same value for every topic.
    Scalar(f64),
    /// One value per topic.
    Vector(Vec<f64>),
}

impl Alpha {
    pub fn values(&self, topics: usize) -> Vec<f64> {
        match self {
            Alpha::Symmetric => vec![1.0 / topics as f64; topics],
            Alpha::Scalar(a) => vec![*a; topics],
            Alpha::Vector(v) => v.clone(),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Symmetric => f.write_str("symmetric"),
            Alpha::Scalar(a) => write!(f, "{a}"),
            Alpha::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|a| a.to_string()).collect();
                write!(f, "[{}]", parts.join(" "))
            }
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("symmetric") {
            return Ok(Alpha::Symmetric);
        }
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            return inner
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|p| !p.is_empty())
                .map(|p| p.parse::<f64>().map_err(|e| format!("alpha `{p}`: {e}")))
                .collect::<Result<Vec<_>, _>>()
                .map(Alpha::Vector);
        }
        s.parse::<f64>()
            .map(Alpha::Scalar)
            .map_err(|e| format!("alpha `{s}`: {e}"))
    }
}

impl Serialize for Alpha {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Alpha::Symmetric => s.serialize_str("symmetric"),
            Alpha::Scalar(a) => s.serialize_f64(*a),
            Alpha::Vector(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            Scalar(f64),
            Vector(Vec<f64>),
        }
        match Repr::deserialize(d)? {
            Repr::Name(name) => name.parse().map_err(serde::de::Error::custom),
            Repr::Scalar(a) => Ok(Alpha::Scalar(a)),
            Repr::Vector(v) => Ok(Alpha::Vector(v)),
        }
    }
}

/// How Θ and θ are read off the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Smoothed counts of the last sweep.
    #[default]
    Final,
    /// Mean of the per-sweep estimates after burn-in.
    Averaged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    pub topics: usize,
    pub alpha: Alpha,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub estimator: Estimator,
    /// Permits `topics == 1`; only meant for exercising degenerate cases.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub allow_single_topic: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            topics: 5,
            alpha: Alpha::Symmetric,
            beta: 0.2,
            seed: 0,
            iterations: 500,
            burn_in: 100,
            estimator: Estimator::Final,
            allow_single_topic: false,
        }
    }
}

impl HyperParams {
    pub fn new(topics: usize, alpha: Alpha, beta: f64) -> Self {
        HyperParams {
            topics,
            alpha,
            beta,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iterations(mut self, iterations: usize, burn_in: usize) -> Self {
        self.iterations = iterations;
        self.burn_in = burn_in;
        self
    }

    pub fn alpha_values(&self) -> Vec<f64> {
        self.alpha.values(self.topics)
    }

    pub fn validate(&self) -> Result<(), LdaError> {
        let invalid = |m: String| Err(LdaError::InvalidHyperParams(m));
        let floor = if self.allow_single_topic { 1 } else { 2 };
        if self.topics < floor {
            return invalid(format!("K = {} but at least {floor} topics are required", self.topics));
        }
        if let Alpha::Vector(v) = &self.alpha {
            if v.len() != self.topics {
                return invalid(format!("{} alpha values for {} topics", v.len(), self.topics));
            }
        }
        if self
            .alpha_values()
            .iter()
            .any(|a| !(a.is_finite() && *a > 0.0))
        {
            return invalid("every alpha must be positive and finite".into());
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return invalid("beta must be positive and finite".into());
        }
        if self.iterations < 1 {
            return invalid("iterations must be at least 1".into());
        }
        if self.burn_in >= self.iterations {
            return invalid(format!(
                "burn-in {} must be below iterations {}",
                self.burn_in, self.iterations
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_alpha_is_one_over_k() {
        assert_eq!(Alpha::Symmetric.values(4), vec![0.25; 4]);
        assert_eq!(Alpha::Scalar(0.1).values(2), vec![0.1, 0.1]);
    }

    #[test]
    fn alpha_json_forms() {
        for (json, alpha) in [
            ("\"symmetric\"", Alpha::Symmetric),
            ("0.05", Alpha::Scalar(0.05)),
            ("[0.1,0.2]", Alpha::Vector(vec![0.1, 0.2])),
        ] {
            assert_eq!(serde_json::from_str::<Alpha>(json).unwrap(), alpha);
            assert_eq!(serde_json::to_string(&alpha).unwrap(), json);
        }
        assert!(serde_json::from_str::<Alpha>("\"asymmetric\"").is_err());
    }

    #[test]
    fn alpha_from_str() {
        assert_eq!("symmetric".parse::<Alpha>().unwrap(), Alpha::Symmetric);
        assert_eq!("0.2".parse::<Alpha>().unwrap(), Alpha::Scalar(0.2));
        assert_eq!("[1, 2]".parse::<Alpha>().unwrap(), Alpha::Vector(vec![1.0, 2.0]));
        assert_eq!(Alpha::Scalar(0.05).to_string(), "0.05");
    }

    #[test]
    fn validation() {
        let ok = HyperParams::new(2, Alpha::Symmetric, 0.01);
        assert!(ok.validate().is_ok());
        assert!(HyperParams { topics: 1, ..ok.clone() }.validate().is_err());
        assert!(HyperParams { topics: 1, allow_single_topic: true, ..ok.clone() }
            .validate()
            .is_ok());
        assert!(HyperParams { beta: 0.0, ..ok.clone() }.validate().is_err());
        assert!(HyperParams { alpha: Alpha::Scalar(-1.0), ..ok.clone() }.validate().is_err());
        assert!(HyperParams { alpha: Alpha::Vector(vec![1.0]), ..ok.clone() }.validate().is_err());
        assert!(ok.clone().with_iterations(10, 10).validate().is_err());
        assert!(ok.with_iterations(0, 0).validate().is_err());
    }
}
