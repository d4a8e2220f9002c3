//! Hyperparameter grid search ranked by coherence, then per-word
//! log-likelihood.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{
    heldout_split, model_coherence, perplexity, CooccurrenceStats, EvalError, EvalSettings, EvaluationReport,
    EvaluationRow,
};
use crate::lda::rng::derive_seed;
use crate::lda::{train, Alpha, Estimator, HyperParams, LdaError, TopicModel};
use crate::vectorize::{BowDocument, Vocabulary};

#[derive(Debug, Error, PartialEq)]
pub enum TuningError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cell {cell}: {source}")]
    Training { cell: String, source: LdaError },
    #[error("cell {cell}: {source}")]
    Evaluation { cell: String, source: EvalError },
    #[error("corpus needs at least 2 documents to hold some out")]
    TooFewDocuments,
    #[error("{tokens} token documents for {bows} bag-of-words documents")]
    Misaligned { tokens: usize, bows: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchGrid {
    pub alphas: Vec<Alpha>,
    pub betas: Vec<f64>,
    pub topics: Vec<usize>,
    pub base_seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub estimator: Estimator,
    /// Supplied by the surrounding pipeline configuration.
    #[serde(skip)]
    pub evaluation: EvalSettings,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            alphas: vec![Alpha::Symmetric, Alpha::Scalar(0.05), Alpha::Scalar(0.1), Alpha::Scalar(0.2)],
            betas: vec![0.2, 0.3],
            topics: vec![5],
            base_seed: 0,
            iterations: 500,
            burn_in: 100,
            estimator: Estimator::Final,
            evaluation: EvalSettings::default(),
        }
    }
}

/// One point of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub index: usize,
    pub hyperparams: HyperParams,
}

impl GridCell {
    pub fn label(&self) -> String {
        let hp = &self.hyperparams;
        format!("#{} (alpha={}, beta={}, k={})", self.index, hp.alpha, hp.beta, hp.topics)
    }
}

impl SearchGrid {
    pub fn len(&self) -> usize {
        self.alphas.len() * self.betas.len() * self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), TuningError> {
        let invalid = |m: &str| Err(TuningError::InvalidGrid(m.to_string()));
        if self.alphas.is_empty() {
            return invalid("no alpha candidates");
        }
        if self.betas.is_empty() {
            return invalid("no beta candidates");
        }
        if self.topics.is_empty() {
            return invalid("no topic-count candidates");
        }
        if self.topics.iter().any(|&k| k < 2) {
            return invalid("every topic count must be at least 2");
        }
        self.evaluation.validate().map_err(TuningError::InvalidGrid)?;
        for cell in self.cells() {
            cell.hyperparams.validate().map_err(|source| TuningError::Training {
                cell: cell.label(),
                source,
            })?;
        }
        Ok(())
    }

    /// Cells in alpha-major, then beta, then K order; seeds are
    /// `base_seed + index`.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::with_capacity(self.len());
        for alpha in &self.alphas {
            for &beta in &self.betas {
                for &topics in &self.topics {
                    let index = cells.len();
                    let hyperparams = HyperParams {
                        topics,
                        alpha: alpha.clone(),
                        beta,
                        seed: derive_seed(self.base_seed, index as u64),
                        iterations: self.iterations,
                        burn_in: self.burn_in,
                        estimator: self.estimator,
                        allow_single_topic: false,
                    };
                    cells.push(GridCell { index, hyperparams });
                }
            }
        }
        cells
    }
}

/// Winner first: coherence descending, then per-word log-likelihood
/// ascending, then the row's own fields so that full ties stay deterministic.
pub fn compare_rows(a: &EvaluationRow, b: &EvaluationRow) -> Ordering {
    b.coherence
        .total_cmp(&a.coherence)
        .then(a.perplexity.total_cmp(&b.perplexity))
        .then_with(|| a.alpha.cmp(&b.alpha))
        .then(a.beta.total_cmp(&b.beta))
        .then(a.topics.cmp(&b.topics))
}

/// Row indices from best to worst.
pub fn rank(rows: &[EvaluationRow]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| compare_rows(&rows[i], &rows[j]).then(i.cmp(&j)));
    order
}

/// Index of the winning row, if any.
pub fn select_best(rows: &[EvaluationRow]) -> Option<usize> {
    (0..rows.len()).min_by(|&i, &j| compare_rows(&rows[i], &rows[j]).then(i.cmp(&j)))
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// One row per cell, in cell order.
    pub report: EvaluationReport,
    pub selected: usize,
    pub selected_model: TopicModel,
}

impl SearchOutcome {
    pub fn selected_row(&self) -> &EvaluationRow {
        &self.report.rows[self.selected]
    }
}

/// Trains and scores every cell. `token_docs` are the ordered tokens behind
/// `bows`, one list per document; coherence is measured against all of them
/// and perplexity on the trailing held-out documents, which training never
/// sees.
pub fn grid_search<S: AsRef<str>>(
    token_docs: &[Vec<S>],
    bows: &[BowDocument],
    vocab: &Vocabulary,
    grid: &SearchGrid,
) -> Result<SearchOutcome, TuningError> {
    grid.validate()?;
    if bows.len() < 2 {
        return Err(TuningError::TooFewDocuments);
    }
    if token_docs.len() != bows.len() {
        return Err(TuningError::Misaligned {
            tokens: token_docs.len(),
            bows: bows.len(),
        });
    }
    let (train_range, heldout_range) = heldout_split(bows.len(), grid.evaluation.heldout_fraction);
    let train_docs = &bows[train_range];
    let heldout_docs = &bows[heldout_range];
    let stats = CooccurrenceStats::build(token_docs, grid.evaluation.window).map_err(|source| {
        TuningError::Evaluation {
            cell: "reference corpus".into(),
            source,
        }
    })?;

    let results: Vec<Result<(EvaluationRow, TopicModel), TuningError>> = grid
        .cells()
        .into_par_iter()
        .map(|cell| {
            let hp = &cell.hyperparams;
            let model = train(train_docs, vocab, hp).map_err(|source| TuningError::Training {
                cell: cell.label(),
                source,
            })?;
            let eval_err = |source| TuningError::Evaluation {
                cell: cell.label(),
                source,
            };
            let coherence = model_coherence(&model, vocab, &stats, grid.evaluation.top_n).map_err(eval_err)?;
            let ppl = perplexity(&model, heldout_docs, grid.evaluation.fold_in_iterations, hp.seed).map_err(eval_err)?;
            let row = EvaluationRow {
                alpha: hp.alpha.to_string(),
                beta: hp.beta,
                topics: hp.topics,
                coherence: coherence.get(grid.evaluation.metric),
                perplexity: ppl.log_likelihood_per_word,
                coherence_pmi: Some(coherence.pmi),
                coherence_umass: Some(coherence.umass),
                exp_perplexity: Some(ppl.perplexity),
            };
            Ok((row, model))
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut models = Vec::with_capacity(results.len());
    for result in results {
        let (row, model) = result?;
        rows.push(row);
        models.push(model);
    }
    let selected = select_best(&rows).expect("validated grid is non-empty");
    Ok(SearchOutcome {
        report: EvaluationReport { rows },
        selected,
        selected_model: models.swap_remove(selected),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(alpha: &str, beta: f64, coherence: f64, perplexity: f64) -> EvaluationRow {
        EvaluationRow {
            alpha: alpha.into(),
            beta,
            topics: 5,
            coherence,
            perplexity,
            coherence_pmi: None,
            coherence_umass: None,
            exp_perplexity: None,
        }
    }

    fn reference_rows() -> Vec<EvaluationRow> {
        vec![
            row("symmetric", 0.2, 0.260, -7.626),
            row("symmetric", 0.3, 0.232, -7.252),
            row("0.1", 0.2, 0.257, -7.511),
            row("0.05", 0.2, 0.203, -7.052),
            row("0.2", 0.3, 0.195, -6.951),
            row("0.2", 0.2, 0.175, -6.627),
        ]
    }

    #[test]
    fn reference_grid_selects_symmetric() {
        let rows = reference_rows();
        let best = &rows[select_best(&rows).unwrap()];
        assert_eq!((best.alpha.as_str(), best.beta), ("symmetric", 0.2));
    }

    #[test]
    fn single_row() {
        assert_eq!(select_best(&[row("0.1", 0.2, -3.0, -9.0)]), Some(0));
        assert_eq!(select_best(&[]), None);
    }

    #[test]
    fn tie_goes_to_lower_log_likelihood() {
        let rows = vec![row("0.1", 0.2, 0.3, -6.5), row("0.2", 0.2, 0.3, -7.0)];
        assert_eq!(select_best(&rows), Some(1));
        assert_eq!(rank(&rows), vec![1, 0]);
    }

    #[test]
    fn default_grid_shape() {
        let grid = SearchGrid::default();
        assert_eq!(grid.len(), 8);
        let cells = grid.cells();
        assert_eq!(cells[0].hyperparams.alpha, Alpha::Symmetric);
        assert_eq!(cells[1].hyperparams.beta, 0.3);
        assert!(cells.iter().all(|c| c.hyperparams.topics == 5));
        assert_eq!(cells[7].hyperparams.seed, 7);
        assert!(grid.validate().is_ok());
    }

    #[test]
    fn invalid_grids() {
        for grid in [
            SearchGrid { alphas: vec![], ..Default::default() },
            SearchGrid { betas: vec![], ..Default::default() },
            SearchGrid { topics: vec![], ..Default::default() },
            SearchGrid { topics: vec![1], ..Default::default() },
            SearchGrid { betas: vec![-0.1], ..Default::default() },
            SearchGrid {
                evaluation: EvalSettings { heldout_fraction: 0.0, ..Default::default() },
                ..Default::default()
            },
        ] {
            assert!(grid.validate().is_err(), "{grid:?}");
        }
    }

    #[test]
    fn grid_json_defaults() {
        let grid: SearchGrid = serde_json::from_str(r#"{"alphas": ["symmetric", 0.1], "topics": [2, 3]}"#).unwrap();
        assert_eq!(grid.alphas, vec![Alpha::Symmetric, Alpha::Scalar(0.1)]);
        assert_eq!(grid.betas, vec![0.2, 0.3]);
        assert_eq!(grid.len(), 8);
    }

    proptest! {
        #[test]
        fn winner_ignores_row_order(
            scores in prop::collection::vec((-3i32..3, -5i32..0, 0usize..3), 1..12),
            seed in any::<u64>(),
        ) {
            let rows: Vec<EvaluationRow> = scores
                .iter()
                .enumerate()
                .map(|(i, &(c, p, a))| EvaluationRow {
                    topics: 2 + i,
                    ..row(["symmetric", "0.1", "0.2"][a], 0.2, c as f64 / 10.0, p as f64)
                })
                .collect();
            let best = rows[select_best(&rows).unwrap()].clone();
            let mut shuffled = rows.clone();
            let mut rng = crate::lda::rng::SeededRng::new(seed);
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.below(i + 1));
            }
            prop_assert_eq!(&shuffled[select_best(&shuffled).unwrap()], &best);
        }
    }
}
