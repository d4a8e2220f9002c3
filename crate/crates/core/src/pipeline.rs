//! Configuration and the five batch commands behind the CLI.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use chrono::NaiveDate;

use crate::corpus::{load_districts, load_reviews, parse_review_date, Corpus, CorpusError, Venue};
use crate::eval::{
    heldout_split, model_coherence, perplexity, CooccurrenceStats, EvalError, EvalSettings, EvaluationReport,
    EvaluationRow,
};
use crate::lda::{train, HyperParams, LdaError, TopicModel, TopicTopWords};
use crate::report::{
    write_evaluation_markdown, write_ranking_markdown, write_topics_csv, write_topics_markdown, ReportFormat,
};
use crate::text::{
    apply_phrases_tokens, build_phrase_model, looks_english, tokenize, PhraseModel, PrepConfig, StopwordList,
    TextError, Token,
};
use crate::tuning::{grid_search, SearchGrid, TuningError};
use crate::vectorize::{to_bow, BowDocument, FrequencyFilter, VectorizeError, Vocabulary};
use crate::venues::{
    aggregate_popularity, collect_venues, write_venues_csv, Credentials, Fixture, LiveConfig, PopularityMode,
    PopularityRanking, VenueApiClient, VenueError, DEFAULT_QUERY, DEFAULT_RADIUS_M,
};

pub const MODEL_FILE: &str = "model.json";
pub const VOCABULARY_FILE: &str = "vocabulary.json";
pub const PHRASES_FILE: &str = "phrases.json";
pub const VENUES_FILE: &str = "venues.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const EVALUATION_FILE: &str = "evaluation.csv";

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("backend error: {0}")]
    Backend(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Data(_) => 3,
            PipelineError::Backend(_) => 4,
        }
    }
}

impl From<CorpusError> for PipelineError {
    fn from(e: CorpusError) -> Self {
        PipelineError::Data(e.to_string())
    }
}

impl From<TextError> for PipelineError {
    fn from(e: TextError) -> Self {
        match e {
            TextError::EmptyCorpus => PipelineError::Data(e.to_string()),
            _ => PipelineError::Config(e.to_string()),
        }
    }
}

impl From<VectorizeError> for PipelineError {
    fn from(e: VectorizeError) -> Self {
        PipelineError::Data(e.to_string())
    }
}

impl From<LdaError> for PipelineError {
    fn from(e: LdaError) -> Self {
        match e {
            LdaError::InvalidHyperParams(_) => PipelineError::Config(e.to_string()),
            _ => PipelineError::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for PipelineError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadWindow => PipelineError::Config(e.to_string()),
            _ => PipelineError::Data(e.to_string()),
        }
    }
}

impl From<TuningError> for PipelineError {
    fn from(e: TuningError) -> Self {
        match &e {
            TuningError::InvalidGrid(_)
            | TuningError::Training {
                source: LdaError::InvalidHyperParams(_),
                ..
            } => PipelineError::Config(e.to_string()),
            _ => PipelineError::Data(e.to_string()),
        }
    }
}

impl From<VenueError> for PipelineError {
    fn from(e: VenueError) -> Self {
        if e.is_backend() {
            return PipelineError::Backend(e.to_string());
        }
        match e {
            VenueError::Config(_) | VenueError::Fixture { .. } => PipelineError::Config(e.to_string()),
            _ => PipelineError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VenueMode {
    #[default]
    Fixture,
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VenueSettings {
    pub mode: VenueMode,
    pub radius: u32,
    pub query: String,
    /// Live mode only.
    pub base_url: Option<String>,
    pub api_version: String,
    pub min_delay_ms: u64,
    /// Maximum venues per search request; the API default applies when unset.
    pub limit: Option<u32>,
    pub popularity: PopularityMode,
}

impl Default for VenueSettings {
    fn default() -> Self {
        VenueSettings {
            mode: VenueMode::Fixture,
            radius: DEFAULT_RADIUS_M,
            query: DEFAULT_QUERY.into(),
            base_url: None,
            api_version: "20200101".into(),
            min_delay_ms: 500,
            limit: None,
            popularity: PopularityMode::Sum,
        }
    }
}

/// One JSON document driving every command. Relative paths resolve against
/// the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub districts: Option<PathBuf>,
    pub reviews: Option<PathBuf>,
    /// Separate documents for perplexity; the trailing share of `reviews`
    /// is used when unset.
    pub heldout_reviews: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
    /// Inclusive review date bounds, `YYYY-MM-DD` or `DD-MM-YYYY`.
    pub since: Option<String>,
    pub until: Option<String>,
    pub venues: VenueSettings,
    pub prep: PrepConfig,
    /// Replaces the bundled stopword list.
    pub stopwords_file: Option<PathBuf>,
    pub extra_stopwords: Vec<String>,
    pub vectorizer: FrequencyFilter,
    pub hyperparams: Option<HyperParams>,
    pub grid: Option<SearchGrid>,
    pub evaluation: EvalSettings,
    /// Words per topic in topic reports.
    pub top_words: usize,
    pub out: PathBuf,
    pub format: ReportFormat,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            districts: None,
            reviews: None,
            heldout_reviews: None,
            fixture: None,
            since: None,
            until: None,
            venues: VenueSettings::default(),
            prep: PrepConfig::default(),
            stopwords_file: None,
            extra_stopwords: Vec::new(),
            vectorizer: FrequencyFilter::default(),
            hyperparams: None,
            grid: None,
            evaluation: EvalSettings::default(),
            top_words: 6,
            out: PathBuf::from("out"),
            format: ReportFormat::Csv,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub since: Option<String>,
    pub until: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<ReportFormat>,
}

impl PipelineConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::Config(format!("invalid config: {e}")))?;
        config.resolve_paths(base_dir);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_json(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        resolve(&mut self.districts);
        resolve(&mut self.reviews);
        resolve(&mut self.heldout_reviews);
        resolve(&mut self.fixture);
        resolve(&mut self.stopwords_file);
        if self.out.is_relative() {
            self.out = base.join(&self.out);
        }
    }

    /// A seed only reaches a `hyperparams` or `grid` section that exists.
    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            if let Some(hp) = &mut self.hyperparams {
                hp.seed = seed;
            }
            if let Some(grid) = &mut self.grid {
                grid.base_seed = seed;
            }
        }
        if overrides.since.is_some() {
            self.since = overrides.since.clone();
        }
        if overrides.until.is_some() {
            self.until = overrides.until.clone();
        }
        if let Some(out) = &overrides.out {
            self.out = out.clone();
        }
        if let Some(format) = overrides.format {
            self.format = format;
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.hyperparams.is_some() && self.grid.is_some() {
            return Err(PipelineError::Config(
                "conflicting config: set either `hyperparams` or `grid`, not both".into(),
            ));
        }
        self.date_bounds()?;
        self.prep.validate()?;
        self.evaluation.validate().map_err(PipelineError::Config)?;
        if let Some(hp) = &self.hyperparams {
            hp.validate()?;
        }
        if let Some(grid) = &self.grid {
            self.grid_with_evaluation(grid).validate()?;
        }
        if self.top_words == 0 {
            return Err(PipelineError::Config("top_words must be at least 1".into()));
        }
        Ok(())
    }

    fn date_bounds(&self) -> Result<(Option<NaiveDate>, Option<NaiveDate>), PipelineError> {
        let parse = |raw: &Option<String>, field: &str| -> Result<Option<NaiveDate>, PipelineError> {
            raw.as_deref()
                .map(|r| parse_review_date(r).ok_or_else(|| PipelineError::Config(format!("`{field}`: unparseable date `{r}`"))))
                .transpose()
        };
        Ok((parse(&self.since, "since")?, parse(&self.until, "until")?))
    }

    fn grid_with_evaluation(&self, grid: &SearchGrid) -> SearchGrid {
        SearchGrid {
            evaluation: self.evaluation.clone(),
            ..grid.clone()
        }
    }

    fn training_hyperparams(&self) -> Result<HyperParams, PipelineError> {
        if self.grid.is_some() {
            return Err(PipelineError::Config(
                "`train` needs `hyperparams`; this config defines a `grid` (use `sweep`)".into(),
            ));
        }
        Ok(self.hyperparams.clone().unwrap_or_default())
    }

    fn search_grid(&self) -> Result<SearchGrid, PipelineError> {
        if self.hyperparams.is_some() {
            return Err(PipelineError::Config(
                "`sweep` needs `grid`; this config defines `hyperparams` (use `train`)".into(),
            ));
        }
        Ok(self.grid_with_evaluation(&self.grid.clone().unwrap_or_default()))
    }

    fn prep_config(&self) -> Result<PrepConfig, PipelineError> {
        let mut prep = self.prep.clone();
        if let Some(path) = &self.stopwords_file {
            prep.stopwords = StopwordList::load(existing(Some(path), "stopwords_file")?)?;
        }
        prep.stopwords.extend(self.extra_stopwords.iter().map(|w| w.to_lowercase()));
        Ok(prep)
    }
}

fn existing<'a>(path: Option<&'a PathBuf>, field: &str) -> Result<&'a Path, PipelineError> {
    let path = path.ok_or_else(|| PipelineError::Config(format!("`{field}` is not set")))?;
    if !path.exists() {
        return Err(PipelineError::Config(format!("`{field}` {} does not exist", path.display())));
    }
    Ok(path)
}

fn render(write: impl FnOnce(&mut Vec<u8>) -> Result<(), String>) -> Result<Vec<u8>, PipelineError> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(PipelineError::Data)?;
    Ok(buf)
}

fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::Data(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| PipelineError::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, PipelineError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| PipelineError::Data(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path)
        .map_err(|e| PipelineError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

/// Preprocessed corpus ready for training.
#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    /// Ordered in-vocabulary tokens per kept document.
    pub token_docs: Vec<Vec<String>>,
    pub bows: Vec<BowDocument>,
    pub vocab: Vocabulary,
    pub phrases: PhraseModel,
    /// Index into the input corpus of each kept document.
    pub kept: Vec<usize>,
}

fn tokenize_corpus(corpus: &Corpus, prep: &PrepConfig) -> Vec<(usize, Vec<Token>)> {
    corpus
        .reviews
        .par_iter()
        .enumerate()
        .filter_map(|(i, review)| {
            let text = review.text();
            if prep.english_filter && !looks_english(&text, prep) {
                return None;
            }
            Some((i, tokenize(&text, prep)))
        })
        .collect()
}

fn report_dropped(total: usize, kept: usize, why: &str) {
    if kept < total {
        log::warn!("dropped {} of {total} documents: {why}", total - kept);
    }
}

/// Tokenizes, detects phrases, builds the vocabulary and drops documents
/// left empty at any stage.
pub fn prepare(corpus: &Corpus, prep: &PrepConfig, filter: &FrequencyFilter) -> Result<PreparedCorpus, PipelineError> {
    let tokenized = tokenize_corpus(corpus, prep);
    report_dropped(corpus.len(), tokenized.len(), "not recognised as English");
    let phrases = if prep.phrases {
        let stems: Vec<Vec<String>> = tokenized
            .iter()
            .map(|(_, tokens)| tokens.iter().map(|t| t.stem.clone()).collect())
            .collect();
        if stems.is_empty() {
            PhraseModel::default()
        } else {
            build_phrase_model(&stems, prep)?
        }
    } else {
        PhraseModel::default()
    };
    let joined: Vec<(usize, Vec<Token>)> = tokenized
        .into_iter()
        .map(|(i, tokens)| (i, apply_phrases_tokens(&tokens, &phrases)))
        .filter(|(_, tokens)| !tokens.is_empty())
        .collect();
    report_dropped(corpus.len(), joined.len(), "no tokens left after preprocessing");
    if joined.is_empty() {
        return Err(PipelineError::Data(format!(
            "{}: empty corpus after preprocessing",
            corpus.source_label
        )));
    }

    let stem_docs: Vec<Vec<&str>> = joined
        .iter()
        .map(|(_, tokens)| tokens.iter().map(|t| t.stem.as_str()).collect())
        .collect();
    let mut vocab = Vocabulary::build(&stem_docs)?;
    if filter.enabled {
        vocab = vocab.filtered(filter)?;
    }
    vocab.set_surface_forms(
        joined
            .iter()
            .flat_map(|(_, tokens)| tokens.iter().map(|t| (t.stem.as_str(), t.surface.as_str()))),
    );
    let (token_docs, bows, kept) = vectorize_docs(joined.iter().map(|(i, t)| (*i, t.as_slice())), &vocab);
    report_dropped(joined.len(), kept.len(), "no tokens left after frequency filtering");
    if kept.is_empty() {
        return Err(PipelineError::Data("empty corpus after frequency filtering".into()));
    }
    Ok(PreparedCorpus {
        token_docs,
        bows,
        vocab,
        phrases,
        kept,
    })
}

type Vectorized = (Vec<Vec<String>>, Vec<BowDocument>, Vec<usize>);

fn vectorize_docs<'a>(docs: impl Iterator<Item = (usize, &'a [Token])>, vocab: &Vocabulary) -> Vectorized {
    let mut token_docs = Vec::new();
    let mut bows = Vec::new();
    let mut kept = Vec::new();
    for (i, tokens) in docs {
        let in_vocab: Vec<String> = tokens
            .iter()
            .filter(|t| vocab.id(&t.stem).is_some())
            .map(|t| t.stem.clone())
            .collect();
        if in_vocab.is_empty() {
            continue;
        }
        bows.push(to_bow(&in_vocab, vocab));
        token_docs.push(in_vocab);
        kept.push(i);
    }
    (token_docs, bows, kept)
}

/// Maps a corpus onto an existing phrase model and vocabulary, dropping
/// out-of-vocabulary tokens and then empty documents.
pub fn project(corpus: &Corpus, prep: &PrepConfig, phrases: &PhraseModel, vocab: &Vocabulary) -> Vectorized {
    let joined: Vec<(usize, Vec<Token>)> = tokenize_corpus(corpus, prep)
        .into_iter()
        .map(|(i, tokens)| (i, apply_phrases_tokens(&tokens, phrases)))
        .collect();
    let out = vectorize_docs(joined.iter().map(|(i, t)| (*i, t.as_slice())), vocab);
    report_dropped(corpus.len(), out.2.len(), "no in-vocabulary tokens");
    out
}

fn topic_words(model: &TopicModel, vocab: &Vocabulary, n: usize) -> Result<Vec<TopicTopWords>, PipelineError> {
    (0..model.topics())
        .map(|k| model.top_words(vocab, k, n).map_err(PipelineError::from))
        .collect()
}

fn topics_report(topics: &[TopicTopWords], format: ReportFormat) -> Result<Vec<u8>, PipelineError> {
    render(|buf| match format {
        ReportFormat::Csv => write_topics_csv(topics, buf).map_err(|e| e.to_string()),
        ReportFormat::Markdown => write_topics_markdown(topics, buf).map_err(|e| e.to_string()),
    })
}

fn ranking_report(ranking: &PopularityRanking, format: ReportFormat) -> Result<Vec<u8>, PipelineError> {
    render(|buf| match format {
        ReportFormat::Csv => ranking.write_csv(buf).map_err(|e| e.to_string()),
        ReportFormat::Markdown => write_ranking_markdown(ranking, buf).map_err(|e| e.to_string()),
    })
}

fn persist_model(
    config: &PipelineConfig,
    prepared: &PreparedCorpus,
    model: &TopicModel,
) -> Result<Vec<PathBuf>, PipelineError> {
    let topics = topic_words(model, &prepared.vocab, config.top_words)?;
    let topics_name = format!("topics.{}", config.format.extension());
    Ok(vec![
        write_artifact(&config.out, MODEL_FILE, &json(model)?)?,
        write_artifact(&config.out, VOCABULARY_FILE, &json(&prepared.vocab)?)?,
        write_artifact(&config.out, PHRASES_FILE, &json(&prepared.phrases)?)?,
        write_artifact(&config.out, &topics_name, &topics_report(&topics, config.format)?)?,
    ])
}

fn load_corpus(config: &PipelineConfig) -> Result<Corpus, PipelineError> {
    let mut corpus = load_reviews(existing(config.reviews.as_ref(), "reviews")?)?;
    let (since, until) = config.date_bounds()?;
    if since.is_some() || until.is_some() {
        let before = corpus.len();
        corpus.retain_dates(since, until);
        report_dropped(before, corpus.len(), "outside the date range");
    }
    Ok(corpus)
}

/// Searches every district, fetches likes and writes `venues.csv` and
/// `ranking.csv`, plus `ranking.md` in markdown format.
pub fn cmd_ingest_venues(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let districts = load_districts(existing(config.districts.as_ref(), "districts")?)?;
    if districts.is_empty() {
        return Err(VenueError::NoDistricts.into());
    }
    let settings = &config.venues;
    let mut client = match settings.mode {
        VenueMode::Fixture => VenueApiClient::fixture(Fixture::load(existing(config.fixture.as_ref(), "fixture")?)?),
        VenueMode::Live => {
            let base_url = settings
                .base_url
                .clone()
                .ok_or_else(|| PipelineError::Config("live mode needs `venues.base_url`".into()))?;
            let mut live = LiveConfig::new(base_url, Credentials::from_env()?);
            live.version = settings.api_version.clone();
            live.min_delay = Duration::from_millis(settings.min_delay_ms);
            live.limit = settings.limit;
            VenueApiClient::live(live)?
        }
    }
    .with_query(settings.query.clone());
    let venues = collect_venues(&districts, settings.radius, &mut client)?;
    let ranking = aggregate_popularity(&venues, settings.popularity);
    let venues_csv = render(|buf| write_venues_csv(&venues, buf).map_err(|e| e.to_string()))?;
    let mut written = vec![
        write_artifact(&config.out, VENUES_FILE, &venues_csv)?,
        write_artifact(&config.out, "ranking.csv", &ranking_report(&ranking, ReportFormat::Csv)?)?,
    ];
    if config.format == ReportFormat::Markdown {
        written.push(write_artifact(&config.out, "ranking.md", &ranking_report(&ranking, config.format)?)?);
    }
    Ok(written)
}

/// Preprocesses the reviews, trains one model and writes it with its
/// vocabulary, phrase table and topic report.
pub fn cmd_train(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let hp = config.training_hyperparams()?;
    let corpus = load_corpus(config)?;
    let prepared = prepare(&corpus, &config.prep_config()?, &config.vectorizer)?;
    let model = train(&prepared.bows, &prepared.vocab, &hp)?;
    persist_model(config, &prepared, &model)
}

fn row_for(model: &TopicModel, settings: &EvalSettings, coherence: crate::eval::ModelCoherence, ppl: crate::eval::Perplexity) -> EvaluationRow {
    let hp = &model.hyperparams;
    EvaluationRow {
        alpha: hp.alpha.to_string(),
        beta: hp.beta,
        topics: hp.topics,
        coherence: coherence.get(settings.metric),
        perplexity: ppl.log_likelihood_per_word,
        coherence_pmi: Some(coherence.pmi),
        coherence_umass: Some(coherence.umass),
        exp_perplexity: Some(ppl.perplexity),
    }
}

/// Scores the persisted model: coherence against the configured reviews and
/// perplexity on `heldout_reviews`, or on the trailing share of `reviews`.
pub fn cmd_evaluate(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let model: TopicModel = read_json(&config.out.join(MODEL_FILE))?;
    model.validate()?;
    let vocab: Vocabulary = read_json(&config.out.join(VOCABULARY_FILE))?;
    model.check_vocabulary(&vocab)?;
    let phrases: PhraseModel = read_json(&config.out.join(PHRASES_FILE))?;
    let prep = config.prep_config()?;
    let settings = &config.evaluation;

    let corpus = load_corpus(config)?;
    let (token_docs, bows, _) = project(&corpus, &prep, &phrases, &vocab);
    if bows.is_empty() {
        return Err(PipelineError::Data("no in-vocabulary documents to evaluate".into()));
    }
    let stats = CooccurrenceStats::build(&token_docs, settings.window)?;
    let coherence = model_coherence(&model, &vocab, &stats, settings.top_n)?;
    let heldout = match &config.heldout_reviews {
        Some(path) => project(&load_reviews(existing(Some(path), "heldout_reviews")?)?, &prep, &phrases, &vocab).1,
        None => bows[heldout_split(bows.len(), settings.heldout_fraction).1].to_vec(),
    };
    let ppl = perplexity(&model, &heldout, settings.fold_in_iterations, model.hyperparams.seed)?;
    let report = EvaluationReport {
        rows: vec![row_for(&model, settings, coherence, ppl)],
    };
    let bytes = render(|buf| report.write_csv(buf).map_err(|e| e.to_string()))?;
    Ok(vec![write_artifact(&config.out, EVALUATION_FILE, &bytes)?])
}

/// Runs the grid, writes `sweep.csv` and persists the selected model.
pub fn cmd_sweep(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let grid = config.search_grid()?;
    let corpus = load_corpus(config)?;
    let prepared = prepare(&corpus, &config.prep_config()?, &config.vectorizer)?;
    let outcome = grid_search(&prepared.token_docs, &prepared.bows, &prepared.vocab, &grid)?;
    let csv = render(|buf| outcome.report.write_csv(buf).map_err(|e| e.to_string()))?;
    let mut written = vec![write_artifact(&config.out, SWEEP_FILE, &csv)?];
    if config.format == ReportFormat::Markdown {
        let md = render(|buf| {
            write_evaluation_markdown(&outcome.report, Some(outcome.selected), buf).map_err(|e| e.to_string())
        })?;
        written.push(write_artifact(&config.out, "sweep.md", &md)?);
    }
    let row = outcome.selected_row();
    log::info!("selected alpha={} beta={} k={}", row.alpha, row.beta, row.topics);
    written.extend(persist_model(config, &prepared, &outcome.selected_model)?);
    Ok(written)
}

fn read_venues_csv(path: &Path) -> Result<Vec<Venue>, PipelineError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
    let mut venues = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
        if record.len() != 4 {
            return Err(PipelineError::Data(format!("{}: expected 4 fields", path.display())));
        }
        venues.push(Venue {
            id: record[0].to_string(),
            name: record[1].to_string(),
            district: record[2].to_string(),
            likes: record[3]
                .parse()
                .map_err(|e| PipelineError::Data(format!("{}: likes: {e}", path.display())))?,
        });
    }
    Ok(venues)
}

/// Re-renders topic and ranking reports from artifacts already in the output
/// directory, in the configured format.
pub fn cmd_report(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = Vec::new();
    let model_path = config.out.join(MODEL_FILE);
    if model_path.exists() {
        let model: TopicModel = read_json(&model_path)?;
        model.validate()?;
        let vocab: Vocabulary = read_json(&config.out.join(VOCABULARY_FILE))?;
        model.check_vocabulary(&vocab)?;
        let topics = topic_words(&model, &vocab, config.top_words)?;
        let name = format!("topics.{}", config.format.extension());
        written.push(write_artifact(&config.out, &name, &topics_report(&topics, config.format)?)?);
    }
    let venues_path = config.out.join(VENUES_FILE);
    if venues_path.exists() {
        let ranking = aggregate_popularity(&read_venues_csv(&venues_path)?, config.venues.popularity);
        let name = format!("ranking.{}", config.format.extension());
        written.push(write_artifact(&config.out, &name, &ranking_report(&ranking, config.format)?)?);
    }
    if written.is_empty() {
        return Err(PipelineError::Data(format!(
            "nothing to report in {}: run `train`, `sweep` or `ingest-venues` first",
            config.out.display()
        )));
    }
    Ok(written)
}
