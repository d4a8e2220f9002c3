//! Command-line front end. [`run`] returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::lda::{Alpha, HyperParams};
use crate::pipeline::{
    cmd_evaluate, cmd_ingest_venues, cmd_report, cmd_sweep, cmd_train, Overrides, PipelineConfig, PipelineError,
    VenueMode,
};
use crate::report::ReportFormat;
use crate::tuning::SearchGrid;
use crate::venues::PopularityMode;

#[derive(Debug, Parser)]
#[command(name = "greenspace", version, about = "Green-space venue popularity and review topic modeling")]
pub struct Cli {
    /// Pipeline config (JSON). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the training seed or the grid's base seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Report format: csv or markdown.
    #[arg(long, global = true, value_name = "FORMAT")]
    pub format: Option<ReportFormat>,
    /// Keep reviews dated on or after this day.
    #[arg(long, global = true, value_name = "DATE")]
    pub since: Option<String>,
    /// Keep reviews dated on or before this day.
    #[arg(long, global = true, value_name = "DATE")]
    pub until: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search venues per district, fetch likes and rank districts.
    IngestVenues(IngestArgs),
    /// Preprocess reviews and train one topic model.
    Train(TrainArgs),
    /// Score the persisted model by coherence and perplexity.
    Evaluate(EvaluateArgs),
    /// Train every grid cell and keep the best model.
    Sweep(SweepArgs),
    /// Re-render reports from artifacts in the output directory.
    Report,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Search radius in meters.
    #[arg(long)]
    pub radius: Option<u32>,
    #[arg(long)]
    pub query: Option<String>,
    /// Maximum venues per search request (live mode).
    #[arg(long)]
    pub limit: Option<u32>,
    /// Query the live API; credentials come from the environment.
    #[arg(long)]
    pub live: bool,
    #[arg(long, value_name = "URL")]
    pub base_url: Option<String>,
    /// District score: sum or mean of likes.
    #[arg(long, value_parser = parse_popularity)]
    pub popularity: Option<PopularityMode>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Number of topics.
    #[arg(long, short = 'k')]
    pub topics: Option<usize>,
    /// `symmetric` or a positive number.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Words per topic in the report.
    #[arg(long)]
    pub top_words: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Reviews used for perplexity instead of the trailing share of the corpus.
    #[arg(long, value_name = "PATH")]
    pub heldout: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Topic counts to try, comma separated.
    #[arg(long, short = 'k', value_delimiter = ',')]
    pub topics: Option<Vec<usize>>,
    #[arg(long)]
    pub top_words: Option<usize>,
}

fn parse_popularity(raw: &str) -> Result<PopularityMode, String> {
    match raw {
        "sum" => Ok(PopularityMode::Sum),
        "mean" => Ok(PopularityMode::Mean),
        other => Err(format!("unknown popularity mode `{other}` (expected sum or mean)")),
    }
}

fn parse_alpha(raw: &str) -> Result<Alpha, PipelineError> {
    if raw == "symmetric" {
        return Ok(Alpha::Symmetric);
    }
    raw.parse()
        .map(Alpha::Scalar)
        .map_err(|_| PipelineError::Config(format!("--alpha: expected `symmetric` or a number, got `{raw}`")))
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::from_json("{}", Path::new(""))?,
    };
    config.apply(&Overrides {
        seed: cli.seed,
        since: cli.since.clone(),
        until: cli.until.clone(),
        out: cli.out.clone(),
        format: cli.format,
    });
    Ok(config)
}

fn apply_command_flags(config: &mut PipelineConfig, cli: &Cli) -> Result<(), PipelineError> {
    let seed = cli.seed;
    match &cli.command {
        Command::IngestVenues(args) => {
            let venues = &mut config.venues;
            if let Some(radius) = args.radius {
                venues.radius = radius;
            }
            if let Some(query) = &args.query {
                venues.query = query.clone();
            }
            if args.limit.is_some() {
                venues.limit = args.limit;
            }
            if args.live {
                venues.mode = VenueMode::Live;
            }
            if args.base_url.is_some() {
                venues.base_url = args.base_url.clone();
            }
            if let Some(mode) = args.popularity {
                venues.popularity = mode;
            }
        }
        Command::Train(args) => {
            if config.grid.is_none() {
                let hp = config
                    .hyperparams
                    .get_or_insert_with(|| HyperParams::default().with_seed(seed.unwrap_or(0)));
                if let Some(k) = args.topics {
                    hp.topics = k;
                }
                if let Some(alpha) = &args.alpha {
                    hp.alpha = parse_alpha(alpha)?;
                }
                if let Some(beta) = args.beta {
                    hp.beta = beta;
                }
                if let Some(iterations) = args.iterations {
                    hp.iterations = iterations;
                }
            }
            if let Some(n) = args.top_words {
                config.top_words = n;
            }
        }
        Command::Sweep(args) => {
            if config.hyperparams.is_none() {
                let grid = config.grid.get_or_insert_with(|| SearchGrid {
                    base_seed: seed.unwrap_or(0),
                    ..SearchGrid::default()
                });
                if let Some(topics) = &args.topics {
                    grid.topics = topics.clone();
                }
            }
            if let Some(n) = args.top_words {
                config.top_words = n;
            }
        }
        Command::Evaluate(args) => {
            if args.heldout.is_some() {
                config.heldout_reviews = args.heldout.clone();
            }
        }
        Command::Report => {}
    }
    config.validate()
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, PipelineError> {
    let mut config = load_config(cli)?;
    apply_command_flags(&mut config, cli)?;
    match cli.command {
        Command::IngestVenues(_) => cmd_ingest_venues(&config),
        Command::Train(_) => cmd_train(&config),
        Command::Evaluate(_) => cmd_evaluate(&config),
        Command::Sweep(_) => cmd_sweep(&config),
        Command::Report => cmd_report(&config),
    }
}

/// Parses `args` (program name first), runs the command and prints the
/// written artifact paths.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_output(args, &mut std::io::stdout())
}

/// As [`run`], listing artifact paths on `out`.
pub fn run_with_output<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for path in paths {
                let _ = writeln!(out, "{}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("greenspace").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = parse(&["train", "--seed", "4", "--out", "o", "-k", "3", "--format", "markdown"]);
        assert_eq!(cli.seed, Some(4));
        assert_eq!(cli.format, Some(ReportFormat::Markdown));
        let mut config = load_config(&cli).unwrap();
        apply_command_flags(&mut config, &cli).unwrap();
        let hp = config.hyperparams.unwrap();
        assert_eq!((hp.seed, hp.topics), (4, 3));
    }

    #[test]
    fn sweep_topics_list() {
        let cli = parse(&["sweep", "--topics", "2,5,10", "--seed", "3"]);
        let mut config = load_config(&cli).unwrap();
        apply_command_flags(&mut config, &cli).unwrap();
        let grid = config.grid.unwrap();
        assert_eq!((grid.topics, grid.base_seed), (vec![2, 5, 10], 3));
    }

    #[test]
    fn bad_flag_values() {
        assert_eq!(run(["greenspace", "ingest-venues", "--popularity", "median"]), 2);
        assert_eq!(run(["greenspace", "train", "--alpha", "lots"]), 2);
        assert_eq!(run(["greenspace", "train", "--beta=-1"]), 2);
        assert_eq!(run(["greenspace", "--help"]), 0);
    }
}
