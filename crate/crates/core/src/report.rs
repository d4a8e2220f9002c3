//! Human-readable renderings of topics, district rankings and sweeps.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::eval::EvaluationReport;
use crate::lda::TopicTopWords;
use crate::venues::{PopularityMode, PopularityRanking};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// Decimal string of `x` rounded half away from zero, decided on the exact
/// binary value rather than its shortest printed form.
pub fn round_half_up(x: f64, places: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    // every finite f64 has a terminating decimal expansion of at most 1074 digits
    let exact = format!("{:.1074}", x.abs());
    let (int_part, frac_part) = exact.split_once('.').expect("fixed-point output");
    let mut digits: Vec<u8> = int_part.bytes().chain(frac_part.bytes().take(places)).map(|b| b - b'0').collect();
    if frac_part.as_bytes()[places] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - places;
    let text: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
    let body = if places == 0 {
        text
    } else {
        format!("{}.{}", &text[..split], &text[split..])
    };
    let is_zero = digits.iter().all(|&d| d == 0);
    if x.is_sign_negative() && !is_zero {
        format!("-{body}")
    } else {
        body
    }
}

fn weight(x: f64) -> String {
    round_half_up(x, 3)
}

/// `topic,rank,word,stem,weight`, topics and ranks counted from 1.
pub fn write_topics_csv<W: Write>(topics: &[TopicTopWords], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["topic", "rank", "word", "stem", "weight"])?;
    for topic in topics {
        for (rank, word) in topic.words.iter().enumerate() {
            writer.write_record([
                (topic.topic + 1).to_string(),
                (rank + 1).to_string(),
                word.label.clone(),
                word.token.clone(),
                weight(word.weight),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn cell(text: &str) -> String {
    text.replace('|', "\\|")
}

pub fn write_topics_markdown<W: Write>(topics: &[TopicTopWords], mut out: W) -> io::Result<()> {
    writeln!(out, "| Topic | Keywords and weights |")?;
    writeln!(out, "|---|---|")?;
    for topic in topics {
        let words: Vec<String> = topic
            .words
            .iter()
            .map(|w| format!("\"{}\": {}", cell(&w.label), weight(w.weight)))
            .collect();
        writeln!(out, "| #{} | {} |", topic.topic + 1, words.join(" · "))?;
    }
    Ok(())
}

pub fn write_ranking_markdown<W: Write>(ranking: &PopularityRanking, mut out: W) -> io::Result<()> {
    let mean = ranking.mode == PopularityMode::Mean;
    if mean {
        writeln!(out, "| Rank | District | Total likes | Parks | Mean likes |")?;
        writeln!(out, "|---|---|---|---|---|")?;
    } else {
        writeln!(out, "| Rank | District | Total likes | Parks |")?;
        writeln!(out, "|---|---|---|---|")?;
    }
    for (i, e) in ranking.entries.iter().enumerate() {
        write!(out, "| {} | {} | {} | {} |", i + 1, cell(&e.district), e.total_likes, e.venue_count)?;
        if mean {
            write!(out, " {} |", round_half_up(e.mean_likes(), 3))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Sweep rows with the selected row marked.
pub fn write_evaluation_markdown<W: Write>(report: &EvaluationReport, selected: Option<usize>, mut out: W) -> io::Result<()> {
    writeln!(out, "| α | β | K | Coherence | Perplexity | |")?;
    writeln!(out, "|---|---|---|---|---|---|")?;
    for (i, row) in report.rows.iter().enumerate() {
        let mark = if Some(i) == selected { "selected" } else { "" };
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            row.alpha,
            row.beta,
            row.topics,
            round_half_up(row.coherence, 3),
            round_half_up(row.perplexity, 3),
            mark
        )?;
    }
    Ok(())
}
