//! Districts, venues and reviews: the data every other module consumes.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: expected header `district,area,lat,lon`, found `{found}`")]
    BadHeader { path: String, found: String },
    #[error("{path}: row {row}: {message}")]
    MalformedRow {
        path: String,
        row: u64,
        message: String,
    },
    #[error("{path}: row {row}: coordinate out of range ({lat}, {lon})")]
    CoordinateOutOfRange {
        path: String,
        row: u64,
        lat: f64,
        lon: f64,
    },
    #[error("{path}: row {row}: duplicate district `{name}`")]
    DuplicateDistrict { path: String, row: u64, name: String },
    #[error("{path}: line {line}: {message}")]
    InvalidReview {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: empty corpus")]
    EmptyCorpus { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Area {
    Northside,
    Southside,
}

impl std::str::FromStr for Area {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Northside" => Ok(Area::Northside),
            "Southside" => Ok(Area::Southside),
            other => Err(format!("unknown area `{other}`")),
        }
    }
}

/// A postal district with its centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct District {
    pub name: String,
    pub area: Area,
    pub latitude: f64,
    pub longitude: f64,
}

impl District {
    pub fn coordinates_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.latitude) && (-180.0..=180.0).contains(&self.longitude)
    }
}

/// A park returned by the venue search, tagged with the district whose query found it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Venue {
    pub id: String,
    pub name: String,
    pub district: String,
    pub likes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub title: String,
    pub body: String,
    pub rating: u8,
    #[serde(default)]
    pub reviewer_location: Option<String>,
    #[serde(with = "review_date")]
    pub date: NaiveDate,
    pub venue_id: String,
}

impl Review {
    /// Title and body as one text unit.
    pub fn text(&self) -> String {
        format!("{} {}", self.title, self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub reviews: Vec<Review>,
    pub source_label: String,
}

impl Corpus {
    pub fn new(source_label: impl Into<String>, reviews: Vec<Review>) -> Self {
        Corpus {
            reviews,
            source_label: source_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = String> + '_ {
        self.reviews.iter().map(Review::text)
    }

    /// Keeps reviews dated within `[since, until]`; either bound may be open.
    pub fn retain_dates(&mut self, since: Option<NaiveDate>, until: Option<NaiveDate>) {
        self.reviews.retain(|r| {
            since.is_none_or(|s| r.date >= s) && until.is_none_or(|u| r.date <= u)
        });
    }

    /// Writes the corpus as JSON Lines with ISO-8601 dates.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for review in &self.reviews {
            serde_json::to_writer(&mut out, review)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Accepts `YYYY-MM-DD` and `DD-MM-YYYY`.
pub fn parse_review_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(raw, "%d-%m-%Y"))
        .ok()
}

mod review_date {
    use chrono::NaiveDate;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(date: &NaiveDate, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&date.format("%Y-%m-%d").to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_review_date(&raw)
            .ok_or_else(|| serde::de::Error::custom(format!("unparseable date `{raw}`")))
    }
}

#[derive(Deserialize)]
struct RawReview {
    #[serde(default)]
    title: String,
    body: String,
    rating: i64,
    #[serde(default)]
    reviewer_location: Option<String>,
    date: String,
    #[serde(default)]
    venue_id: String,
}

impl RawReview {
    fn validate(self) -> Result<Review, String> {
        if !(1..=5).contains(&self.rating) {
            return Err(format!("rating {} outside 1-5", self.rating));
        }
        if self.body.trim().is_empty() {
            return Err("empty body".to_string());
        }
        let date = parse_review_date(&self.date)
            .ok_or_else(|| format!("unparseable date `{}`", self.date))?;
        Ok(Review {
            title: self.title,
            body: self.body,
            rating: self.rating as u8,
            reviewer_location: self.reviewer_location,
            date,
            venue_id: self.venue_id,
        })
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_districts(path: &Path) -> Result<Vec<District>, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_districts(file, &path.display().to_string())
}

pub fn read_districts<R: std::io::Read>(input: R, label: &str) -> Result<Vec<District>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| CorpusError::MalformedRow {
            path: label.to_string(),
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.is_empty() {
        return Ok(Vec::new());
    }
    if header.iter().collect::<Vec<_>>() != ["district", "area", "lat", "lon"] {
        return Err(CorpusError::BadHeader {
            path: label.to_string(),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut districts: Vec<District> = Vec::new();
    for (index, record) in reader.records().enumerate() {
        // header is row 1
        let row = index as u64 + 2;
        let malformed = |message: String| CorpusError::MalformedRow {
            path: label.to_string(),
            row,
            message,
        };
        let record = record.map_err(|e| malformed(e.to_string()))?;
        if record.len() != 4 {
            return Err(malformed(format!("expected 4 fields, found {}", record.len())));
        }
        let name = record[0].to_string();
        if name.is_empty() {
            return Err(malformed("empty district name".into()));
        }
        let area = record[1].parse::<Area>().map_err(malformed)?;
        let lat = record[2]
            .parse::<f64>()
            .map_err(|e| malformed(format!("latitude: {e}")))?;
        let lon = record[3]
            .parse::<f64>()
            .map_err(|e| malformed(format!("longitude: {e}")))?;
        let district = District {
            name,
            area,
            latitude: lat,
            longitude: lon,
        };
        if !district.coordinates_valid() {
            return Err(CorpusError::CoordinateOutOfRange {
                path: label.to_string(),
                row,
                lat,
                lon,
            });
        }
        if districts.iter().any(|d| d.name == district.name) {
            return Err(CorpusError::DuplicateDistrict {
                path: label.to_string(),
                row,
                name: district.name,
            });
        }
        districts.push(district);
    }
    Ok(districts)
}

pub fn load_reviews(path: &Path) -> Result<Corpus, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut corpus = read_reviews(BufReader::new(file), &path.display().to_string())?;
    corpus.source_label = label;
    Ok(corpus)
}

/// Parses JSON Lines; blank lines are skipped, line numbers in errors are 1-based.
pub fn read_reviews<R: BufRead>(input: R, label: &str) -> Result<Corpus, CorpusError> {
    let mut reviews = Vec::new();
    for (index, line) in input.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| CorpusError::Io {
            path: label.to_string(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let invalid = |message: String| CorpusError::InvalidReview {
            path: label.to_string(),
            line: line_no,
            message,
        };
        let raw: RawReview = serde_json::from_str(&line).map_err(|e| invalid(e.to_string()))?;
        reviews.push(raw.validate().map_err(invalid)?);
    }
    if reviews.is_empty() {
        return Err(CorpusError::EmptyCorpus {
            path: label.to_string(),
        });
    }
    Ok(Corpus::new(label, reviews))
}

impl fmt::Display for Area {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Area::Northside => f.write_str("Northside"),
            Area::Southside => f.write_str("Southside"),
        }
    }
}
