//! Park discovery and popularity per postal district, against a venue-search
//! API or a canned fixture of its responses.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{District, Venue};

pub const DEFAULT_RADIUS_M: u32 = 1200;
pub const DEFAULT_QUERY: &str = "park";
pub const CLIENT_ID_VAR: &str = "VENUE_CLIENT_ID";
pub const CLIENT_SECRET_VAR: &str = "VENUE_CLIENT_SECRET";

#[derive(Debug, Error)]
pub enum VenueError {
    #[error("venue client configuration: {0}")]
    Config(String),
    #[error("reading fixture {path}: {message}")]
    Fixture { path: String, message: String },
    #[error("no fixture response for {district} (key {key})")]
    FixtureMiss { district: String, key: String },
    #[error("venue not found: {0}")]
    VenueNotFound(String),
    #[error("request failed: {0}")]
    Transport(String),
    #[error("API returned status {status} for {what}")]
    Status { status: u16, what: String },
    #[error("malformed response for {what}: {message}")]
    Malformed { what: String, message: String },
    #[error("no districts")]
    NoDistricts,
    #[error("{} district(s) failed: {}", .0.len(), list_failures(.0))]
    Partial(Vec<(String, VenueError)>),
}

fn list_failures(failures: &[(String, VenueError)]) -> String {
    failures
        .iter()
        .map(|(district, e)| format!("{district} ({e})"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl VenueError {
    /// True when the fault lies with the backend rather than local input.
    pub fn is_backend(&self) -> bool {
        match self {
            VenueError::Transport(_) | VenueError::Status { .. } | VenueError::Malformed { .. } => true,
            VenueError::Partial(failures) => failures.iter().any(|(_, e)| e.is_backend()),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct SearchResponse {
    #[serde(default)]
    pub meta: Option<Meta>,
    pub response: SearchBody,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct Meta {
    pub code: u16,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct SearchBody {
    #[serde(default)]
    pub venues: Vec<RawVenue>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RawVenue {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct Category {
    pub name: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct LikesResponse {
    pub response: LikesBody,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct LikesBody {
    pub likes: LikeCount,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct LikeCount {
    pub count: u64,
}

/// Canned responses keyed by `lat,lon,radius,query` (coordinates to 4
/// decimals) and by venue id.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
pub struct Fixture {
    pub searches: BTreeMap<String, SearchResponse>,
    pub likes: BTreeMap<String, LikesResponse>,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Self, VenueError> {
        let fail = |message: String| VenueError::Fixture {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| fail(e.to_string()))
    }
}

pub fn fixture_key(latitude: f64, longitude: f64, radius: u32, query: &str) -> String {
    format!("{latitude:.4},{longitude:.4},{radius},{query}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credentials {
    pub client_id: String,
    pub client_secret: String,
}

impl Credentials {
    pub fn from_env() -> Result<Self, VenueError> {
        Self::from_lookup(|name| std::env::var(name).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, VenueError> {
        let get = |name: &str| {
            lookup(name)
                .filter(|v| !v.trim().is_empty())
                .ok_or_else(|| VenueError::Config(format!("{name} is not set")))
        };
        Ok(Credentials {
            client_id: get(CLIENT_ID_VAR)?,
            client_secret: get(CLIENT_SECRET_VAR)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub base_url: String,
    pub credentials: Credentials,
    /// API version date sent as `v`.
    pub version: String,
    pub min_delay: Duration,
    pub limit: Option<u32>,
    pub timeout: Duration,
}

impl LiveConfig {
    pub fn new(base_url: impl Into<String>, credentials: Credentials) -> Self {
        LiveConfig {
            base_url: base_url.into(),
            credentials,
            version: "20200101".into(),
            min_delay: Duration::from_millis(500),
            limit: None,
            timeout: Duration::from_secs(30),
        }
    }
}

struct Live {
    config: LiveConfig,
    http: reqwest::blocking::Client,
    last_request: Option<Instant>,
}

enum Backend {
    Fixture(Fixture),
    Live(Box<Live>),
}

pub struct VenueApiClient {
    backend: Backend,
    query: String,
}

impl VenueApiClient {
    pub fn fixture(fixture: Fixture) -> Self {
        VenueApiClient {
            backend: Backend::Fixture(fixture),
            query: DEFAULT_QUERY.into(),
        }
    }

    pub fn live(config: LiveConfig) -> Result<Self, VenueError> {
        if config.base_url.trim().is_empty() {
            return Err(VenueError::Config("live mode needs a base URL".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| VenueError::Config(e.to_string()))?;
        Ok(VenueApiClient {
            backend: Backend::Live(Box::new(Live {
                config,
                http,
                last_request: None,
            })),
            query: DEFAULT_QUERY.into(),
        })
    }

    pub fn with_query(mut self, query: impl Into<String>) -> Self {
        self.query = query.into();
        self
    }

    pub fn query(&self) -> &str {
        &self.query
    }

    pub fn is_live(&self) -> bool {
        matches!(self.backend, Backend::Live(_))
    }

    fn search(&mut self, district: &District, radius: u32) -> Result<SearchResponse, VenueError> {
        let query = self.query.clone();
        match &mut self.backend {
            Backend::Fixture(fixture) => {
                let key = fixture_key(district.latitude, district.longitude, radius, &query);
                fixture.searches.get(&key).cloned().ok_or(VenueError::FixtureMiss {
                    district: district.name.clone(),
                    key,
                })
            }
            Backend::Live(live) => {
                let mut params = vec![
                    ("ll", format!("{},{}", district.latitude, district.longitude)),
                    ("radius", radius.to_string()),
                    ("query", query),
                ];
                if let Some(limit) = live.config.limit {
                    params.push(("limit", limit.to_string()));
                }
                let body = live.get("venues/search", params, &format!("search in {}", district.name))?;
                parse(&body, &format!("search in {}", district.name))
            }
        }
    }

    fn likes(&mut self, venue_id: &str) -> Result<LikesResponse, VenueError> {
        match &mut self.backend {
            Backend::Fixture(fixture) => fixture
                .likes
                .get(venue_id)
                .cloned()
                .ok_or_else(|| VenueError::VenueNotFound(venue_id.to_string())),
            Backend::Live(live) => {
                let what = format!("likes of {venue_id}");
                match live.get(&format!("venues/{venue_id}/likes"), vec![], &what) {
                    Err(VenueError::Status { status: 404, .. }) => Err(VenueError::VenueNotFound(venue_id.to_string())),
                    other => parse(&other?, &what),
                }
            }
        }
    }
}

impl Live {
    fn get(&mut self, path: &str, mut params: Vec<(&str, String)>, what: &str) -> Result<String, VenueError> {
        if let Some(last) = self.last_request {
            let wait = self.config.min_delay.saturating_sub(last.elapsed());
            if !wait.is_zero() {
                std::thread::sleep(wait);
            }
        }
        params.push(("client_id", self.config.credentials.client_id.clone()));
        params.push(("client_secret", self.config.credentials.client_secret.clone()));
        params.push(("v", self.config.version.clone()));
        let url = format!("{}/{}", self.config.base_url.trim_end_matches('/'), path);
        log::debug!("GET {url}");
        let result = self.http.get(&url).query(&params).send();
        self.last_request = Some(Instant::now());
        let response = result.map_err(|e| VenueError::Transport(e.without_url().to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(VenueError::Status {
                status: status.as_u16(),
                what: what.to_string(),
            });
        }
        response
            .text()
            .map_err(|e| VenueError::Transport(e.without_url().to_string()))
    }
}

fn parse<T: for<'de> Deserialize<'de>>(body: &str, what: &str) -> Result<T, VenueError> {
    serde_json::from_str(body).map_err(|e| VenueError::Malformed {
        what: what.to_string(),
        message: e.to_string(),
    })
}

fn matches_query(venue: &RawVenue, query: &str) -> bool {
    let query = query.to_lowercase();
    venue.name.to_lowercase().contains(&query) || venue.categories.iter().any(|c| c.name.to_lowercase().contains(&query))
}

/// Venues near the district whose name or a category matches the client's
/// query, tagged with the district. Likes are left at zero.
pub fn search_venues(district: &District, radius: u32, client: &mut VenueApiClient) -> Result<Vec<Venue>, VenueError> {
    if radius == 0 {
        return Err(VenueError::Config("radius must be positive".into()));
    }
    let response = client.search(district, radius)?;
    let mut seen = BTreeSet::new();
    Ok(response
        .response
        .venues
        .into_iter()
        .filter(|v| matches_query(v, client.query()))
        .filter(|v| seen.insert(v.id.clone()))
        .map(|v| Venue {
            id: v.id,
            name: v.name,
            district: district.name.clone(),
            likes: 0,
        })
        .collect())
}

pub fn fetch_likes(venue_id: &str, client: &mut VenueApiClient) -> Result<u64, VenueError> {
    Ok(client.likes(venue_id)?.response.likes.count)
}

/// Searches every district in order, keeps the first district that returns
/// each venue, then fills in likes. Districts that fail are collected and
/// reported together.
pub fn collect_venues(districts: &[District], radius: u32, client: &mut VenueApiClient) -> Result<Vec<Venue>, VenueError> {
    if districts.is_empty() {
        return Err(VenueError::NoDistricts);
    }
    let mut seen = BTreeSet::new();
    let mut venues = Vec::new();
    let mut failures = Vec::new();
    for district in districts {
        match search_venues(district, radius, client) {
            Ok(found) => venues.extend(found.into_iter().filter(|v| seen.insert(v.id.clone()))),
            Err(e @ VenueError::Config(_)) => return Err(e),
            Err(e) => failures.push((district.name.clone(), e)),
        }
    }
    if !failures.is_empty() {
        return Err(VenueError::Partial(failures));
    }
    for venue in &mut venues {
        venue.likes = fetch_likes(&venue.id, client)?;
    }
    Ok(venues)
}

/// How districts are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopularityMode {
    /// Total likes over the district's parks.
    #[default]
    Sum,
    /// Mean likes per park.
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingEntry {
    pub district: String,
    pub total_likes: u64,
    pub venue_count: usize,
}

impl RankingEntry {
    pub fn mean_likes(&self) -> f64 {
        if self.venue_count == 0 {
            0.0
        } else {
            self.total_likes as f64 / self.venue_count as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopularityRanking {
    pub mode: PopularityMode,
    pub entries: Vec<RankingEntry>,
}

pub fn aggregate_popularity(venues: &[Venue], mode: PopularityMode) -> PopularityRanking {
    let mut per_district: BTreeMap<&str, (u64, usize)> = BTreeMap::new();
    for venue in venues {
        let slot = per_district.entry(&venue.district).or_default();
        slot.0 += venue.likes;
        slot.1 += 1;
    }
    let mut entries: Vec<RankingEntry> = per_district
        .into_iter()
        .map(|(district, (total_likes, venue_count))| RankingEntry {
            district: district.to_string(),
            total_likes,
            venue_count,
        })
        .collect();
    // entries arrive name-ascending, and the sort is stable
    match mode {
        PopularityMode::Sum => entries.sort_by_key(|e| std::cmp::Reverse(e.total_likes)),
        PopularityMode::Mean => entries.sort_by(|a, b| b.mean_likes().total_cmp(&a.mean_likes())),
    }
    PopularityRanking { mode, entries }
}

impl PopularityRanking {
    /// `district,total_likes,venue_count`, plus `mean_likes` in mean mode.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["district", "total_likes", "venue_count"];
        if self.mode == PopularityMode::Mean {
            header.push("mean_likes");
        }
        writer.write_record(&header)?;
        for entry in &self.entries {
            let mut record = vec![
                entry.district.clone(),
                entry.total_likes.to_string(),
                entry.venue_count.to_string(),
            ];
            if self.mode == PopularityMode::Mean {
                record.push(format!("{:.3}", entry.mean_likes()));
            }
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// `id,name,district,likes`
pub fn write_venues_csv<W: Write>(venues: &[Venue], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["id", "name", "district", "likes"])?;
    for v in venues {
        writer.write_record([v.id.as_str(), v.name.as_str(), v.district.as_str(), &v.likes.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_districts, Area};
    use proptest::prelude::*;
    use std::io::{BufRead, BufReader};
    use std::net::TcpListener;
    use std::sync::mpsc;

    fn bundled_fixture() -> Fixture {
        serde_json::from_str(include_str!("../data/venues_fixture.json")).unwrap()
    }

    fn bundled_districts() -> Vec<District> {
        read_districts(include_str!("../data/districts.csv").as_bytes(), "districts.csv").unwrap()
    }

    fn district(name: &str) -> District {
        bundled_districts().into_iter().find(|d| d.name == name).unwrap()
    }

    fn venue(district: &str, likes: u64) -> Venue {
        Venue {
            id: format!("{district}-{likes}"),
            name: "p".into(),
            district: district.into(),
            likes,
        }
    }

    #[test]
    fn key_rounds_to_four_decimals() {
        assert_eq!(fixture_key(53.33894, -6.252713, 1200, "park"), "53.3389,-6.2527,1200,park");
    }

    #[test]
    fn finds_green_in_dublin_2() {
        let mut client = VenueApiClient::fixture(bundled_fixture());
        let found = search_venues(&district("Dublin 2"), 1200, &mut client).unwrap();
        let green = found.iter().find(|v| v.name == "St Stephen's Green").unwrap();
        assert_eq!(green.district, "Dublin 2");
        assert_eq!(fetch_likes(&green.id, &mut client).unwrap(), 1191);
    }

    #[test]
    fn empty_search_and_query_filter() {
        let mut client = VenueApiClient::fixture(bundled_fixture());
        assert!(search_venues(&district("Dublin 3"), 1200, &mut client).unwrap().is_empty());
        // the cafe near Dublin 6 is not a park
        let d6 = search_venues(&district("Dublin 6"), 1200, &mut client).unwrap();
        assert!(d6.iter().all(|v| v.name != "The Green Kitchen"));
    }

    #[test]
    fn fixture_errors() {
        let mut client = VenueApiClient::fixture(bundled_fixture());
        let nowhere = District {
            name: "Dublin 24".into(),
            area: Area::Southside,
            latitude: 53.28,
            longitude: -6.37,
        };
        assert!(matches!(
            search_venues(&nowhere, 1200, &mut client),
            Err(VenueError::FixtureMiss { district, .. }) if district == "Dublin 24"
        ));
        assert!(matches!(
            search_venues(&district("Dublin 2"), 800, &mut client),
            Err(VenueError::FixtureMiss { .. })
        ));
        assert!(matches!(search_venues(&district("Dublin 2"), 0, &mut client), Err(VenueError::Config(_))));
        let err = fetch_likes("nope", &mut client).unwrap_err();
        assert_eq!(err.to_string(), "venue not found: nope");
    }

    #[test]
    fn phoenix_park_likes() {
        let mut client = VenueApiClient::fixture(bundled_fixture());
        let found = search_venues(&district("Dublin 8"), 1200, &mut client).unwrap();
        let phoenix = found.iter().find(|v| v.name.contains("Phoenix")).unwrap();
        assert_eq!(fetch_likes(&phoenix.id, &mut client).unwrap(), 696);
    }

    #[test]
    fn replay_of_bundled_districts() {
        let mut client = VenueApiClient::fixture(bundled_fixture());
        let venues = collect_venues(&bundled_districts(), 1200, &mut client).unwrap();
        assert_eq!(venues.len(), 8);
        let ranking = aggregate_popularity(&venues, PopularityMode::Sum);
        let top: Vec<(&str, u64)> = ranking.entries.iter().map(|e| (e.district.as_str(), e.total_likes)).collect();
        assert_eq!(
            top,
            vec![
                ("Dublin 2", 1776),
                ("Dublin 8", 696),
                ("Dublin 4", 159),
                ("Dublin 5", 94),
                ("Dublin 1", 48),
                ("Dublin 6W", 48),
            ]
        );
        // St Stephen's Green also lies within reach of Dublin 6, but Dublin 2 asked first
        assert!(venues.iter().all(|v| v.district != "Dublin 6"));
    }

    #[test]
    fn partial_failure_names_district() {
        let mut fixture = bundled_fixture();
        let d5 = district("Dublin 5");
        fixture
            .searches
            .remove(&fixture_key(d5.latitude, d5.longitude, 1200, "park"));
        let mut client = VenueApiClient::fixture(fixture);
        let err = collect_venues(&bundled_districts(), 1200, &mut client).unwrap_err();
        assert!(matches!(&err, VenueError::Partial(f) if f.len() == 1 && f[0].0 == "Dublin 5"));
        assert!(err.to_string().contains("Dublin 5"));
        assert!(!err.is_backend());
        assert!(matches!(collect_venues(&[], 1200, &mut client), Err(VenueError::NoDistricts)));
    }

    #[test]
    fn aggregation_rules() {
        assert!(aggregate_popularity(&[], PopularityMode::Sum).entries.is_empty());
        let tied = aggregate_popularity(&[venue("B", 5), venue("A", 5)], PopularityMode::Sum);
        assert_eq!(tied.entries[0].district, "A");
        let venues = [venue("A", 100), venue("A", 2), venue("B", 60)];
        let sum = aggregate_popularity(&venues, PopularityMode::Sum);
        assert_eq!(sum.entries[0].district, "A");
        let mean = aggregate_popularity(&venues, PopularityMode::Mean);
        assert_eq!(mean.entries[0].district, "B");
        let mut buf = Vec::new();
        mean.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "district,total_likes,venue_count,mean_likes\nB,60,1,60.000\nA,102,2,51.000\n"
        );
    }

    #[test]
    fn csv_shapes() {
        let venues = [Venue {
            id: "x1".into(),
            name: "St Stephen's Green".into(),
            district: "Dublin 2".into(),
            likes: 1191,
        }];
        let mut buf = Vec::new();
        write_venues_csv(&venues, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "id,name,district,likes\nx1,St Stephen's Green,Dublin 2,1191\n"
        );
        let mut buf = Vec::new();
        aggregate_popularity(&venues, PopularityMode::Sum).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "district,total_likes,venue_count\nDublin 2,1191,1\n");
    }

    #[test]
    fn credentials_required() {
        let err = Credentials::from_lookup(|_| None).unwrap_err();
        assert!(matches!(err, VenueError::Config(m) if m.contains(CLIENT_ID_VAR)));
        let only_id = |k: &str| (k == CLIENT_ID_VAR).then(|| "id".to_string());
        assert!(matches!(Credentials::from_lookup(only_id), Err(VenueError::Config(m)) if m.contains(CLIENT_SECRET_VAR)));
        let both = Credentials::from_lookup(|k| Some(format!("{k}-value"))).unwrap();
        assert_eq!(both.client_id, "VENUE_CLIENT_ID-value");
    }

    /// Serves canned `(status, body)` replies in order and reports each
    /// request line.
    fn mock_server(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for (status, body) in replies {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                }
                tx.send(request_line.trim().to_string()).unwrap();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (url, rx)
    }

    fn live_client(url: &str) -> VenueApiClient {
        let mut config = LiveConfig::new(
            url,
            Credentials {
                client_id: "cid".into(),
                client_secret: "secret".into(),
            },
        );
        config.min_delay = Duration::from_millis(50);
        config.limit = Some(20);
        VenueApiClient::live(config).unwrap()
    }

    #[test]
    fn live_round_trip() {
        let search = r#"{"meta":{"code":200},"response":{"venues":[{"id":"v1","name":"Herbert Park","categories":[{"name":"Park"}]}]}}"#;
        let likes = r#"{"response":{"likes":{"count":159}}}"#;
        let (url, requests) = mock_server(vec![(200, search.into()), (200, likes.into()), (404, "{}".into())]);
        let mut client = live_client(&url);
        assert!(client.is_live());
        let started = Instant::now();
        let found = search_venues(&district("Dublin 4"), 1200, &mut client).unwrap();
        assert_eq!(found[0].name, "Herbert Park");
        assert_eq!(found[0].district, "Dublin 4");
        assert_eq!(fetch_likes("v1", &mut client).unwrap(), 159);
        assert!(matches!(fetch_likes("v2", &mut client), Err(VenueError::VenueNotFound(id)) if id == "v2"));
        assert!(started.elapsed() >= Duration::from_millis(100));

        let first = requests.recv().unwrap();
        assert!(first.starts_with("GET /venues/search?"), "{first}");
        for part in ["radius=1200", "query=park", "limit=20", "client_id=cid", "client_secret=secret", "v=20200101"] {
            assert!(first.contains(part), "{first} lacks {part}");
        }
        assert!(requests.recv().unwrap().starts_with("GET /venues/v1/likes?"));
    }

    #[test]
    fn live_backend_failures() {
        let (url, _requests) = mock_server(vec![(500, "{}".into()), (200, "not json".into())]);
        let mut client = live_client(&url);
        let err = search_venues(&district("Dublin 4"), 1200, &mut client).unwrap_err();
        assert!(matches!(err, VenueError::Status { status: 500, .. }));
        assert!(err.is_backend());
        let err = search_venues(&district("Dublin 4"), 1200, &mut client).unwrap_err();
        assert!(matches!(err, VenueError::Malformed { .. }));
    }

    proptest! {
        #[test]
        fn ranking_sums_and_ignores_order(
            raw in prop::collection::vec((0usize..5, 0u64..2000), 0..30),
            seed in any::<u64>(),
        ) {
            let venues: Vec<Venue> = raw
                .iter()
                .enumerate()
                .map(|(i, &(d, likes))| Venue {
                    id: i.to_string(),
                    name: "p".into(),
                    district: format!("Dublin {d}"),
                    likes,
                })
                .collect();
            let ranking = aggregate_popularity(&venues, PopularityMode::Sum);
            let total: u64 = ranking.entries.iter().map(|e| e.total_likes).sum();
            prop_assert_eq!(total, venues.iter().map(|v| v.likes).sum::<u64>());
            for pair in ranking.entries.windows(2) {
                prop_assert!(
                    pair[0].total_likes > pair[1].total_likes
                        || (pair[0].total_likes == pair[1].total_likes && pair[0].district < pair[1].district)
                );
            }
            let mut shuffled = venues.clone();
            let mut rng = crate::lda::rng::SeededRng::new(seed);
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.below(i + 1));
            }
            prop_assert_eq!(aggregate_popularity(&shuffled, PopularityMode::Sum), ranking);
        }
    }
}
