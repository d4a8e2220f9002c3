use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use greenspace::eval::Window;
use greenspace::lda::Alpha;
use greenspace::synthetic::{planted_corpus, PlantedSpec};
use greenspace::tuning::{grid_search, SearchGrid};
use greenspace::vectorize::{to_bow, Vocabulary};

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn greenspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greenspace"))
        .args(args)
        .env_remove("VENUE_CLIENT_ID")
        .env_remove("VENUE_CLIENT_SECRET")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

#[test]
fn conflicting_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"hyperparams": {"topics": 2}, "grid": {"topics": [2]}}"#);
    let out = greenspace(&["train", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("conflicting"), "{}", stderr(&out));
}

#[test]
fn unreadable_config_and_bad_flags_exit_2() {
    assert_eq!(greenspace(&["train", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(greenspace(&["sweep", "--topics", "two"]).status.code(), Some(2));
    assert_eq!(greenspace(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(greenspace(&["--help"]).status.code(), Some(0));
}

#[test]
fn stopword_only_corpus_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let reviews = dir.path().join("reviews.jsonl");
    let line = |body: &str| {
        format!(r#"{{"title":"","body":"{body}","rating":4,"reviewer_location":null,"date":"2019-05-01","venue_id":"v"}}"#)
    };
    fs::write(&reviews, [line("the and of it was"), line("we were there, it is what it is")].join("\n")).unwrap();
    let config = write_config(
        dir.path(),
        &format!(r#"{{"reviews": "{}", "prep": {{"english_filter": false}}}}"#, path_str(&reviews)),
    );
    let out = greenspace(&["train", "--config", &config, "--out", &path_str(&dir.path().join("out"))]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("empty corpus"), "{}", stderr(&out));
}

#[test]
fn planted_train_recovers_blocks_and_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path_str(dir.path());
    let config = path_str(&manifest("configs/planted_train.json"));
    let out = greenspace(&["train", "--config", &config, "--out", &out_dir, "--top-words", "10"]);
    assert!(out.status.success(), "{}", stderr(&out));

    let planted = planted_corpus(&PlantedSpec::default());
    let topics = fs::read_to_string(dir.path().join("topics.csv")).unwrap();
    let mut per_topic: Vec<Vec<String>> = vec![Vec::new(); 2];
    for line in topics.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        per_topic[fields[0].parse::<usize>().unwrap() - 1].push(fields[2].to_string());
    }
    let mut matched: Vec<usize> = per_topic
        .iter()
        .map(|words| {
            let block = planted.blocks.iter().position(|b| b.contains(&words[0])).unwrap();
            assert!(words.iter().all(|w| planted.blocks[block].contains(w)), "{words:?}");
            block
        })
        .collect();
    matched.sort();
    assert_eq!(matched, vec![0, 1]);

    let out = greenspace(&["evaluate", "--config", &config, "--out", &out_dir]);
    assert!(out.status.success(), "{}", stderr(&out));
    let evaluation = fs::read_to_string(dir.path().join("evaluation.csv")).unwrap();
    let lines: Vec<&str> = evaluation.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("symmetric,0.01,2,"), "{}", lines[1]);

    let out = greenspace(&["report", "--config", &config, "--out", &out_dir, "--format", "markdown"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let md = fs::read_to_string(dir.path().join("topics.md")).unwrap();
    assert!(md.starts_with("| Topic | Keywords and weights |"));
}

#[test]
fn report_without_artifacts_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = greenspace(&["report", "--out", &path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn single_cell_grid_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &format!(
            r#"{{"reviews": "{}", "prep": {{"english_filter": false}},
                "grid": {{"alphas": [0.1], "betas": [0.2], "topics": [2], "iterations": 50, "burn_in": 10}}}}"#,
            path_str(&manifest("data/planted_reviews.jsonl"))
        ),
    );
    let out = greenspace(&["sweep", "--config", &config, "--out", &path_str(&dir.path().join("out"))]);
    assert!(out.status.success(), "{}", stderr(&out));
    let sweep = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "alpha,beta,k,coherence,perplexity,coherence_pmi,coherence_umass,exp_perplexity");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0.1,0.2,2,"));
    assert!(dir.path().join("out/model.json").exists());
}

#[test]
fn default_grid_has_eight_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &format!(
            r#"{{"reviews": "{}", "prep": {{"english_filter": false}}, "grid": {{"iterations": 40, "burn_in": 10}}}}"#,
            path_str(&manifest("data/planted_reviews.jsonl"))
        ),
    );
    let out = greenspace(&["sweep", "--config", &config, "--out", &path_str(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let alphas: Vec<&str> = sweep.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(alphas, ["symmetric", "symmetric", "0.05", "0.05", "0.1", "0.1", "0.2", "0.2"]);
    assert!(sweep.lines().skip(1).all(|l| l.split(',').nth(2) == Some("5")));
}

fn ingest_config(dir: &Path, districts: &Path, fixture: &Path) -> String {
    write_config(
        dir,
        &format!(
            r#"{{"districts": "{}", "fixture": "{}", "out": "{}"}}"#,
            path_str(districts),
            path_str(fixture),
            path_str(&dir.join("out"))
        ),
    )
}

#[test]
fn empty_district_file() {
    let dir = tempfile::tempdir().unwrap();
    let districts = dir.path().join("districts.csv");
    let config = ingest_config(dir.path(), &districts, &manifest("data/venues_fixture.json"));
    for contents in ["", "district,area,lat,lon\n"] {
        fs::write(&districts, contents).unwrap();
        let out = greenspace(&["ingest-venues", "--config", &config]);
        assert_eq!(out.status.code(), Some(3));
        assert!(stderr(&out).contains("no districts"), "{}", stderr(&out));
    }
}

#[test]
fn fixture_missing_district_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let districts = dir.path().join("districts.csv");
    let mut text = fs::read_to_string(manifest("data/districts.csv")).unwrap();
    text.push_str("Dublin 7,Northside,53.355000,-6.280000\n");
    fs::write(&districts, text).unwrap();
    let config = ingest_config(dir.path(), &districts, &manifest("data/venues_fixture.json"));
    let out = greenspace(&["ingest-venues", "--config", &config]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("Dublin 7"), "{}", stderr(&out));
    assert!(!dir.path().join("out/ranking.csv").exists());
}

#[test]
fn mean_popularity_adds_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = ingest_config(dir.path(), &manifest("data/districts.csv"), &manifest("data/venues_fixture.json"));
    let out = greenspace(&["ingest-venues", "--config", &config, "--popularity", "mean"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let ranking = fs::read_to_string(dir.path().join("out/ranking.csv")).unwrap();
    let lines: Vec<&str> = ranking.lines().collect();
    assert!(lines[0].ends_with(",mean_likes"), "{}", lines[0]);
    assert!(lines[1].starts_with("Dublin 8,696,1,696.000"), "{}", lines[1]);
}

#[test]
fn live_mode_without_credentials_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = ingest_config(dir.path(), &manifest("data/districts.csv"), &manifest("data/venues_fixture.json"));
    let out = greenspace(&["ingest-venues", "--config", &config, "--live", "--base-url", "http://127.0.0.1:9"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn live_backend_failure_exits_4() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        if let Ok((stream, _)) = listener.accept() {
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap_or(0) > 2 {
                line.clear();
            }
            let mut stream = stream;
            let _ = stream.write_all(b"HTTP/1.1 500 Internal Server Error\r\ncontent-length: 0\r\nconnection: close\r\n\r\n");
        }
    });
    let dir = tempfile::tempdir().unwrap();
    let districts = dir.path().join("districts.csv");
    fs::write(&districts, "district,area,lat,lon\nDublin 2,Southside,53.338940,-6.252713\n").unwrap();
    let config = ingest_config(dir.path(), &districts, &manifest("data/venues_fixture.json"));
    let out = Command::new(env!("CARGO_BIN_EXE_greenspace"))
        .args(["ingest-venues", "--config", &config, "--live", "--base-url", &format!("http://{addr}")])
        .env("VENUE_CLIENT_ID", "id")
        .env("VENUE_CLIENT_SECRET", "secret")
        .output()
        .unwrap();
    server.join().unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn planted_k_beats_larger_k() {
    let planted = planted_corpus(&PlantedSpec::default());
    let vocab = Vocabulary::build(&planted.docs).unwrap();
    let bows: Vec<_> = planted.docs.iter().map(|d| to_bow(d, &vocab)).collect();
    let mut grid = SearchGrid {
        alphas: vec![Alpha::Symmetric],
        betas: vec![0.01],
        topics: vec![2, 5, 10],
        base_seed: 3,
        ..SearchGrid::default()
    };
    grid.evaluation.window = Window::Document;
    let outcome = grid_search(&planted.docs, &bows, &vocab, &grid).unwrap();
    let rows = &outcome.report.rows;
    for larger in &rows[1..] {
        assert!(larger.topics > 4);
        assert!(rows[0].coherence >= larger.coherence, "K=2 {} vs K={} {}", rows[0].coherence, larger.topics, larger.coherence);
    }
    assert_eq!(rows[outcome.selected].topics, 2);
}
