use std::path::PathBuf;

use greenspace::corpus::{load_districts, load_reviews};
use greenspace::pipeline::PipelineConfig;
use greenspace::synthetic::{planted_corpus, PlantedSpec};
use greenspace::venues::Fixture;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Set `GREENSPACE_REGENERATE=1` to rewrite the file from the generator.
#[test]
fn planted_reviews_match_generator() {
    let mut expected = Vec::new();
    planted_corpus(&PlantedSpec::default())
        .to_corpus()
        .write_jsonl(&mut expected)
        .unwrap();
    let path = data("planted_reviews.jsonl");
    if std::env::var_os("GREENSPACE_REGENERATE").is_some() {
        std::fs::write(&path, &expected).unwrap();
    }
    assert_eq!(std::fs::read(&path).unwrap(), expected);
    assert_eq!(load_reviews(&path).unwrap().len(), 200);
}

#[test]
fn districts_and_fixture_load() {
    let districts = load_districts(&data("districts.csv")).unwrap();
    assert_eq!(districts.len(), 8);
    let fixture = Fixture::load(&data("venues_fixture.json")).unwrap();
    assert_eq!(fixture.searches.len(), 8);
}

#[test]
fn example_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let config = PipelineConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        for input in [&config.districts, &config.reviews, &config.fixture].into_iter().flatten() {
            assert!(input.exists(), "{}: {}", path.display(), input.display());
        }
        seen += 1;
    }
    assert!(seen >= 3);
}
