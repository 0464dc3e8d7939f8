//! Replays the checked-in fuzz corpus through the parsers the fuzz targets
//! exercise.

use std::fs;
use std::path::PathBuf;

use whirly_core::{BorelSet, LevelVector};
use whirly_lab::{parse_shorthand, plan, RunConfig};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&path).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn shorthand_seeds() {
    let results: Vec<(String, bool)> = seeds("set_shorthand")
        .into_iter()
        .map(|(name, text)| (name, parse_shorthand(&text).is_ok()))
        .collect();
    assert!(
        results.iter().any(|r| r.1) && results.iter().any(|r| !r.1),
        "{results:?}"
    );
}

#[test]
fn set_json_seeds_all_parse_and_round_trip() {
    for (name, text) in seeds("set_json") {
        let set = BorelSet::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(
            BorelSet::from_json(&set.to_json()).unwrap().to_json(),
            set.to_json(),
            "{name}"
        );
    }
}

#[test]
fn run_config_seeds() {
    for (name, text) in seeds("run_config") {
        match RunConfig::from_json(&text) {
            Ok(cfg) => assert!(plan(&cfg).is_ok(), "{name}"),
            Err(_) => assert_eq!(name, "unknown_key"),
        }
    }
}

#[test]
fn level_vector_seeds() {
    for (name, text) in seeds("level_vector_json") {
        let parsed = serde_json::from_str::<LevelVector>(&text);
        assert_eq!(parsed.is_ok(), name != "wrong_count", "{name}");
    }
}
