//! The checked-in preset configs and golden vectors must match what the
//! code produces. `SSR_FORGE_BLESS=1 cargo test --test fixtures` rewrites them.

use std::path::PathBuf;

use ssr_forge::bench::DatasetConfig;
use ssr_forge::rewards::protocol::{handle_line, ScoreResponse};
use ssr_forge::rewards::vectors::{golden_vectors, GoldenVector, GOLDEN_COUNT, GOLDEN_SEED};

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn check(rel: &str, expected: &str) {
    let path = repo_file(rel);
    if std::env::var_os("SSR_FORGE_BLESS").is_some() {
        std::fs::write(&path, expected).unwrap();
    }
    let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(on_disk == expected, "{rel} is stale; rerun with SSR_FORGE_BLESS=1");
}

#[test]
fn preset_files_match_builtins() {
    for name in ["viubench", "videossr30k"] {
        let cfg = DatasetConfig::preset(name).unwrap();
        check(&format!("presets/{name}.json"), &(cfg.to_json_pretty() + "\n"));
        let loaded = DatasetConfig::load(&repo_file(&format!("presets/{name}.json"))).unwrap();
        assert_eq!(loaded, cfg);
    }
}

fn vectors_text() -> String {
    golden_vectors(GOLDEN_COUNT, GOLDEN_SEED)
        .iter()
        .map(|v| serde_json::to_string(v).unwrap() + "\n")
        .collect()
}

#[test]
fn golden_vectors_are_current() {
    check("test_vectors.jsonl", &vectors_text());
}

#[test]
fn golden_vectors_replay_through_the_protocol() {
    let text = std::fs::read_to_string(repo_file("test_vectors.jsonl")).unwrap();
    let vectors: Vec<GoldenVector> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(vectors.len(), GOLDEN_COUNT);
    let mut unparseable = 0;
    for v in &vectors {
        let got: ScoreResponse = handle_line(&serde_json::to_string(&v.request).unwrap());
        assert_eq!(got.record_id, v.expected.record_id);
        assert!(got.error.is_none() && v.expected.error.is_none());
        assert!((got.smooth - v.expected.smooth).abs() <= 1e-12, "{}", v.request.record_id);
        assert!((got.strict - v.expected.strict).abs() <= 1e-12, "{}", v.request.record_id);
        if v.expected.unparseable {
            unparseable += 1;
            assert_eq!((got.smooth, got.strict), (0.0, 0.0));
        }
    }
    assert!(unparseable > 0);
    let tasks: std::collections::BTreeSet<String> =
        vectors.iter().map(|v| format!("{:?}", v.request.task)).collect();
    assert_eq!(tasks.len(), 3);
}
