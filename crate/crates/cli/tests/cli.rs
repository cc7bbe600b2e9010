use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssr-forge"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const TINY: &str = r#"{"name":"tiny","total_items":9,"mix":[
  {"task":"grounding","subtype":"mixed","count":3},
  {"task":"counting","subtype":"hard","count":3},
  {"task":"jigsaw","subtype":"easy","count":3}]}"#;

fn dataset(dir: &Path) {
    let o = run(dir, &["synth-corpus", "--out", "corpus", "--count", "3", "--seconds", "20", "--width", "64", "--height", "48"]);
    assert!(o.status.success(), "{o:?}");
    std::fs::write(dir.join("tiny.json"), TINY).unwrap();
    let o = run(dir, &["generate", "--config", "tiny.json", "--corpus", "corpus", "--out", "ds", "--seed", "7", "--jobs", "1"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("9 records from 3 videos"));
}

#[test]
fn generate_verify_baseline_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    dataset(dir);

    let o = run(dir, &["verify", "--manifest", "ds"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("9 of 9 records pass"));

    let o = run(dir, &["baseline", "--manifest", "ds", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["baseline_predictions.jsonl", "report.json", "report.txt"] {
        assert!(dir.join("ds").join(f).is_file(), "{f}");
    }

    // the baseline's own predictions re-evaluate to the same report
    let first = std::fs::read_to_string(dir.join("ds/report.json")).unwrap();
    let o = run(dir, &["evaluate", "--manifest", "ds", "--predictions", "ds/baseline_predictions.jsonl", "--out", "again"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.join("again/report.json")).unwrap(), first);
}

#[test]
fn garbage_predictions_still_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    dataset(dir);
    std::fs::write(
        dir.join("p.jsonl"),
        "not json\n{\"record_id\":\"jigsaw-easy-000000\",\"text\":\"no idea\"}\n",
    )
    .unwrap();
    let o = run(dir, &["evaluate", "--manifest", "ds", "--predictions", "p.jsonl", "--mode", "smooth"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let out = stdout(&o);
    assert!(out.contains("missing: 8  unparseable: 1"), "{out}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn verify_fails_on_a_corrupted_record() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    dataset(dir);
    let manifest = dir.join("ds/manifest.jsonl");
    let text = std::fs::read_to_string(&manifest).unwrap();
    let mut lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let i = lines.iter().position(|l| l["task"] == "counting").unwrap();
    let v = lines[i]["answer"]["values"][0].as_i64().unwrap();
    lines[i]["answer"]["values"][0] = (v + 1).into();
    let out: String = lines.iter().map(|l| l.to_string() + "\n").collect();
    std::fs::write(&manifest, out).unwrap();

    let o = run(dir, &["verify", "--manifest", "ds"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("8 of 9 records pass"));
}

#[test]
fn inspect_writes_a_contact_sheet() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    dataset(dir);
    let o = run(dir, &["inspect", "--manifest", "ds", "--record", "jigsaw-easy-000002", "--contact-sheet", "s.png"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("answer:   ["));
    let png = std::fs::read(dir.join("s.png")).unwrap();
    assert_eq!(&png[1..4], b"PNG");

    let o = run(dir, &["inspect", "--manifest", "ds", "--record", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn configuration_problems_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::create_dir(dir.join("empty")).unwrap();
    let o = run(dir, &["generate", "--config", "no-such-preset", "--corpus", "empty", "--out", "o", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir, &["generate", "--config", "viubench", "--corpus", "empty", "--out", "o", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir, &["verify", "--manifest", "missing"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.join("manifest.jsonl"), "").unwrap();
    let o = run(dir, &["verify", "--manifest", "manifest.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn score_serves_the_golden_vectors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = run(dir, &["test-vectors", "--out", "tv.jsonl", "--count", "40"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.join("tv.jsonl")).unwrap();
    let vectors: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let input: String = vectors.iter().map(|v| v["request"].to_string() + "\n").collect();

    let mut child = Command::new(env!("CARGO_BIN_EXE_ssr-forge"))
        .arg("score")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let got: Vec<serde_json::Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let want: Vec<&serde_json::Value> = vectors.iter().map(|v| &v["expected"]).collect();
    assert_eq!(got.iter().collect::<Vec<_>>(), want);
}
