use std::path::Path;
use std::process::{Command, Output};

fn urlscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urlscope")).args(args).env_remove("URLSCOPE_ENDPOINT").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn corpus_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = urlscope(&["fixtures", "write", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

fn page(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn committed_fixtures_verify() {
    let o = urlscope(&["fixtures", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with(": ok\n"));
}

#[test]
fn tampered_fixture_fails_verification() {
    let dir = corpus_dir();
    let d = dir.path().to_str().unwrap();
    assert_eq!(urlscope(&["fixtures", "verify", "--dir", d]).status.code(), Some(0));
    std::fs::write(dir.path().join("benign-blog/page.html"), "<html></html>").unwrap();
    let o = urlscope(&["fixtures", "verify", "--dir", d]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("benign-blog"));
}

#[test]
fn analyze_exit_codes_follow_the_verdict() {
    let dir = corpus_dir();
    let benign = urlscope(&["analyze", &page(dir.path(), "benign-docs"), "--output", "json"]);
    assert_eq!(benign.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&benign)).unwrap();
    assert_eq!(v["classification"], "benign");
    let bad = urlscope(&["analyze", &page(dir.path(), "mal-keylogger")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).lines().nth(1).unwrap().starts_with("Malicious"));
}

#[test]
fn scan_corpus_lists_every_entry() {
    let dir = corpus_dir();
    let o = urlscope(&["scan-corpus", &page(dir.path(), "corpus.json"), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).lines().count(), 20);
}

#[test]
fn stable_eval_output_repeats() {
    let dir = corpus_dir();
    let corpus = page(dir.path(), "corpus.json");
    let run = || urlscope(&["eval", &corpus, "--stable", "--output", "json"]);
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["pipeline"]["display"], "accuracy 100%, precision 1.00, recall 1.00, F1 1.00");
    assert!(v.get("timings").is_none());
}

#[test]
fn text_eval_with_baseline() {
    let dir = corpus_dir();
    let o = urlscope(&["eval", &page(dir.path(), "corpus.json"), "--baseline"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("baseline: tp"));
    assert!(out.contains("timing total"));
}

#[test]
fn failures_exit_with_one() {
    let dir = corpus_dir();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"entries": []}"#).unwrap();
    assert_eq!(urlscope(&["eval", empty.to_str().unwrap()]).status.code(), Some(1));
    let o = urlscope(&["analyze", &page(dir.path(), "benign-docs"), "--backend", "http"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("URLSCOPE_ENDPOINT"));
    let weights = dir.path().join("weights.json");
    std::fs::write(&weights, "{}").unwrap();
    assert_eq!(urlscope(&["analyze", &page(dir.path(), "benign-docs"), "--weights", weights.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(urlscope(&["analyze", &page(dir.path(), "benign-docs"), "--window-ms", "0"]).status.code(), Some(1));
}

#[test]
fn endpoint_comes_from_the_environment() {
    let dir = corpus_dir();
    let o = Command::new(env!("CARGO_BIN_EXE_urlscope"))
        .args(["analyze", &page(dir.path(), "benign-docs"), "--backend", "http"])
        .env("URLSCOPE_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(!err.contains("needs --endpoint"), "{err}");
}
