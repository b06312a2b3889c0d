use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urlscope_core::corpus::{CorpusEntry, CorpusManifest};
use urlscope_core::eval::baseline::{lexical_features, refang, LexicalRules};
use urlscope_core::eval::metrics::fmt_percent;
use urlscope_core::eval::synthetic::{planted_labels, verify_corpus, CORPUS_FILE};
use urlscope_core::eval::*;
use urlscope_core::evidence::Label;
use urlscope_core::llm::BackendDescriptor;
use urlscope_core::pipeline::AnalyzeConfig;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn synthetic_manifest() -> CorpusManifest {
    CorpusManifest::load(&fixtures().join("synthetic").join(CORPUS_FILE)).unwrap()
}

#[test]
fn table_one_arithmetic() {
    let started = Instant::now();
    let m = compute_metrics(ConfusionCounts::new(94, 10, 90, 6));
    let elapsed = started.elapsed();
    assert_eq!(m.accuracy, Some(0.92));
    assert_eq!(m.to_string(), "accuracy 92%, precision 0.90, recall 0.94, F1 0.92");
    assert!(elapsed < Duration::from_millis(1), "{elapsed:?}");
}

#[test]
fn metrics_match_committed_recomputation() {
    let text = std::fs::read_to_string(fixtures().join("metrics_cases.csv")).unwrap();
    let opt = |s: &str| if s.is_empty() { None } else { Some(s.parse::<f64>().unwrap()) };
    let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() < 1e-12,
        (None, None) => true,
        _ => false,
    };
    let mut n = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let c = ConfusionCounts::new(f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap());
        let m = compute_metrics(c);
        for (got, want) in [(m.accuracy, opt(f[4])), (m.precision, opt(f[5])), (m.recall, opt(f[6])), (m.f1, opt(f[7]))] {
            assert!(close(got, want), "{line}: {got:?} vs {want:?}");
        }
        n += 1;
    }
    assert_eq!(n, 40);
}

#[test]
fn metrics_agree_with_closed_forms_on_random_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let c = ConfusionCounts::new(rng.random_range(0..500), rng.random_range(0..500), rng.random_range(0..500), rng.random_range(0..500));
        let m = compute_metrics(c);
        let total = (c.tp + c.fp + c.tn + c.fn_) as f64;
        if total > 0.0 {
            assert_eq!(m.accuracy, Some((c.tp + c.tn) as f64 / total));
        }
        // F1 written as 2TP / (2TP + FP + FN), independent of precision and recall.
        if c.tp > 0 {
            let f1 = 2.0 * c.tp as f64 / (2 * c.tp + c.fp + c.fn_) as f64;
            assert!((m.f1.unwrap() - f1).abs() < 1e-12);
        }
    }
}

const FAKE_MICROSOFT: &str = "hxxps://sites[.]google[.]com/l0gin-microsoftwebonlne.app/8965767/";
const GOOGLE_LOGIN: &str = "https://accounts.google.com/ServiceLogin";

#[test]
fn rule_fallback_on_known_login_urls() {
    let rules = LexicalRules::default();
    let model = BaselineModel::rules_only();
    let fake = lexical_features(FAKE_MICROSOFT, 0, false, &rules.suspicious_substrings).unwrap();
    assert_eq!(refang(FAKE_MICROSOFT), "https://sites.google.com/l0gin-microsoftwebonlne.app/8965767/");
    assert!(fake.has_suspicious_substring);
    assert_eq!(fake.hyphen_count, 1);
    assert_eq!(fake.path_length, 37);
    assert_eq!(baseline_classify(&fake, &model).unwrap(), Label::Malicious);
    let real = lexical_features(GOOGLE_LOGIN, 0, false, &rules.suspicious_substrings).unwrap();
    assert_eq!(baseline_classify(&real, &model).unwrap(), Label::Benign);
}

/// Rows separated by the planted rule `path_length > 30`, other features noisy.
fn separable_rows() -> Vec<(LexicalFeatureVector, Label)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..20)
        .map(|i| {
            let malicious = i % 2 == 1;
            let v = LexicalFeatureVector {
                url_length: rng.random_range(20..90),
                dot_count: rng.random_range(1..5),
                hyphen_count: rng.random_range(0..4),
                has_suspicious_substring: rng.random_bool(0.5),
                subdomain_depth: rng.random_range(0..3),
                path_length: if malicious { rng.random_range(31..80) } else { rng.random_range(1..30) },
                form_count: rng.random_range(0..3),
                has_password_field: rng.random_bool(0.5),
                digit_ratio: rng.random_range(0.0..0.3),
            };
            (v, if malicious { Label::Malicious } else { Label::Benign })
        })
        .collect()
}

#[test]
fn ensemble_fits_separable_toy_set() {
    let rows = separable_rows();
    let forest = Forest::fit(&rows, ForestParams::default()).unwrap();
    let model = BaselineModel { forest: Some(forest.clone()), rules: None };
    let correct = rows.iter().filter(|(v, l)| baseline_classify(v, &model).unwrap() == *l).count();
    assert_eq!(correct, rows.len());
    assert_eq!(forest, Forest::fit(&rows, ForestParams::default()).unwrap());
}

#[test]
fn bundled_ensemble_trains() {
    let model = BaselineModel::bundled(ForestParams::default()).unwrap();
    assert_eq!(model.forest.as_ref().unwrap().trees.len(), 25);
    let subs = model.substrings();
    let fake = lexical_features(FAKE_MICROSOFT, 1, true, &subs).unwrap();
    assert_eq!(baseline_classify(&fake, &model).unwrap(), Label::Malicious);
}

#[test]
fn committed_corpus_matches_definitions() {
    assert_eq!(verify_corpus(&fixtures().join("synthetic")), Vec::<String>::new());
}

fn run(stable: bool) -> EvalReport {
    evaluate(&synthetic_manifest(), &BackendDescriptor::mock(), &AnalyzeConfig::default(), &RunOptions::default(), stable).unwrap()
}

#[test]
fn synthetic_corpus_end_to_end() {
    let started = Instant::now();
    let first = run(true);
    let second = run(true);
    let elapsed = started.elapsed();
    assert_eq!(first.scored, 20);
    for (entry, (name, label)) in first.results.iter().zip(planted_labels()) {
        assert_eq!(entry.name, name);
        assert_eq!(entry.predicted(), Some(label), "{name}: {:?}", entry.report.as_ref().map(|r| r.headline()));
    }
    assert_eq!(first.pipeline.counts, ConfusionCounts::new(10, 0, 10, 0));
    assert_eq!(fmt_percent(first.pipeline.metrics.accuracy), "100%");
    let a = render_report(&first, ReportFormat::Json);
    let b = render_report(&second, ReportFormat::Json);
    assert_eq!(a, b);
    assert!(!a.contains("\"total\""));
    assert!(elapsed < Duration::from_secs(60), "{elapsed:?}");
}

#[test]
fn timed_report_accounts_for_phases() {
    let mut m = synthetic_manifest();
    m.entries.truncate(3);
    let r = evaluate(&m, &BackendDescriptor::mock(), &AnalyzeConfig::default(), &RunOptions { jobs: 2, baseline: None }, false).unwrap();
    let t = r.timings.as_ref().unwrap();
    for phase in ["static", "dynamic", "prompt", "inference", "aggregate", "total"] {
        assert!(t.contains_key(phase), "{phase}");
    }
    for e in &r.results {
        let rep = e.report.as_ref().unwrap();
        let sum: u64 = WALL_PHASES.iter().filter_map(|p| rep.timings.get(*p)).sum();
        assert!(sum <= rep.timings["total"], "{:?}", rep.timings);
    }
    let text = render_report(&r, ReportFormat::Text);
    assert!(text.contains("benign-blog"));
    assert!(text.contains("timing total"));
}

#[test]
fn unloadable_entry_is_recorded_not_scored() {
    let mut m = synthetic_manifest();
    m.entries.truncate(19);
    m.entries.push(CorpusEntry { snapshot_dir: "does-not-exist".into(), label: Label::Malicious, threat_type: None });
    let r = evaluate(&m, &BackendDescriptor::mock(), &AnalyzeConfig::default(), &RunOptions::default(), true).unwrap();
    assert_eq!(r.entries, 20);
    assert_eq!(r.scored, 19);
    assert_eq!(r.analysis_errors, 1);
    assert_eq!(r.pipeline.counts.total(), 19);
    assert!(r.results[19].error.as_deref().unwrap().contains("does-not-exist"));
}

#[test]
fn empty_manifest_is_an_error() {
    let m = CorpusManifest { entries: Vec::new(), root: PathBuf::new() };
    assert!(run_corpus(&m, &BackendDescriptor::mock(), &AnalyzeConfig::default(), &RunOptions::default()).is_err());
}

#[test]
fn baseline_runs_alongside() {
    let opts = RunOptions { jobs: 0, baseline: Some(BaselineModel::rules_only()) };
    let results = run_corpus(&synthetic_manifest(), &BackendDescriptor::mock(), &AnalyzeConfig::default(), &opts).unwrap();
    assert!(results.iter().all(|e| e.baseline.is_some()));
    let r = summarize(results, true);
    assert_eq!(r.baseline.unwrap().counts.total(), 20);
}
