//! Batch evaluation over a labeled corpus: metrics, lexical baseline, reports.

pub mod baseline;
pub mod metrics;
pub mod synthetic;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, CorpusManifest, PageSnapshot};
use crate::evidence::Label;
use crate::llm::{Backend, BackendDescriptor, LlmError};
use crate::pipeline::{analyze_snapshot, AnalyzeConfig};
use crate::risk::{Classification, RiskReport};
use crate::sandbox::dom::{dom_metadata, DomNode};

pub use baseline::{baseline_classify, lexical_features, BaselineModel, Forest, ForestParams, LexicalFeatureVector, LexicalRules};
pub use metrics::{compute_metrics, ConfusionCounts, Metrics};

pub const EVAL_REPORT_VERSION: u32 = 1;

/// Phases measured on the wall clock and summed against `total`.
pub const WALL_PHASES: [&str; 5] = ["static", "dynamic", "prompt", "inference", "aggregate"];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error("baseline: {0}")]
    Baseline(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalEntry {
    pub name: String,
    pub url: Option<String>,
    pub ground_truth: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threat_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<RiskReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Label>,
}

impl EvalEntry {
    /// `benign_with_warnings` counts as benign.
    pub fn predicted(&self) -> Option<Label> {
        self.report.as_ref().map(|r| if r.classification == Classification::Malicious { Label::Malicious } else { Label::Benign })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the machine's parallelism.
    pub jobs: usize,
    pub baseline: Option<BaselineModel>,
}

fn page_features(snap: &PageSnapshot, model: &BaselineModel) -> Result<LexicalFeatureVector, EvalError> {
    let meta = dom_metadata(&DomNode::from_html(&snap.html), &snap.url.raw);
    lexical_features(&snap.url.raw, meta.total_forms, meta.password_fields > 0, &model.substrings())
}

/// Analyzes every entry on a bounded worker pool. Each analysis owns its
/// sandbox; results come back in manifest order.
pub fn run_corpus(manifest: &CorpusManifest, backend: &BackendDescriptor, cfg: &AnalyzeConfig, opts: &RunOptions) -> Result<Vec<EvalEntry>, EvalError> {
    if manifest.entries.is_empty() {
        return Err(CorpusError::EmptyCorpus.into());
    }
    let backend = Backend::new(backend.clone())?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build().map_err(|e| EvalError::Pool(e.to_string()))?;
    let entries = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                let mut out = EvalEntry {
                    name: entry.snapshot_dir.display().to_string(),
                    url: None,
                    ground_truth: entry.label,
                    threat_type: entry.threat_type.clone(),
                    report: None,
                    error: None,
                    baseline: None,
                };
                let snap = match manifest.load_entry(entry) {
                    Ok(s) => s,
                    Err(e) => {
                        out.error = Some(e.to_string());
                        return out;
                    }
                };
                out.url = Some(snap.url.raw.clone());
                if let Some(model) = &opts.baseline {
                    out.baseline = page_features(&snap, model).and_then(|v| baseline_classify(&v, model)).ok();
                }
                match analyze_snapshot(&snap, &backend, cfg) {
                    Ok(r) => out.report = Some(r),
                    Err(e) => out.error = Some(e.to_string()),
                }
                out
            })
            .collect()
    });
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean: f64,
    pub p50: u64,
    pub p95: u64,
    pub max: u64,
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[u64], p: f64) -> u64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn timing_stats(reports: &[&RiskReport]) -> BTreeMap<String, TimingStats> {
    let mut by_phase: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for r in reports {
        for (k, v) in &r.timings {
            by_phase.entry(k.clone()).or_default().push(*v);
        }
    }
    by_phase
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_unstable();
            let mean = v.iter().sum::<u64>() as f64 / v.len() as f64;
            (k, TimingStats { mean: (mean * 100.0).round() / 100.0, p50: percentile(&v, 50.0), p95: percentile(&v, 95.0), max: *v.last().unwrap_or(&0) })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
    pub display: String,
}

impl MetricsSummary {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let metrics = compute_metrics(counts);
        MetricsSummary { counts, metrics, display: metrics.to_string() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub entries: usize,
    pub scored: usize,
    pub analysis_errors: usize,
    pub pipeline: MetricsSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<MetricsSummary>,
    /// Absent in stable mode, where wall-clock values are dropped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, TimingStats>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub results: Vec<EvalEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Text,
}

/// Single-threaded reduction of the per-entry results. With `stable`, every
/// wall-clock timing is removed so identical runs give identical bytes;
/// the virtual-clock `dynamic_virtual` span stays.
pub fn summarize(mut results: Vec<EvalEntry>, stable: bool) -> EvalReport {
    let pipeline = ConfusionCounts::from_pairs(results.iter().filter_map(|e| e.predicted().map(|p| (e.ground_truth, p))));
    let baseline = results
        .iter()
        .any(|e| e.baseline.is_some())
        .then(|| MetricsSummary::from_counts(ConfusionCounts::from_pairs(results.iter().filter_map(|e| e.baseline.map(|p| (e.ground_truth, p))))));
    let reports: Vec<&RiskReport> = results.iter().filter_map(|e| e.report.as_ref()).collect();
    let timings = (!stable && !reports.is_empty()).then(|| timing_stats(&reports));
    if stable {
        for r in results.iter_mut().filter_map(|e| e.report.as_mut()) {
            r.timings.retain(|k, _| k == "dynamic_virtual");
        }
    }
    let scored = results.iter().filter(|e| e.report.is_some()).count();
    EvalReport {
        version: EVAL_REPORT_VERSION,
        entries: results.len(),
        scored,
        analysis_errors: results.len() - scored,
        pipeline: MetricsSummary::from_counts(pipeline),
        baseline,
        timings,
        note: (scored == 0).then(|| "no data".to_string()),
        results,
    }
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Text => render_text(report),
    }
}

fn render_text(report: &EvalReport) -> String {
    let mut s = String::new();
    let width = report.results.iter().map(|e| e.name.len()).max().unwrap_or(4).max(4);
    let _ = writeln!(s, "{:<width$}  {:<9}  {:<9}  {:>5}  verdict", "page", "truth", "predicted", "score");
    for e in &report.results {
        let (pred, score, verdict) = match &e.report {
            Some(r) => (e.predicted().map_or("-", Label::as_str), r.risk_score.to_string(), r.headline()),
            None => ("error", "-".to_string(), e.error.clone().unwrap_or_default()),
        };
        let _ = writeln!(s, "{:<width$}  {:<9}  {:<9}  {:>5}  {verdict}", e.name, e.ground_truth.as_str(), pred, score);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "entries {}, scored {}, analysis errors {}", report.entries, report.scored, report.analysis_errors);
    let c = report.pipeline.counts;
    let _ = writeln!(s, "pipeline: tp {} fp {} tn {} fn {}; {}", c.tp, c.fp, c.tn, c.fn_, report.pipeline.display);
    if let Some(b) = &report.baseline {
        let c = b.counts;
        let _ = writeln!(s, "baseline: tp {} fp {} tn {} fn {}; {}", c.tp, c.fp, c.tn, c.fn_, b.display);
    }
    if let Some(t) = &report.timings {
        for (phase, st) in t {
            let _ = writeln!(s, "timing {phase}: mean {:.2} ms, p50 {} ms, p95 {} ms, max {} ms", st.mean, st.p50, st.p95, st.max);
        }
    }
    if let Some(n) = &report.note {
        let _ = writeln!(s, "{n}");
    }
    s
}

/// Convenience for one-shot evaluation runs.
pub fn evaluate(manifest: &CorpusManifest, backend: &BackendDescriptor, cfg: &AnalyzeConfig, opts: &RunOptions, stable: bool) -> Result<EvalReport, EvalError> {
    let started = Instant::now();
    let results = run_corpus(manifest, backend, cfg, opts)?;
    let mut report = summarize(results, stable);
    if let (false, Some(t)) = (stable, report.timings.as_mut()) {
        let ms = started.elapsed().as_millis() as u64;
        t.insert("run_wall".into(), TimingStats { mean: ms as f64, p50: ms, p95: ms, max: ms });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_results_give_a_valid_document() {
        let r = summarize(Vec::new(), false);
        assert_eq!(r.pipeline.counts, ConfusionCounts::default());
        assert_eq!(r.note.as_deref(), Some("no data"));
        let v: serde_json::Value = serde_json::from_str(&render_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(v["entries"], 0);
        assert!(render_report(&r, ReportFormat::Text).contains("no data"));
    }

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<u64> = (1..=20).collect();
        assert_eq!(percentile(&v, 50.0), 10);
        assert_eq!(percentile(&v, 95.0), 19);
        assert_eq!(percentile(&[7], 95.0), 7);
    }
}
