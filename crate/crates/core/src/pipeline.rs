//! Evidence collection for one page: static features, sandbox run, DOM facts.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{load_snapshot, CorpusError, PageSnapshot};
use crate::evidence::EvidenceBundle;
use crate::llm::{Backend, LlmError, VerdictDocument};
use crate::prompt::{PromptBuilder, PromptError, PromptKind, DEFAULT_BUDGET_TOKENS};
use crate::risk::{combine, score_evidence_with, RiskError, RiskReport, WeightTable, REQUIRED_VERDICTS};
use crate::sandbox::dom::{dom_metadata, extract_visible_text, DomNode};
use crate::sandbox::engine::{execute_page, SandboxConfig};
use crate::sandbox::trace::{read_trace, TraceKind};
use crate::static_analysis::{analyze_script_with, DetectorConfig, StaticFeatureSet};

pub const RECORDED_TRACE_FILE: &str = "trace.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {message}")]
    Trace { path: String, message: String },
    #[error("{kind} prompt: {source}")]
    Prompt { kind: PromptKind, source: PromptError },
    #[error("{kind} verdict: {source}")]
    Llm { kind: PromptKind, source: LlmError },
    #[error(transparent)]
    Risk(#[from] RiskError),
}

#[derive(Debug, Clone)]
pub struct CollectConfig {
    pub sandbox: SandboxConfig,
    pub detectors: DetectorConfig,
    /// When false, only static and DOM evidence is gathered.
    pub dynamic: bool,
}

impl Default for CollectConfig {
    fn default() -> Self {
        CollectConfig { sandbox: SandboxConfig::default(), detectors: DetectorConfig::default(), dynamic: true }
    }
}

/// Evidence plus any phase that degraded along the way.
#[derive(Debug, Clone)]
pub struct Collected {
    pub bundle: EvidenceBundle,
    pub warnings: Vec<String>,
}

/// Features for every script with retrievable source, in snapshot order.
pub fn static_features(snapshot: &PageSnapshot, cfg: &DetectorConfig) -> Vec<StaticFeatureSet> {
    snapshot
        .scripts
        .par_iter()
        .filter(|s| s.warning.is_none() && !s.source.trim().is_empty())
        .map(|s| analyze_script_with(&s.name, &s.source, cfg))
        .collect()
}

fn ms_since(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Static and DOM evidence only, as if the page never ran.
pub fn static_bundle(snapshot: &PageSnapshot, cfg: &DetectorConfig) -> EvidenceBundle {
    let mut b = EvidenceBundle::empty(snapshot.url.clone());
    b.scripts = static_features(snapshot, cfg);
    let dom = DomNode::from_html(&snapshot.html);
    b.dom_meta = dom_metadata(&dom, &snapshot.url.raw);
    b.visible_text = extract_visible_text(&dom);
    b
}

pub fn collect_evidence(snapshot: &PageSnapshot, cfg: &CollectConfig) -> Collected {
    let mut warnings: Vec<String> = snapshot.scripts.iter().filter_map(|s| s.warning.as_ref().map(|w| format!("{}: {w}", s.name))).collect();
    let t = Instant::now();
    let mut bundle = static_bundle(snapshot, &cfg.detectors);
    bundle.timings.insert("static".into(), ms_since(t));
    if cfg.dynamic {
        let t = Instant::now();
        match execute_page(snapshot, &cfg.sandbox) {
            Ok(run) => {
                bundle.trace = run.trace;
                bundle.dom_meta = run.dom_meta;
                bundle.visible_text = run.visible_text;
                bundle.new_globals = run.new_globals;
                bundle.timings.insert("dynamic_virtual".into(), run.virtual_ms);
                if run.truncated {
                    warnings.push("trace truncated to the configured event cap".into());
                }
                if run.hard_cap_hit {
                    warnings.push("sandbox stopped at the hard wall-clock cap".into());
                }
            }
            Err(e) => warnings.push(format!("dynamic analysis unavailable, static evidence only: {e}")),
        }
        bundle.timings.insert("dynamic".into(), ms_since(t));
    }
    Collected { bundle, warnings }
}

/// Rebuilds a bundle from a snapshot directory that carries a recorded
/// `trace.json` instead of running the sandbox.
pub fn recorded_bundle(dir: &Path, cfg: &DetectorConfig) -> Result<EvidenceBundle, PipelineError> {
    let snapshot = load_snapshot(dir)?;
    let path = dir.join(RECORDED_TRACE_FILE);
    let trace = read_trace(&path).map_err(|e| PipelineError::Trace { path: path.display().to_string(), message: e.to_string() })?;
    let mut b = static_bundle(&snapshot, cfg);
    for e in trace.events.iter().filter(|e| e.kind == TraceKind::GlobalCreated) {
        if let Some(n) = e.str_field("name") {
            if !b.new_globals.iter().any(|g| g == n) {
                b.new_globals.push(n.to_string());
            }
        }
    }
    let span = trace.events.iter().map(|e| e.timestamp).max().unwrap_or(0);
    b.trace = trace.events;
    b.timings.insert("dynamic_virtual".into(), span);
    Ok(b)
}

/// Everything needed to turn evidence into a report.
#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub collect: CollectConfig,
    pub budget_tokens: usize,
    pub weights: WeightTable,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig { collect: CollectConfig::default(), budget_tokens: DEFAULT_BUDGET_TOKENS, weights: WeightTable::default() }
    }
}

/// Prompts, verdicts and aggregation for already-collected evidence.
///
/// A prompt whose section is absent, or a verdict that fails, only costs
/// that verdict; the run fails when a required one is lost this way.
pub fn analyze_bundle(collected: Collected, backend: &Backend, cfg: &AnalyzeConfig) -> Result<RiskReport, PipelineError> {
    let Collected { bundle, mut warnings } = collected;
    let mut builder = PromptBuilder::new(cfg.budget_tokens);
    builder.detectors = cfg.collect.detectors.clone();
    let t = Instant::now();
    let prompts = builder.build_all(&bundle);
    let prompt_ms = ms_since(t);
    let t = Instant::now();
    let mut verdicts: BTreeMap<PromptKind, VerdictDocument> = BTreeMap::new();
    for (kind, prompt) in prompts {
        let required = REQUIRED_VERDICTS.contains(&kind);
        let prompt = match prompt {
            Ok(p) => p,
            Err(source) if required => return Err(PipelineError::Prompt { kind, source }),
            Err(e) => {
                warnings.push(format!("{kind} prompt skipped: {e}"));
                continue;
            }
        };
        match backend.verdict(&prompt) {
            Ok(v) => {
                if v.repair_applied {
                    warnings.push(format!("{kind} verdict needed JSON repair"));
                }
                verdicts.insert(kind, v);
            }
            Err(source) if required => return Err(PipelineError::Llm { kind, source }),
            Err(e) => warnings.push(format!("{kind} verdict unavailable: {e}")),
        }
    }
    let inference_ms = ms_since(t);
    let t = Instant::now();
    let evidence = score_evidence_with(&bundle, &cfg.weights, &cfg.collect.detectors);
    let mut report = combine(&bundle.url, &verdicts, &evidence, &cfg.weights)?;
    let aggregate_ms = ms_since(t);
    report.timings = bundle.timings.clone();
    report.timings.insert("prompt".into(), prompt_ms);
    report.timings.insert("inference".into(), inference_ms);
    report.timings.insert("aggregate".into(), aggregate_ms);
    report.warnings = warnings;
    Ok(report)
}

/// Full analysis of a snapshot: evidence collection, then [`analyze_bundle`].
pub fn analyze_snapshot(snapshot: &PageSnapshot, backend: &Backend, cfg: &AnalyzeConfig) -> Result<RiskReport, PipelineError> {
    let t = Instant::now();
    let collected = collect_evidence(snapshot, &cfg.collect);
    let mut report = analyze_bundle(collected, backend, cfg)?;
    report.url = snapshot.url.clone();
    report.timings.insert("total".into(), ms_since(t));
    Ok(report)
}

/// Analyzes a snapshot directory, replaying its recorded `trace.json` when
/// one is present instead of running the sandbox.
pub fn analyze_dir(dir: &Path, backend: &Backend, cfg: &AnalyzeConfig) -> Result<RiskReport, PipelineError> {
    if !dir.join(RECORDED_TRACE_FILE).is_file() {
        return analyze_snapshot(&load_snapshot(dir)?, backend, cfg);
    }
    let t = Instant::now();
    let bundle = recorded_bundle(dir, &cfg.collect.detectors)?;
    let mut report = analyze_bundle(Collected { bundle, warnings: Vec::new() }, backend, cfg)?;
    report.timings.insert("total".into(), ms_since(t));
    Ok(report)
}
