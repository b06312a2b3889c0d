//! Renders an evidence bundle into the five analysis prompts.
//!
//! Templates live in `assets/prompts/*.tmpl`. A `{{name}}` placeholder is
//! replaced verbatim; optional blocks such as `{{observations}}` render
//! either nothing or whole lines, so an empty block leaves the template's
//! own blank lines untouched.

mod layout;
pub mod schema;
pub mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::{EvidenceBundle, Severity};
use crate::sandbox::trace::{is_countable, render_risk_categories, summarize_trace, TraceEvent, TraceKind};
use crate::static_analysis::{identifier_words, DetectorConfig, PatternFlag, StaticFeatureSet, StringFindingKind};

pub use layout::{Source, TRUNCATION_MARKER};
pub use schema::{FieldSpec, FieldType, FieldViolation, ResponseSchema};
pub use text::{summarize_text, url_hints, TextSummary};

use layout::{comma_list, optional_block, Draft, Item};

pub const SYSTEM_PREAMBLE: &str = "[System role: Security Analyst AI]";
pub const DEFAULT_BUDGET_TOKENS: usize = 3072;
pub const MAX_PROMPT_APIS: usize = 30;
pub const MAX_PROMPT_GLOBALS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("{kind} prompt needs the {section} section, which the bundle lacks")]
    MissingSection { kind: PromptKind, section: &'static str },
    #[error("budget too small: the mandatory prompt skeleton alone exceeds it ({} chars)", skeleton.len())]
    BudgetTooSmall { skeleton: String },
    #[error("template: {0}")]
    Template(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    SandboxBehavior,
    Trust,
    ScriptSecurity,
    GlobalProperties,
    DomMetadata,
}

impl PromptKind {
    pub const ALL: [PromptKind; 5] =
        [PromptKind::SandboxBehavior, PromptKind::Trust, PromptKind::ScriptSecurity, PromptKind::GlobalProperties, PromptKind::DomMetadata];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptKind::SandboxBehavior => "sandbox_behavior",
            PromptKind::Trust => "trust",
            PromptKind::ScriptSecurity => "script_security",
            PromptKind::GlobalProperties => "global_properties",
            PromptKind::DomMetadata => "dom_metadata",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            PromptKind::SandboxBehavior => include_str!("../../assets/prompts/sandbox_behavior.tmpl"),
            PromptKind::Trust => include_str!("../../assets/prompts/trust.tmpl"),
            PromptKind::ScriptSecurity => include_str!("../../assets/prompts/script_security.tmpl"),
            PromptKind::GlobalProperties => include_str!("../../assets/prompts/global_properties.tmpl"),
            PromptKind::DomMetadata => include_str!("../../assets/prompts/dom_metadata.tmpl"),
        }
    }

    pub fn schema(self) -> ResponseSchema {
        ResponseSchema::for_kind(self)
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown prompt kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub kind: PromptKind,
    pub system_preamble: String,
    pub body: String,
    pub schema_id: String,
    /// Estimate for [`RenderedPrompt::full_text`], preamble included.
    pub token_estimate: usize,
}

impl RenderedPrompt {
    /// Preamble line followed by the body, as sent to a single-string backend.
    pub fn full_text(&self) -> String {
        format!("{}\n{}", self.system_preamble, self.body)
    }
}

/// Token counter supplied by a backend that knows its model's vocabulary.
pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;
}

/// `ceil(chars / 3.5)`.
pub fn estimate_tokens(text: &str) -> usize {
    (text.chars().count() * 2).div_ceil(7)
}

#[derive(Clone)]
pub struct PromptBuilder {
    pub budget_tokens: usize,
    pub detectors: DetectorConfig,
    tokenizer: Option<Arc<dyn Tokenizer>>,
}

impl Default for PromptBuilder {
    fn default() -> Self {
        PromptBuilder { budget_tokens: DEFAULT_BUDGET_TOKENS, detectors: DetectorConfig::default(), tokenizer: None }
    }
}

impl fmt::Debug for PromptBuilder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PromptBuilder").field("budget_tokens", &self.budget_tokens).field("tokenizer", &self.tokenizer.is_some()).finish()
    }
}

/// Renders one prompt with the default detector config.
pub fn build(kind: PromptKind, bundle: &EvidenceBundle, budget_tokens: usize) -> Result<RenderedPrompt, PromptError> {
    PromptBuilder::new(budget_tokens).build(kind, bundle)
}

impl PromptBuilder {
    pub fn new(budget_tokens: usize) -> Self {
        PromptBuilder { budget_tokens, ..Default::default() }
    }

    pub fn with_tokenizer(mut self, t: Arc<dyn Tokenizer>) -> Self {
        self.tokenizer = Some(t);
        self
    }

    pub fn count_tokens(&self, text: &str) -> usize {
        match &self.tokenizer {
            Some(t) => t.count(text),
            None => estimate_tokens(text),
        }
    }

    pub fn build(&self, kind: PromptKind, bundle: &EvidenceBundle) -> Result<RenderedPrompt, PromptError> {
        let mut draft = match kind {
            PromptKind::SandboxBehavior => sandbox_draft(bundle)?,
            PromptKind::Trust => self.trust_draft(bundle),
            PromptKind::ScriptSecurity => self.script_draft(bundle)?,
            PromptKind::GlobalProperties => globals_draft(bundle)?,
            PromptKind::DomMetadata => self.dom_draft(bundle),
        };
        let budget = self.budget_tokens;
        let body = draft.fit(|b| self.count_tokens(&format!("{SYSTEM_PREAMBLE}\n{b}")) <= budget)?;
        let mut out = RenderedPrompt {
            kind,
            system_preamble: SYSTEM_PREAMBLE.to_string(),
            body,
            schema_id: kind.as_str().to_string(),
            token_estimate: 0,
        };
        out.token_estimate = self.count_tokens(&out.full_text());
        Ok(out)
    }

    pub fn build_all(&self, bundle: &EvidenceBundle) -> Vec<(PromptKind, Result<RenderedPrompt, PromptError>)> {
        PromptKind::ALL.into_iter().map(|k| (k, self.build(k, bundle))).collect()
    }

    fn trust_draft(&self, b: &EvidenceBundle) -> Draft {
        let hints: Vec<Item> =
            url_hints(&b.url, &self.detectors.suspicious_tlds).into_iter().map(|(t, s)| Item::new(t, Some(s), Source::DomMeta)).collect();
        let mut d = Draft::new(PromptKind::Trust.template());
        d.set("domain", b.url.domain())
            .set("ssl", if b.url.is_https() { "Yes" } else { "No" })
            .set("quality", page_quality(&b.scripts).to_string())
            .list("url_hints", hints, |items, dropped| optional_block("", items, dropped).trim_start_matches('\n').to_string());
        d
    }

    fn script_draft(&self, b: &EvidenceBundle) -> Result<Draft, PromptError> {
        let cfg = &self.detectors;
        let fs = pick_script(&b.scripts, cfg).ok_or(PromptError::MissingSection { kind: PromptKind::ScriptSecurity, section: "scripts" })?;
        let routine = |s: &String| Item::new(s.clone(), None, Source::ApiList);
        let apis: Vec<Item> = fs.invoked_apis.iter().take(MAX_PROMPT_APIS).map(routine).collect();
        let fns: Vec<Item> = fs.function_names.iter().map(routine).collect();
        let flags: Vec<Item> = fs
            .flags
            .iter()
            .filter(|f| !BUNDLER_COMMON.contains(f))
            .map(|f| Item::new(f.as_str(), Some(flag_severity(*f)), Source::StaticFlags))
            .collect();
        let strings: Vec<Item> = fs
            .string_findings
            .iter()
            .filter(|s| s.kind != StringFindingKind::Url || fs.flags.contains(&PatternFlag::SuspiciousUrlLiteral))
            .map(|s| Item::new(s.excerpt.clone(), Some(Severity::Medium), Source::StaticFlags))
            .collect();
        let mut d = Draft::new(PromptKind::ScriptSecurity.template());
        d.set("script_name", fs.script_name.clone())
            .set("obfuscated", if fs.is_obfuscated(cfg) { "Yes" } else { "No" })
            .set("issues", fs.issue_count(cfg).to_string())
            .set("dangerous", fs.dangerous_api_count.to_string())
            .list("apis", apis, comma_list)
            .list("functions", fns, comma_list)
            .list("flags", flags, |items, dropped| labelled_line("Flagged patterns", items, dropped))
            .list("strings", strings, |items, dropped| labelled_line("Suspicious strings", items, dropped));
        Ok(d)
    }

    fn dom_draft(&self, b: &EvidenceBundle) -> Draft {
        let m = &b.dom_meta;
        let mut suspicious = Vec::new();
        if m.hidden_elements > 0 {
            suspicious.push(Item::new(format!("Hidden elements: {}", m.hidden_elements), Some(Severity::Medium), Source::DomMeta));
        }
        for a in &m.external_form_actions {
            suspicious.push(Item::new(format!("Form submits to external URL: {a}"), Some(Severity::High), Source::DomMeta));
        }
        for brand in text::brand_mismatches(&m.brand_meta, &b.url) {
            suspicious.push(Item::new(format!("Brand in page metadata ({brand}) does not match the domain"), Some(Severity::High), Source::DomMeta));
        }
        let keywords = &self.detectors.sensitive_keywords;
        if m.password_fields > 0 || text::mentions_keyword(&b.visible_text, keywords) {
            let summary = summarize_text(&b.visible_text, keywords);
            if !summary.head.is_empty() {
                suspicious.push(Item::new(format!("Page text: {}", summary.head), None, Source::VisibleText));
            }
            for s in summary.keyword_sentences {
                suspicious.push(Item::new(format!("Sensitive text: {s}"), Some(Severity::Low), Source::VisibleText));
            }
        }
        let brand: Vec<Item> = m.brand_meta.iter().map(|(k, v)| Item::new(format!("{k}: {v}"), None, Source::DomMeta)).collect();
        let title = if m.title.is_empty() { "(none)".to_string() } else { m.title.clone() };
        let mut d = Draft::new(PromptKind::DomMetadata.template());
        d.set("url", b.url.raw.clone())
            .set("domain", b.url.domain())
            .set("title", title)
            .set("total_forms", m.total_forms.to_string())
            .set("login_forms", m.login_forms.to_string())
            .set("password_fields", m.password_fields.to_string())
            .set("email_fields", m.email_fields.to_string())
            .set("autocomplete_forms", m.autocomplete_forms.to_string())
            .list("suspicious", suspicious, |items, dropped| {
                let block = optional_block("SUSPICIOUS ELEMENTS:", items, dropped);
                block.trim_matches('\n').to_string()
            })
            .list("brand_meta", brand, |items, dropped| {
                let mut lines: Vec<String> = items.iter().map(|i| format!("- {i}")).collect();
                if dropped {
                    lines.push(TRUNCATION_MARKER.to_string());
                }
                if lines.is_empty() {
                    "- none".to_string()
                } else {
                    lines.join("\n")
                }
            });
        d
    }
}

/// Flags that ordinary bundler runtimes set; listed in the counts but not
/// spelled out as suspicious detail.
const BUNDLER_COMMON: &[PatternFlag] = &[
    PatternFlag::FunctionConstructor,
    PatternFlag::DynamicScriptInjection,
    PatternFlag::DomInjection,
    PatternFlag::StorageAccess,
    PatternFlag::EventCaptureMouse,
];

pub fn flag_severity(f: PatternFlag) -> Severity {
    match f {
        PatternFlag::EvalUsage | PatternFlag::DelayedStringExec | PatternFlag::NavigatorWebdriverCheck | PatternFlag::EventCaptureKeys => Severity::High,
        PatternFlag::DomInjection | PatternFlag::EventCaptureMouse | PatternFlag::StorageAccess => Severity::Low,
        _ => Severity::Medium,
    }
}

fn labelled_line(label: &str, items: &[&str], dropped: bool) -> String {
    if items.is_empty() && !dropped {
        return String::new();
    }
    format!("- {label}: {}\n", comma_list(items, dropped))
}

/// Rounded mean of per-script quality; 100 for a page without scripts.
pub fn page_quality(scripts: &[StaticFeatureSet]) -> u32 {
    if scripts.is_empty() {
        return 100;
    }
    let sum: u64 = scripts.iter().map(|s| s.code_quality_score as u64).sum();
    (sum as f64 / scripts.len() as f64).round() as u32
}

/// The script most worth describing: most issues, then most dangerous APIs,
/// then highest obfuscation; earliest wins ties.
pub fn pick_script<'a>(scripts: &'a [StaticFeatureSet], cfg: &DetectorConfig) -> Option<&'a StaticFeatureSet> {
    let key = |s: &StaticFeatureSet| (s.issue_count(cfg), s.dangerous_api_count, s.obfuscation_score);
    scripts.iter().enumerate().max_by(|(ia, a), (ib, b)| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal).then(ib.cmp(ia))).map(|(_, s)| s)
}

fn has_dynamic(b: &EvidenceBundle) -> bool {
    !b.trace.is_empty() || b.timings.contains_key("dynamic")
}

fn sandbox_draft(b: &EvidenceBundle) -> Result<Draft, PromptError> {
    if !has_dynamic(b) {
        return Err(PromptError::MissingSection { kind: PromptKind::SandboxBehavior, section: "trace" });
    }
    let (summary, risk) = summarize_trace(&b.trace);
    let mut worst: BTreeMap<&str, Severity> = BTreeMap::new();
    for e in b.trace.iter().filter(|e| is_countable(e)) {
        if let Some(s) = e.severity() {
            let w = worst.entry(e.api()).or_insert(s);
            *w = (*w).max(s);
        }
    }
    let apis: Vec<Item> =
        summary.counts.iter().map(|(n, c)| Item::new(format!("{n}: {c}x"), worst.get(n.as_str()).copied(), Source::ApiList)).collect();
    let mut d = Draft::new(PromptKind::SandboxBehavior.template());
    d.set("risk_categories", render_risk_categories(&risk))
        .list("api_summary", apis, comma_list)
        .list("observations", observations(&b.trace), |items, dropped| optional_block("Observed behavior:", items, dropped));
    Ok(d)
}

/// Medium-or-worse events as sentences, identical sentences coalesced.
fn observations(trace: &[TraceEvent]) -> Vec<Item> {
    let mut out: Vec<(String, Severity, usize)> = Vec::new();
    for e in trace {
        let Some(sev) = e.severity().filter(|s| *s >= Severity::Medium) else { continue };
        let text = e.describe();
        match out.iter_mut().find(|(t, _, _)| *t == text) {
            Some(o) => o.2 += 1,
            None => out.push((text, sev, 1)),
        }
    }
    out.into_iter()
        .map(|(t, s, n)| {
            let text = if n > 1 { format!("{t} ({n}x)") } else { t };
            Item::new(text, Some(s), Source::DynamicTrace)
        })
        .collect()
}

const SUSPICIOUS_GLOBAL_WORDS: &[&str] = &[
    "send", "post", "export", "transmit", "exfil", "exfiltrate", "steal", "stealer", "keylog", "keylogger", "logger", "keys",
    "keystroke", "keystrokes", "capture", "cred", "creds", "credentials", "password", "passwd", "token", "cookie", "cookies",
    "session", "hijack", "grab", "grabber", "harvest",
];

/// Whether a global's name reads like collection or transmission of user data,
/// judged word by word (`stealCreds`, `send_data`), so `DialogElement` stays clean.
pub fn is_suspicious_global(name: &str) -> bool {
    identifier_words(name).iter().any(|w| SUSPICIOUS_GLOBAL_WORDS.contains(&w.as_str()))
}

fn globals_draft(b: &EvidenceBundle) -> Result<Draft, PromptError> {
    if !has_dynamic(b) {
        return Err(PromptError::MissingSection { kind: PromptKind::GlobalProperties, section: "trace" });
    }
    let globals = global_names(b);
    let total = globals.len();
    let mut ordered: Vec<&String> = globals.iter().filter(|g| is_suspicious_global(g)).collect();
    ordered.extend(globals.iter().filter(|g| !is_suspicious_global(g)));
    let items: Vec<Item> = ordered
        .into_iter()
        .take(MAX_PROMPT_GLOBALS)
        .map(|g| {
            let sev = is_suspicious_global(g).then_some(Severity::Medium);
            Item::new(g.clone(), sev, Source::DynamicTrace)
        })
        .collect();
    let overflow = total > items.len();
    let mut d = Draft::new(PromptKind::GlobalProperties.template());
    d.set("url", b.url.raw.clone()).set("domain", b.url.domain()).set("total", total.to_string()).list("properties", items, move |items, dropped| {
        let mut lines: Vec<String> = items.iter().enumerate().map(|(i, g)| format!("{}. {g}", i + 1)).collect();
        if dropped || overflow {
            lines.push(TRUNCATION_MARKER.to_string());
        }
        if lines.is_empty() {
            "(none)".to_string()
        } else {
            lines.join("\n")
        }
    });
    Ok(d)
}

/// Globals from the bundle, falling back to `global_created` trace events.
fn global_names(b: &EvidenceBundle) -> Vec<String> {
    if !b.new_globals.is_empty() {
        return b.new_globals.clone();
    }
    let mut out: Vec<String> = Vec::new();
    for e in b.trace.iter().filter(|e| e.kind == TraceKind::GlobalCreated) {
        if let Some(n) = e.str_field("name") {
            if !out.iter().any(|x| x == n) {
                out.push(n.to_string());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::UrlRecord;
    use serde_json::json;

    fn bundle() -> EvidenceBundle {
        EvidenceBundle::empty(UrlRecord::parse("https://example.com/").unwrap())
    }

    #[test]
    fn token_estimate_rule() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens(&"a".repeat(350)), 100);
        assert_eq!(estimate_tokens("abcd"), 2);
        assert_eq!(estimate_tokens("é"), 1);
    }

    #[test]
    fn empty_bundle_dom_prompt() {
        let p = build(PromptKind::DomMetadata, &bundle(), DEFAULT_BUDGET_TOKENS).unwrap();
        assert!(p.body.contains("- Total forms: 0\n- Login forms: 0\n- Password fields: 0\n- Email/Login fields: 0\n- Forms with autocomplete: 0\n"));
        assert!(p.body.contains("Title: (none)"));
        assert!(p.body.contains("Meta tags suggesting brand:\n- none\n"));
        assert_eq!(p.system_preamble, SYSTEM_PREAMBLE);
    }

    #[test]
    fn missing_sections_are_named() {
        let b = bundle();
        assert_eq!(
            build(PromptKind::ScriptSecurity, &b, 3072).unwrap_err(),
            PromptError::MissingSection { kind: PromptKind::ScriptSecurity, section: "scripts" }
        );
        let e = build(PromptKind::SandboxBehavior, &b, 3072).unwrap_err();
        assert!(e.to_string().contains("trace"), "{e}");
        assert!(build(PromptKind::Trust, &b, 3072).is_ok());
    }

    #[test]
    fn dynamic_phase_with_empty_trace_is_enough() {
        let mut b = bundle();
        b.timings.insert("dynamic".into(), 5);
        let p = build(PromptKind::SandboxBehavior, &b, 3072).unwrap();
        assert!(p.body.contains("API Calls Summary:\nnone\n\nRisk Categories: none\n\nProvide"), "{}", p.body);
        let g = build(PromptKind::GlobalProperties, &b, 3072).unwrap();
        assert!(g.body.contains("Total New Global Properties: 0\n\nGLOBAL PROPERTIES DETECTED:\n(none)\n"));
    }

    #[test]
    fn tiny_budget_is_rejected() {
        let err = build(PromptKind::Trust, &bundle(), 20).unwrap_err();
        assert!(matches!(err, PromptError::BudgetTooSmall { .. }));
    }

    #[test]
    fn observations_coalesce() {
        let mut b = bundle();
        for _ in 0..3 {
            b.trace.push(TraceEvent::new(1, TraceKind::Eval, json!({"code": "x()"})));
        }
        let p = build(PromptKind::SandboxBehavior, &b, 3072).unwrap();
        assert!(p.body.contains("Risk Categories: medium: 3 risks\n\nObserved behavior:\n- Evaluated dynamic code via window.eval: x() (3x)\n\nProvide"), "{}", p.body);
    }

    struct Words;
    impl Tokenizer for Words {
        fn count(&self, text: &str) -> usize {
            text.split_whitespace().count()
        }
    }

    #[test]
    fn suspicious_globals_by_word() {
        for n in ["stealCreds", "sendData", "keyLogger", "session_token", "__grabber"] {
            assert!(is_suspicious_global(n), "{n}");
        }
        for n in ["DialogHelperElement", "webpackChunk", "postcssVersion", "Keyboard"] {
            assert!(!is_suspicious_global(n), "{n}");
        }
    }

    #[test]
    fn registered_tokenizer_is_used() {
        let b = PromptBuilder::new(3072).with_tokenizer(Arc::new(Words));
        let p = b.build(PromptKind::Trust, &bundle()).unwrap();
        assert_eq!(p.token_estimate, Words.count(&p.full_text()));
    }
}
