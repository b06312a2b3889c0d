//! Per-script static features: identifiers, pattern flags, string findings,
//! obfuscation and quality scores, and invoked APIs.

mod config;
mod detect;
mod fallback;
pub mod obfuscation;
mod strings;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{DetectorConfig, ObfuscationConfig, ObfuscationWeights, QualityConfig};
pub use obfuscation::{score_obfuscation, ObfuscationStats};
pub use strings::{identifier_words, StringFinding, StringFindingKind};

use crate::js;

#[derive(Debug, Error)]
pub enum StaticError {
    #[error("detector config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternFlag {
    EvalUsage,
    FunctionConstructor,
    DelayedStringExec,
    DynamicScriptInjection,
    Base64Decode,
    NavigatorWebdriverCheck,
    DomInjection,
    EventCaptureKeys,
    EventCaptureMouse,
    CookieAccess,
    StorageAccess,
    SensitiveKeyword,
    SuspiciousUrlLiteral,
    OpaqueControlFlow,
}

impl PatternFlag {
    pub const ALL: [PatternFlag; 14] = [
        PatternFlag::EvalUsage,
        PatternFlag::FunctionConstructor,
        PatternFlag::DelayedStringExec,
        PatternFlag::DynamicScriptInjection,
        PatternFlag::Base64Decode,
        PatternFlag::NavigatorWebdriverCheck,
        PatternFlag::DomInjection,
        PatternFlag::EventCaptureKeys,
        PatternFlag::EventCaptureMouse,
        PatternFlag::CookieAccess,
        PatternFlag::StorageAccess,
        PatternFlag::SensitiveKeyword,
        PatternFlag::SuspiciousUrlLiteral,
        PatternFlag::OpaqueControlFlow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternFlag::EvalUsage => "eval_usage",
            PatternFlag::FunctionConstructor => "function_constructor",
            PatternFlag::DelayedStringExec => "delayed_string_exec",
            PatternFlag::DynamicScriptInjection => "dynamic_script_injection",
            PatternFlag::Base64Decode => "base64_decode",
            PatternFlag::NavigatorWebdriverCheck => "navigator_webdriver_check",
            PatternFlag::DomInjection => "dom_injection",
            PatternFlag::EventCaptureKeys => "event_capture_keys",
            PatternFlag::EventCaptureMouse => "event_capture_mouse",
            PatternFlag::CookieAccess => "cookie_access",
            PatternFlag::StorageAccess => "storage_access",
            PatternFlag::SensitiveKeyword => "sensitive_keyword",
            PatternFlag::SuspiciousUrlLiteral => "suspicious_url_literal",
            PatternFlag::OpaqueControlFlow => "opaque_control_flow",
        }
    }
}

impl fmt::Display for PatternFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticFeatureSet {
    pub script_name: String,
    /// SHA-256 of the source text; the script's identity.
    pub script_id: String,
    pub parse_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    pub function_names: Vec<String>,
    pub anonymous_fn_count: usize,
    pub variable_names: Vec<String>,
    pub flags: BTreeSet<PatternFlag>,
    pub string_findings: Vec<StringFinding>,
    pub obfuscation_score: f64,
    pub code_quality_score: u32,
    pub dangerous_api_count: usize,
    pub invoked_apis: Vec<String>,
}

impl StaticFeatureSet {
    pub fn is_obfuscated(&self, cfg: &DetectorConfig) -> bool {
        self.obfuscation_score >= cfg.obfuscation.obfuscated_threshold
    }

    pub fn issue_count(&self, cfg: &DetectorConfig) -> usize {
        self.flags.intersection(&cfg.quality.issue_flags).count()
    }
}

pub fn script_id(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

/// `100 - round(100 * obfuscation * factor) - penalty * issues`, clamped to [0, 100].
pub fn code_quality_score(obfuscation: f64, issues: usize, cfg: &QualityConfig) -> u32 {
    let q = 100.0 - (100.0 * obfuscation * cfg.obfuscation_factor).round() - (cfg.issue_penalty as f64) * issues as f64;
    q.clamp(0.0, 100.0) as u32
}

pub fn analyze_script(name: &str, source: &str) -> StaticFeatureSet {
    analyze_script_with(name, source, &DetectorConfig::default())
}

pub fn analyze_script_with(name: &str, source: &str, cfg: &DetectorConfig) -> StaticFeatureSet {
    let mut scanner = strings::StringScanner::new(cfg);
    let (parse_ok, parse_error, flags, stats, fns, anon, vars, dangerous, apis);
    match js::parse_script(source) {
        Ok(program) => {
            let mut d = detect::Detector::new(scanner, cfg.opaque_nesting_depth);
            d.run(&program);
            d.stats.set_source(source);
            parse_ok = true;
            parse_error = None;
            flags = d.flags;
            stats = d.stats;
            fns = d.function_names;
            anon = d.anonymous_fn_count;
            vars = d.variable_names;
            dangerous = d.dangerous_api_count;
            apis = d.invoked_apis;
            scanner = d.strings;
        }
        Err(e) => {
            let (line, col) = e.line_col(source);
            parse_ok = false;
            parse_error = Some(format!("{} at {line}:{col}", e.message));
            flags = fallback::scan(source, &mut scanner);
            let mut s = ObfuscationStats::default();
            s.set_source(source);
            stats = s;
            fns = Vec::new();
            anon = 0;
            vars = Vec::new();
            dangerous = 0;
            apis = Vec::new();
        }
    }
    let obfuscation_score = score_obfuscation(&stats, &cfg.obfuscation);
    let issues = flags.intersection(&cfg.quality.issue_flags).count();
    StaticFeatureSet {
        script_name: name.to_string(),
        script_id: script_id(source),
        parse_ok,
        parse_error,
        function_names: fns,
        anonymous_fn_count: anon,
        variable_names: vars,
        flags,
        string_findings: scanner.findings,
        obfuscation_score,
        code_quality_score: code_quality_score(obfuscation_score, issues, &cfg.quality),
        dangerous_api_count: dangerous,
        invoked_apis: apis,
    }
}

/// The per-script "Key indicators" block of the script prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptSummary {
    pub script_name: String,
    pub obfuscated: bool,
    pub security_issues: usize,
    pub invoked_apis: Vec<String>,
    pub defined_functions: Vec<String>,
    pub dangerous_apis: usize,
}

pub fn summarize_for_prompt(fs: &StaticFeatureSet, max_apis: usize) -> ScriptSummary {
    summarize_for_prompt_with(fs, max_apis, &DetectorConfig::default())
}

pub fn summarize_for_prompt_with(fs: &StaticFeatureSet, max_apis: usize, cfg: &DetectorConfig) -> ScriptSummary {
    ScriptSummary {
        script_name: fs.script_name.clone(),
        obfuscated: fs.is_obfuscated(cfg),
        security_issues: fs.issue_count(cfg),
        invoked_apis: fs.invoked_apis.iter().take(max_apis).cloned().collect(),
        defined_functions: fs.function_names.clone(),
        dangerous_apis: fs.dangerous_api_count,
    }
}
