//! Rule-based scoring of raw evidence, independent of any model verdict.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::WeightTable;
use crate::evidence::{EvidenceBundle, Finding, FindingCategory, Severity};
use crate::prompt::url_hints;
use crate::sandbox::trace::{TraceEvent, TraceKind};
use crate::static_analysis::{DetectorConfig, PatternFlag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceCategory {
    HiddenIframe,
    ExternalPostExfil,
    ExternalFormAction,
    PasswordFieldInjected,
    DynamicEval,
    StringTimer,
    ObfuscatedScript,
    AtobScriptInjection,
    WebdriverCheck,
    Keylogger,
    SuspiciousUrl,
    CrossOriginScript,
    GeolocationProbe,
    ExternalWebsocket,
    InsecurePractice,
}

impl EvidenceCategory {
    pub const ALL: [EvidenceCategory; 15] = [
        EvidenceCategory::HiddenIframe,
        EvidenceCategory::ExternalPostExfil,
        EvidenceCategory::ExternalFormAction,
        EvidenceCategory::PasswordFieldInjected,
        EvidenceCategory::DynamicEval,
        EvidenceCategory::StringTimer,
        EvidenceCategory::ObfuscatedScript,
        EvidenceCategory::AtobScriptInjection,
        EvidenceCategory::WebdriverCheck,
        EvidenceCategory::Keylogger,
        EvidenceCategory::SuspiciousUrl,
        EvidenceCategory::CrossOriginScript,
        EvidenceCategory::GeolocationProbe,
        EvidenceCategory::ExternalWebsocket,
        EvidenceCategory::InsecurePractice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EvidenceCategory::HiddenIframe => "hidden_iframe",
            EvidenceCategory::ExternalPostExfil => "external_post_exfil",
            EvidenceCategory::ExternalFormAction => "external_form_action",
            EvidenceCategory::PasswordFieldInjected => "password_field_injected",
            EvidenceCategory::DynamicEval => "dynamic_eval",
            EvidenceCategory::StringTimer => "string_timer",
            EvidenceCategory::ObfuscatedScript => "obfuscated_script",
            EvidenceCategory::AtobScriptInjection => "atob_script_injection",
            EvidenceCategory::WebdriverCheck => "webdriver_check",
            EvidenceCategory::Keylogger => "keylogger",
            EvidenceCategory::SuspiciousUrl => "suspicious_url",
            EvidenceCategory::CrossOriginScript => "cross_origin_script",
            EvidenceCategory::GeolocationProbe => "geolocation_probe",
            EvidenceCategory::ExternalWebsocket => "external_websocket",
            EvidenceCategory::InsecurePractice => "insecure_practice",
        }
    }
}

impl fmt::Display for EvidenceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvidenceScore {
    /// Sum of matched category weights, capped at 100.
    pub points: u32,
    pub matched: Vec<EvidenceCategory>,
    pub findings: Vec<Finding>,
}

impl EvidenceScore {
    /// A score with points but no itemized findings.
    pub fn from_points(points: u32) -> Self {
        EvidenceScore { points: points.min(100), ..Default::default() }
    }
}

fn is_write(e: &TraceEvent) -> bool {
    matches!(e.str_field("method").map(str::to_ascii_uppercase).as_deref(), Some("POST" | "PUT" | "PATCH"))
}

fn is_tag(e: &TraceEvent, tags: &[&str]) -> bool {
    e.str_field("tag").is_some_and(|t| tags.iter().any(|x| t.eq_ignore_ascii_case(x)))
}

fn attr<'a>(e: &'a TraceEvent, name: &str) -> Option<&'a str> {
    e.detail.get("attrs").and_then(|a| a.get(name)).and_then(|v| v.as_str())
}

struct Matcher {
    hits: BTreeMap<EvidenceCategory, (Finding, Vec<String>)>,
}

impl Matcher {
    fn hit(&mut self, cat: EvidenceCategory, title: &str, category: FindingCategory, severity: Severity, reference: String) {
        let entry = self.hits.entry(cat).or_insert_with(|| (Finding { title: title.to_string(), category, severity, evidence_refs: Vec::new() }, Vec::new()));
        if !entry.1.contains(&reference) {
            entry.1.push(reference);
        }
    }
}

pub fn score_evidence(bundle: &EvidenceBundle, weights: &WeightTable) -> EvidenceScore {
    score_evidence_with(bundle, weights, &DetectorConfig::default())
}

pub fn score_evidence_with(bundle: &EvidenceBundle, weights: &WeightTable, detectors: &DetectorConfig) -> EvidenceScore {
    use EvidenceCategory as C;
    use FindingCategory as F;
    let mut m = Matcher { hits: BTreeMap::new() };
    let outbound = bundle.trace.iter().any(|e| e.kind.is_network() && e.str_field("phase") != Some("open"));
    for (i, e) in bundle.trace.iter().enumerate() {
        let r = format!("trace:{i}");
        match e.kind {
            TraceKind::DomInsert if is_tag(e, &["iframe", "frame"]) && e.is_hidden() => {
                m.hit(C::HiddenIframe, "Hidden iframe inserted at runtime", F::HiddenElement, Severity::Medium, r)
            }
            TraceKind::DomInsert if is_tag(e, &["input"]) && attr(e, "type").is_some_and(|t| t.eq_ignore_ascii_case("password")) => {
                m.hit(C::PasswordFieldInjected, "Password field created by script", F::CredentialHarvesting, Severity::Medium, r)
            }
            TraceKind::Fetch | TraceKind::Xhr if e.is_cross_origin() && is_write(e) && e.str_field("phase") != Some("open") => {
                m.hit(C::ExternalPostExfil, "Data sent to a third-party origin", F::DataExfiltration, Severity::High, r)
            }
            TraceKind::Eval if !e.is_script_error() => m.hit(C::DynamicEval, "Dynamic code evaluated at runtime", F::DynamicInjection, Severity::Medium, r),
            TraceKind::TimerSet if e.detail.get("string_handler").and_then(|v| v.as_bool()) == Some(true) => {
                m.hit(C::StringTimer, "Timer scheduled with a code string", F::DynamicInjection, Severity::Medium, r)
            }
            TraceKind::ScriptAppend if e.is_cross_origin() => {
                m.hit(C::CrossOriginScript, "Third-party script injected at runtime", F::DynamicInjection, Severity::Medium, r)
            }
            TraceKind::Geolocation => m.hit(C::GeolocationProbe, "Geolocation requested without interaction", F::Other, Severity::Low, r),
            TraceKind::Websocket if e.is_cross_origin() => {
                m.hit(C::ExternalWebsocket, "WebSocket opened to a third-party origin", F::DataExfiltration, Severity::Medium, r)
            }
            TraceKind::ListenerAdd if outbound && e.str_field("event").is_some_and(|ev| ev.starts_with("key")) => {
                m.hit(C::Keylogger, "Keystroke capture alongside outbound requests", F::Keylogging, Severity::High, r)
            }
            _ => {}
        }
    }
    for s in &bundle.scripts {
        let r = format!("script:{}", s.script_name);
        if s.is_obfuscated(detectors) {
            m.hit(C::ObfuscatedScript, "Obfuscated script", F::Obfuscation, Severity::Medium, r.clone());
        }
        if s.flags.contains(&PatternFlag::Base64Decode) && s.flags.contains(&PatternFlag::DynamicScriptInjection) {
            m.hit(C::AtobScriptInjection, "Decoded payload injected as a script", F::DynamicInjection, Severity::High, r.clone());
        }
        if s.flags.contains(&PatternFlag::DelayedStringExec) {
            m.hit(C::StringTimer, "Timer scheduled with a code string", F::DynamicInjection, Severity::Medium, r.clone());
        }
        if s.flags.contains(&PatternFlag::NavigatorWebdriverCheck) {
            m.hit(C::WebdriverCheck, "Automation check (possible cloaking)", F::Other, Severity::Medium, r.clone());
        }
        if s.flags.contains(&PatternFlag::EventCaptureKeys) && outbound {
            m.hit(C::Keylogger, "Keystroke capture alongside outbound requests", F::Keylogging, Severity::High, r.clone());
        }
        if s.flags.contains(&PatternFlag::SuspiciousUrlLiteral) {
            m.hit(C::SuspiciousUrl, "Suspicious URL referenced by script", F::Other, Severity::Medium, r.clone());
        }
        if s.flags.contains(&PatternFlag::CookieAccess) {
            m.hit(C::InsecurePractice, "Script reads or writes cookies", F::InsecurePractice, Severity::Low, r);
        }
    }
    let meta = &bundle.dom_meta;
    if !meta.external_form_actions.is_empty() {
        let sev = if meta.password_fields > 0 { Severity::High } else { Severity::Medium };
        m.hit(C::ExternalFormAction, "Form submits to an external domain", F::CredentialHarvesting, sev, "dom:forms".into());
    }
    for (hint, sev) in url_hints(&bundle.url, &detectors.suspicious_tlds) {
        if sev >= Severity::Medium {
            m.hit(C::SuspiciousUrl, &format!("Suspicious URL: {hint}"), F::Other, sev, "url".into());
        }
    }
    if !bundle.url.is_https() {
        m.hit(C::InsecurePractice, "Page served without TLS", F::InsecurePractice, Severity::Low, "url".into());
    }
    let mut points = 0u32;
    let mut matched = Vec::new();
    let mut findings = Vec::new();
    for (cat, (mut f, refs)) in m.hits {
        if !weights.excluded_from_points.contains(&cat) {
            points += weights.evidence.get(&cat).copied().unwrap_or(0);
        }
        matched.push(cat);
        f.evidence_refs = refs;
        findings.push(f);
    }
    EvidenceScore { points: points.min(100), matched, findings }
}
