//! Shared domain types: severities, URLs, findings and the evidence bundle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sandbox::trace::TraceEvent;
use crate::static_analysis::StaticFeatureSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvidenceError {
    #[error("invalid URL {raw:?}: {reason}")]
    InvalidUrl { raw: String, reason: String },
    #[error("cannot merge evidence for different URLs: {left} vs {right}")]
    UrlMismatch { left: String, right: String },
    #[error("unknown severity {0:?}")]
    UnknownSeverity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Severity {
    #[default]
    Low,
    Medium,
    High,
    Critical,
}

impl Severity {
    pub const ALL: [Severity; 4] = [Severity::Low, Severity::Medium, Severity::High, Severity::Critical];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Low => "Low",
            Severity::Medium => "Medium",
            Severity::High => "High",
            Severity::Critical => "Critical",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = EvidenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(Severity::Low),
            "medium" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            "critical" => Ok(Severity::Critical),
            _ => Err(EvidenceError::UnknownSeverity(s.to_string())),
        }
    }
}

/// Highest severity in `findings`; `Low` when there are none.
pub fn max_severity(findings: &[Finding]) -> Severity {
    findings.iter().map(|f| f.severity).max().unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign,
    Malicious,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Benign => "benign",
            Label::Malicious => "malicious",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlRecord {
    pub raw: String,
    pub scheme: String,
    pub host: String,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl UrlRecord {
    pub fn parse(raw: &str) -> Result<Self, EvidenceError> {
        let invalid = |reason: String| EvidenceError::InvalidUrl { raw: raw.to_string(), reason };
        let parsed = url::Url::parse(raw.trim()).map_err(|e| invalid(e.to_string()))?;
        let host = parsed.host_str().unwrap_or_default().to_ascii_lowercase();
        if host.is_empty() {
            return Err(invalid("missing host".into()));
        }
        Ok(UrlRecord {
            raw: raw.trim().to_string(),
            scheme: parsed.scheme().to_string(),
            host,
            path: parsed.path().to_string(),
            label: None,
        })
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn is_https(&self) -> bool {
        self.scheme == "https"
    }

    /// Host with a leading `www.` removed, as shown to the model.
    pub fn domain(&self) -> &str {
        self.host.strip_prefix("www.").unwrap_or(&self.host)
    }

    /// Scheme, host and port of the URL.
    pub fn origin(&self) -> String {
        match url::Url::parse(&self.raw) {
            Ok(u) => u.origin().ascii_serialization(),
            Err(_) => format!("{}://{}", self.scheme, self.host),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingCategory {
    CredentialHarvesting,
    DataExfiltration,
    Keylogging,
    SessionHijacking,
    Obfuscation,
    DynamicInjection,
    HiddenElement,
    BrandMismatch,
    InsecurePractice,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub title: String,
    pub category: FindingCategory,
    pub severity: Severity,
    /// Identifiers such as `trace:3`, `script:app.js` or `verdict:dom_metadata`.
    #[serde(default)]
    pub evidence_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DomMetadata {
    pub title: String,
    pub total_forms: u32,
    pub login_forms: u32,
    pub password_fields: u32,
    pub email_fields: u32,
    pub autocomplete_forms: u32,
    pub brand_meta: BTreeMap<String, String>,
    pub hidden_elements: u32,
    /// Forms whose `action` points at another host.
    #[serde(default)]
    pub external_form_actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceBundle {
    pub url: UrlRecord,
    #[serde(default)]
    pub scripts: Vec<StaticFeatureSet>,
    #[serde(default)]
    pub trace: Vec<TraceEvent>,
    #[serde(default)]
    pub visible_text: String,
    #[serde(default)]
    pub dom_meta: DomMetadata,
    #[serde(default)]
    pub new_globals: Vec<String>,
    /// Phase name to milliseconds. `dynamic_virtual` is the span of the
    /// sandbox's virtual clock; the others are wall-clock.
    #[serde(default)]
    pub timings: BTreeMap<String, u64>,
}

impl EvidenceBundle {
    pub fn empty(url: UrlRecord) -> Self {
        EvidenceBundle {
            url,
            scripts: Vec::new(),
            trace: Vec::new(),
            visible_text: String::new(),
            dom_meta: DomMetadata::default(),
            new_globals: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    /// True when `reference` names an item held by this bundle.
    pub fn resolves(&self, reference: &str) -> bool {
        let Some((kind, id)) = reference.split_once(':') else {
            return false;
        };
        match kind {
            "trace" => id.parse::<usize>().is_ok_and(|i| i < self.trace.len()),
            "script" => self.scripts.iter().any(|s| s.script_name == id || s.script_id == id),
            "global" => self.new_globals.iter().any(|g| g == id),
            "dom" | "url" | "text" => true,
            _ => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Combines evidence gathered for the same URL by separate phases.
///
/// Scripts are unioned by content digest, trace events are re-sorted by
/// timestamp (stable, so equal timestamps keep their input order), globals are
/// unioned, and timings from `b` override those of `a` for the same phase.
pub fn merge_bundles(a: EvidenceBundle, b: EvidenceBundle) -> Result<EvidenceBundle, EvidenceError> {
    if a.url.raw != b.url.raw {
        return Err(EvidenceError::UrlMismatch { left: a.url.raw, right: b.url.raw });
    }
    let mut out = a;
    for s in b.scripts {
        if !out.scripts.iter().any(|x| x.script_id == s.script_id) {
            out.scripts.push(s);
        }
    }
    out.trace.extend(b.trace);
    out.trace.sort_by_key(|e| e.timestamp);
    for g in b.new_globals {
        if !out.new_globals.contains(&g) {
            out.new_globals.push(g);
        }
    }
    if !b.visible_text.is_empty() {
        out.visible_text = b.visible_text;
    }
    if b.dom_meta != DomMetadata::default() {
        out.dom_meta = b.dom_meta;
    }
    out.timings.extend(b.timings);
    if out.url.label.is_none() {
        out.url.label = b.url.label;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sandbox::trace::TraceKind;
    use crate::static_analysis::analyze_script;

    fn url() -> UrlRecord {
        UrlRecord::parse("https://example.com/a/b?q=1").unwrap()
    }

    fn ev(t: u64, api: &str) -> TraceEvent {
        TraceEvent::new(t, TraceKind::ApiCall, serde_json::json!({ "api": api }))
    }

    fn finding(sev: Severity) -> Finding {
        Finding { title: "x".into(), category: FindingCategory::Other, severity: sev, evidence_refs: vec![] }
    }

    #[test]
    fn url_record_parses_parts() {
        let u = url();
        assert_eq!((u.scheme.as_str(), u.host.as_str(), u.path.as_str()), ("https", "example.com", "/a/b"));
        assert!(UrlRecord::parse("not a url").is_err());
        assert!(UrlRecord::parse("file:///etc/passwd").is_err());
        assert_eq!(UrlRecord::parse("https://www.github.com").unwrap().domain(), "github.com");
    }

    #[test]
    fn severity_is_totally_ordered() {
        assert!(Severity::Low < Severity::Medium && Severity::Medium < Severity::High && Severity::High < Severity::Critical);
        assert_eq!("critical".parse::<Severity>().unwrap(), Severity::Critical);
        assert_eq!(serde_json::to_string(&Severity::High).unwrap(), "\"High\"");
    }

    #[test]
    fn max_severity_over_all_permutations() {
        assert_eq!(max_severity(&[]), Severity::Low);
        let sevs = Severity::ALL;
        let mut count = 0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let idx = [a, b, c, d];
                        let mut seen = [false; 4];
                        idx.iter().for_each(|&i| seen[i] = true);
                        if seen.iter().all(|&s| s) {
                            let fs: Vec<_> = idx.iter().map(|&i| finding(sevs[i])).collect();
                            assert_eq!(max_severity(&fs), Severity::Critical);
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 24);
        let mixed = [finding(Severity::Low), finding(Severity::Critical), finding(Severity::Medium)];
        assert_eq!(max_severity(&mixed), Severity::Critical);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let mut b = EvidenceBundle::empty(url());
        b.trace = vec![ev(1, "a"), ev(4, "b")];
        b.new_globals = vec!["x".into()];
        b.visible_text = "hello".into();
        b.dom_meta.total_forms = 2;
        b.timings.insert("static".into(), 3);
        b.scripts.push(analyze_script("a.js", "var a = 1;"));
        let merged = merge_bundles(b.clone(), EvidenceBundle::empty(url())).unwrap();
        assert_eq!(merged, b);
    }

    #[test]
    fn merge_sorts_trace_and_dedupes_scripts() {
        let mut a = EvidenceBundle::empty(url());
        a.trace = vec![ev(5, "x"), ev(1, "y")];
        a.scripts = vec![analyze_script("s1.js", "var one = 1;"), analyze_script("inline#0", "f()")];
        a.timings.insert("dynamic".into(), 10);
        let mut b = EvidenceBundle::empty(url());
        b.trace = vec![ev(3, "z")];
        // same content as inline#0 under another name: same script id
        b.scripts = vec![analyze_script("s2.js", "var two = 2;"), analyze_script("inline#1", "f()")];
        b.timings.insert("dynamic".into(), 20);
        let m = merge_bundles(a, b).unwrap();
        let ts: Vec<u64> = m.trace.iter().map(|e| e.timestamp).collect();
        assert_eq!(ts, [1, 3, 5]);
        let names: Vec<&str> = m.scripts.iter().map(|s| s.script_name.as_str()).collect();
        assert_eq!(names, ["s1.js", "inline#0", "s2.js"]);
        assert_eq!(m.timings["dynamic"], 20);
    }

    #[test]
    fn merge_rejects_mismatched_urls() {
        let a = EvidenceBundle::empty(url());
        let b = EvidenceBundle::empty(UrlRecord::parse("https://other.org/").unwrap());
        let err = merge_bundles(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("example.com") && msg.contains("other.org"), "{msg}");
    }

    #[test]
    fn bundle_json_round_trip() {
        let mut b = EvidenceBundle::empty(url().with_label(Label::Malicious));
        b.trace = vec![ev(2, "fetch")];
        b.scripts.push(analyze_script("x.js", "eval('1')"));
        let back = EvidenceBundle::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn references_resolve_against_bundle() {
        let mut b = EvidenceBundle::empty(url());
        b.trace = vec![ev(0, "fetch")];
        b.scripts.push(analyze_script("x.js", ""));
        assert!(b.resolves("trace:0"));
        assert!(!b.resolves("trace:1"));
        assert!(b.resolves("script:x.js"));
        assert!(!b.resolves("script:y.js"));
        assert!(!b.resolves("bogus"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn bundle_from(times: Vec<u64>, srcs: Vec<String>) -> EvidenceBundle {
            let mut b = EvidenceBundle::empty(url());
            b.trace = times.into_iter().map(|t| ev(t, "a")).collect();
            b.trace.sort_by_key(|e| e.timestamp);
            for s in srcs {
                let fs = analyze_script("s", &s);
                if !b.scripts.iter().any(|x| x.script_id == fs.script_id) {
                    b.scripts.push(fs);
                }
            }
            b
        }

        fn norm(b: &EvidenceBundle) -> (Vec<u64>, Vec<String>) {
            let t = b.trace.iter().map(|e| e.timestamp).collect();
            let mut s: Vec<String> = b.scripts.iter().map(|x| x.script_id.clone()).collect();
            s.sort();
            (t, s)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn merge_is_associative_on_sets(
                t1 in proptest::collection::vec(0u64..50, 0..6),
                t2 in proptest::collection::vec(0u64..50, 0..6),
                t3 in proptest::collection::vec(0u64..50, 0..6),
                s1 in proptest::collection::vec("[a-c]{1,2}", 0..3),
                s2 in proptest::collection::vec("[a-c]{1,2}", 0..3),
                s3 in proptest::collection::vec("[a-c]{1,2}", 0..3),
            ) {
                let (a, b, c) = (bundle_from(t1, s1), bundle_from(t2, s2), bundle_from(t3, s3));
                let left = merge_bundles(merge_bundles(a.clone(), b.clone()).unwrap(), c.clone()).unwrap();
                let right = merge_bundles(a, merge_bundles(b, c).unwrap()).unwrap();
                prop_assert_eq!(norm(&left), norm(&right));
                prop_assert!(left.trace.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
            }

            #[test]
            fn max_severity_ignores_order(mut idx in proptest::collection::vec(0usize..4, 0..10), seed in any::<u64>()) {
                let fs: Vec<_> = idx.iter().map(|&i| finding(Severity::ALL[i])).collect();
                let before = max_severity(&fs);
                let n = idx.len().max(1);
                idx.rotate_left((seed as usize) % n);
                let fs2: Vec<_> = idx.iter().rev().map(|&i| finding(Severity::ALL[i])).collect();
                prop_assert_eq!(before, max_severity(&fs2));
            }
        }
    }
}
