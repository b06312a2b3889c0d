//! Behavior trace events, their severity table, and the API-call summary.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::evidence::Severity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Fetch,
    Xhr,
    Websocket,
    Eval,
    ScriptAppend,
    DomInsert,
    DomRemove,
    CookieRead,
    CookieWrite,
    StorageAccess,
    TimerSet,
    ListenerAdd,
    ListenerRemove,
    GlobalCreated,
    Geolocation,
    InteractionSimulated,
    /// Any other host call worth counting (`querySelector`, `cloneNode`, ...).
    ApiCall,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Fetch => "fetch",
            TraceKind::Xhr => "xhr",
            TraceKind::Websocket => "websocket",
            TraceKind::Eval => "eval",
            TraceKind::ScriptAppend => "script_append",
            TraceKind::DomInsert => "dom_insert",
            TraceKind::DomRemove => "dom_remove",
            TraceKind::CookieRead => "cookie_read",
            TraceKind::CookieWrite => "cookie_write",
            TraceKind::StorageAccess => "storage_access",
            TraceKind::TimerSet => "timer_set",
            TraceKind::ListenerAdd => "listener_add",
            TraceKind::ListenerRemove => "listener_remove",
            TraceKind::GlobalCreated => "global_created",
            TraceKind::Geolocation => "geolocation",
            TraceKind::InteractionSimulated => "interaction_simulated",
            TraceKind::ApiCall => "api_call",
        }
    }

    pub fn parse(s: &str) -> Option<TraceKind> {
        serde_json::from_value(Value::String(s.to_string())).ok()
    }

    pub fn is_network(self) -> bool {
        matches!(self, TraceKind::Fetch | TraceKind::Xhr | TraceKind::Websocket)
    }

    fn default_api(self) -> &'static str {
        match self {
            TraceKind::Fetch => "window.fetch",
            TraceKind::Xhr => "XMLHttpRequest.send",
            TraceKind::Websocket => "window.WebSocket",
            TraceKind::Eval => "window.eval",
            TraceKind::ScriptAppend | TraceKind::DomInsert => "Node.appendChild",
            TraceKind::DomRemove => "Node.removeChild",
            TraceKind::CookieRead => "Document.cookie.get",
            TraceKind::CookieWrite => "Document.cookie.set",
            TraceKind::StorageAccess => "Storage.getItem",
            TraceKind::TimerSet => "window.setTimeout",
            TraceKind::ListenerAdd => "EventTarget.addEventListener",
            TraceKind::ListenerRemove => "EventTarget.removeEventListener",
            TraceKind::GlobalCreated => "newGlobalProperties",
            TraceKind::Geolocation => "Geolocation.getCurrentPosition",
            TraceKind::InteractionSimulated => "interaction",
            TraceKind::ApiCall => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Milliseconds of virtual time since sandbox start.
    pub timestamp: u64,
    pub kind: TraceKind,
    #[serde(default)]
    pub detail: Value,
}

impl TraceEvent {
    pub fn new(timestamp: u64, kind: TraceKind, detail: Value) -> Self {
        TraceEvent { timestamp, kind, detail }
    }

    pub fn str_field(&self, key: &str) -> Option<&str> {
        self.detail.get(key).and_then(Value::as_str)
    }

    fn bool_field(&self, key: &str) -> bool {
        self.detail.get(key).and_then(Value::as_bool).unwrap_or(false)
    }

    /// Name this event is counted under in the API summary.
    pub fn api(&self) -> &str {
        if self.kind == TraceKind::GlobalCreated {
            return "newGlobalProperties";
        }
        self.str_field("api").unwrap_or_else(|| self.kind.default_api())
    }

    pub fn url(&self) -> Option<&str> {
        self.str_field("url")
    }

    fn method(&self) -> String {
        self.str_field("method").unwrap_or("GET").to_ascii_uppercase()
    }

    fn tag(&self) -> String {
        self.str_field("tag").unwrap_or_default().to_ascii_lowercase()
    }

    fn attr(&self, name: &str) -> Option<&str> {
        self.detail.get("attrs").and_then(|a| a.get(name)).and_then(Value::as_str)
    }

    pub fn is_hidden(&self) -> bool {
        self.bool_field("hidden")
    }

    pub fn is_cross_origin(&self) -> bool {
        self.bool_field("cross_origin")
    }

    pub fn is_script_error(&self) -> bool {
        self.kind == TraceKind::Eval && self.api() == "script.error"
    }

    /// Risk of this single event; `None` for routine activity.
    pub fn severity(&self) -> Option<Severity> {
        match self.kind {
            TraceKind::Xhr if self.str_field("phase") == Some("open") => None,
            TraceKind::Fetch | TraceKind::Xhr => {
                let writes = matches!(self.method().as_str(), "POST" | "PUT" | "PATCH");
                Some(match (self.is_cross_origin(), writes) {
                    (true, true) => Severity::High,
                    (true, false) => Severity::Medium,
                    _ => Severity::Low,
                })
            }
            TraceKind::Websocket => Some(if self.is_cross_origin() { Severity::Medium } else { Severity::Low }),
            TraceKind::Eval if self.is_script_error() => None,
            TraceKind::Eval => Some(Severity::Medium),
            TraceKind::ScriptAppend if self.is_cross_origin() => Some(Severity::Medium),
            TraceKind::DomInsert => match self.tag().as_str() {
                "iframe" | "frame" if self.is_hidden() => Some(Severity::Medium),
                "input" if self.attr("type").is_some_and(|t| t.eq_ignore_ascii_case("password")) => Some(Severity::Medium),
                _ => None,
            },
            TraceKind::TimerSet if self.bool_field("string_handler") => Some(Severity::Medium),
            TraceKind::ListenerAdd if self.str_field("event").is_some_and(|e| e.starts_with("key")) => Some(Severity::Low),
            TraceKind::CookieRead | TraceKind::CookieWrite => Some(Severity::Low),
            TraceKind::Geolocation => Some(Severity::Medium),
            _ => None,
        }
    }

    /// One-sentence rendering used in prompts and reports.
    pub fn describe(&self) -> String {
        let url = self.url().unwrap_or("(unknown)");
        match self.kind {
            TraceKind::Fetch => format!("Made a network request to {url} via fetch ({} method).", self.method()),
            TraceKind::Xhr => format!("Made a network request to {url} via XMLHttpRequest ({} method).", self.method()),
            TraceKind::Websocket => format!("Opened a WebSocket connection to {url}."),
            TraceKind::Eval if self.is_script_error() => {
                format!("Script {} failed: {}.", self.str_field("script").unwrap_or("?"), self.str_field("error").unwrap_or("error"))
            }
            TraceKind::Eval => format!("Evaluated dynamic code via {}: {}", self.api(), self.str_field("code").unwrap_or("")),
            TraceKind::ScriptAppend => format!("Appended a script from {}.", self.str_field("src").filter(|s| !s.is_empty()).unwrap_or("inline source")),
            TraceKind::DomInsert => {
                let tag = self.tag();
                match tag.as_str() {
                    "iframe" | "frame" => {
                        let w = self.attr("width").unwrap_or("?");
                        let h = self.attr("height").unwrap_or("?");
                        let hidden = if self.is_hidden() { " (hidden)" } else { "" };
                        format!("Inserted an iframe pointing to {} with dimensions {w}x{h}{hidden}.", self.attr("src").unwrap_or("about:blank"))
                    }
                    "input" => {
                        let ty = self.attr("type").unwrap_or("text");
                        let label = self.str_field("label").or(self.attr("name")).unwrap_or("");
                        format!("Created an input field with type '{ty}' labeled '{label}'.")
                    }
                    "form" => format!("Inserted a form submitting to {}.", self.attr("action").unwrap_or("(same page)")),
                    _ => format!("Inserted a <{tag}> element."),
                }
            }
            TraceKind::DomRemove => format!("Removed a <{}> element.", self.tag()),
            TraceKind::CookieRead => match self.str_field("names").filter(|n| !n.is_empty()) {
                Some(n) => format!("Read cookie {n}."),
                None => "Read document.cookie.".to_string(),
            },
            TraceKind::CookieWrite => format!("Wrote cookie {}.", self.str_field("name").unwrap_or("?")),
            TraceKind::StorageAccess => format!("Accessed {} key {}.", self.api(), self.str_field("key").unwrap_or("?")),
            TraceKind::TimerSet if self.bool_field("string_handler") => {
                format!("Scheduled string code via {} after {} ms.", self.api(), self.detail.get("delay").and_then(Value::as_u64).unwrap_or(0))
            }
            TraceKind::TimerSet => format!("Scheduled a callback via {}.", self.api()),
            TraceKind::ListenerAdd => format!("Registered a {} listener.", self.str_field("event").unwrap_or("?")),
            TraceKind::ListenerRemove => format!("Removed a {} listener.", self.str_field("event").unwrap_or("?")),
            TraceKind::GlobalCreated => format!("Created global property {}.", self.str_field("name").unwrap_or("?")),
            TraceKind::Geolocation => "Called navigator.geolocation.getCurrentPosition.".to_string(),
            TraceKind::InteractionSimulated => format!("Simulated {} on {}.", self.str_field("event").unwrap_or("interaction"), self.str_field("target").unwrap_or("page")),
            TraceKind::ApiCall => format!("Called {}.", self.api()),
        }
    }
}

/// Per-API call counts, network APIs first, then by count descending, then name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ApiCallSummary {
    pub counts: Vec<(String, u64)>,
}

impl ApiCallSummary {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, c)| c).sum()
    }

    /// `window.fetch: 1x, EventTarget.addEventListener: 100x, ...`
    pub fn render(&self) -> String {
        self.counts.iter().map(|(n, c)| format!("{n}: {c}x")).collect::<Vec<_>>().join(", ")
    }
}

/// Whether an event is counted in the API summary.
pub fn is_countable(e: &TraceEvent) -> bool {
    e.kind != TraceKind::InteractionSimulated && !(e.kind == TraceKind::ApiCall && e.api() == "trace.truncated")
}

pub fn summarize_trace(trace: &[TraceEvent]) -> (ApiCallSummary, BTreeMap<Severity, u64>) {
    let mut counts: BTreeMap<(bool, String), u64> = BTreeMap::new();
    let mut risk: BTreeMap<Severity, u64> = Severity::ALL.iter().map(|s| (*s, 0)).collect();
    for e in trace {
        if let Some(s) = e.severity() {
            *risk.entry(s).or_default() += 1;
        }
        if is_countable(e) {
            *counts.entry((!e.kind.is_network(), e.api().to_string())).or_default() += 1;
        }
    }
    let mut rows: Vec<((bool, String), u64)> = counts.into_iter().collect();
    rows.sort_by(|((na, a), ca), ((nb, b), cb)| na.cmp(nb).then(cb.cmp(ca)).then(a.cmp(b)));
    let summary = ApiCallSummary { counts: rows.into_iter().map(|((_, n), c)| (n, c)).collect() };
    (summary, risk)
}

/// `low: 1 risks`, highest severity first; `none` when nothing is risky.
pub fn render_risk_categories(risk: &BTreeMap<Severity, u64>) -> String {
    let parts: Vec<String> = risk
        .iter()
        .rev()
        .filter(|(_, c)| **c > 0)
        .map(|(s, c)| format!("{}: {c} risks", s.as_str().to_ascii_lowercase()))
        .collect();
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(", ")
    }
}

/// Caps a trace at `max` events. Events of the lowest severity (unrated
/// first) are dropped, latest first, and a `trace.truncated` marker records
/// how many were lost.
pub fn cap_trace(trace: Vec<TraceEvent>, max: usize) -> (Vec<TraceEvent>, bool) {
    if trace.len() <= max || max == 0 {
        return (trace, false);
    }
    let keep = max - 1;
    let mut order: Vec<usize> = (0..trace.len()).collect();
    // most important first; among equals, earliest first
    order.sort_by(|&a, &b| trace[b].severity().cmp(&trace[a].severity()).then(a.cmp(&b)));
    let mut kept: Vec<usize> = order[..keep].to_vec();
    kept.sort_unstable();
    let dropped = trace.len() - keep;
    let last_ts = trace.iter().map(|e| e.timestamp).max().unwrap_or(0);
    let mut out: Vec<TraceEvent> = kept.into_iter().map(|i| trace[i].clone()).collect();
    out.push(TraceEvent::new(last_ts, TraceKind::ApiCall, json!({ "api": "trace.truncated", "dropped": dropped })));
    (out, true)
}

pub const TRACE_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub version: u32,
    pub url: String,
    pub events: Vec<TraceEvent>,
}

pub fn write_trace(path: &Path, url: &str, events: &[TraceEvent]) -> std::io::Result<()> {
    let file = TraceFile { version: TRACE_FILE_VERSION, url: url.to_string(), events: events.to_vec() };
    let text = serde_json::to_string_pretty(&file).map_err(std::io::Error::other)?;
    std::fs::write(path, text)
}

pub fn read_trace(path: &Path) -> std::io::Result<TraceFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(kind: TraceKind, detail: Value) -> TraceEvent {
        TraceEvent::new(0, kind, detail)
    }

    #[test]
    fn empty_trace_summary() {
        let (s, r) = summarize_trace(&[]);
        assert!(s.counts.is_empty());
        assert_eq!(r.len(), 4);
        assert!(r.values().all(|c| *c == 0));
        assert_eq!(render_risk_categories(&r), "none");
    }

    #[test]
    fn counts_sorted_by_count_then_name() {
        let mut t = Vec::new();
        for _ in 0..2 {
            t.push(ev(TraceKind::Eval, json!({"api": "window.eval", "code": "1"})));
        }
        for _ in 0..3 {
            t.push(ev(TraceKind::Fetch, json!({"api": "window.fetch", "url": "/x", "method": "GET"})));
        }
        t.push(ev(TraceKind::ApiCall, json!({"api": "Document.querySelector"})));
        t.push(ev(TraceKind::ApiCall, json!({"api": "Document.createElement"})));
        let (s, _) = summarize_trace(&t);
        assert_eq!(
            s.counts,
            vec![
                ("window.fetch".to_string(), 3),
                ("window.eval".to_string(), 2),
                ("Document.createElement".to_string(), 1),
                ("Document.querySelector".to_string(), 1),
            ]
        );
        assert_eq!(s.total(), 7);
    }

    #[test]
    fn network_calls_lead_the_summary() {
        let mut t = vec![ev(TraceKind::Fetch, json!({"url": "/a"}))];
        for _ in 0..5 {
            t.push(ev(TraceKind::ListenerAdd, json!({"event": "click"})));
        }
        let (s, _) = summarize_trace(&t);
        assert_eq!(s.render(), "window.fetch: 1x, EventTarget.addEventListener: 5x");
    }

    #[test]
    fn severity_table() {
        let post_x = ev(TraceKind::Fetch, json!({"url": "http://evil.test/", "method": "post", "cross_origin": true}));
        let get_x = ev(TraceKind::Xhr, json!({"url": "http://evil.test/", "method": "GET", "cross_origin": true}));
        let same = ev(TraceKind::Fetch, json!({"url": "/api", "method": "POST", "cross_origin": false}));
        assert_eq!(post_x.severity(), Some(Severity::High));
        assert_eq!(get_x.severity(), Some(Severity::Medium));
        assert_eq!(same.severity(), Some(Severity::Low));
        let iframe = ev(TraceKind::DomInsert, json!({"tag": "IFRAME", "attrs": {"width": "0", "height": "0"}, "hidden": true}));
        assert_eq!(iframe.severity(), Some(Severity::Medium));
        let div = ev(TraceKind::DomInsert, json!({"tag": "div", "hidden": true}));
        assert_eq!(div.severity(), None);
        let pw = ev(TraceKind::DomInsert, json!({"tag": "input", "attrs": {"type": "password"}}));
        assert_eq!(pw.severity(), Some(Severity::Medium));
        assert_eq!(ev(TraceKind::ListenerAdd, json!({"event": "keydown"})).severity(), Some(Severity::Low));
        assert_eq!(ev(TraceKind::ListenerAdd, json!({"event": "click"})).severity(), None);
        assert_eq!(ev(TraceKind::Eval, json!({"api": "script.error"})).severity(), None);
    }

    #[test]
    fn descriptions_match_prompt_phrasing() {
        let f = ev(TraceKind::Fetch, json!({"url": "http://malicious.com/api.php", "method": "POST"}));
        assert_eq!(f.describe(), "Made a network request to http://malicious.com/api.php via fetch (POST method).");
        let i = ev(
            TraceKind::DomInsert,
            json!({"tag": "iframe", "attrs": {"src": "https://secure-login.example.com/", "width": "0", "height": "0"}, "hidden": true}),
        );
        assert_eq!(i.describe(), "Inserted an iframe pointing to https://secure-login.example.com/ with dimensions 0x0 (hidden).");
        let p = ev(TraceKind::DomInsert, json!({"tag": "input", "attrs": {"type": "password", "name": "pw"}, "label": "Password"}));
        assert_eq!(p.describe(), "Created an input field with type 'password' labeled 'Password'.");
        assert_eq!(ev(TraceKind::CookieRead, json!({"names": "SESSIONID"})).describe(), "Read cookie SESSIONID.");
    }

    #[test]
    fn risk_categories_render_descending() {
        let t = vec![
            ev(TraceKind::CookieRead, json!({})),
            ev(TraceKind::Fetch, json!({"url": "http://x/", "method": "POST", "cross_origin": true})),
            ev(TraceKind::CookieWrite, json!({"name": "a"})),
        ];
        let (_, r) = summarize_trace(&t);
        assert_eq!(render_risk_categories(&r), "high: 1 risks, low: 2 risks");
    }

    #[test]
    fn cap_drops_lowest_severity_first() {
        let mut t = Vec::new();
        for i in 0..10 {
            t.push(TraceEvent::new(i, TraceKind::ApiCall, json!({"api": "Document.querySelector"})));
        }
        t.push(TraceEvent::new(3, TraceKind::Fetch, json!({"url": "http://x/", "method": "POST", "cross_origin": true})));
        t.push(TraceEvent::new(4, TraceKind::CookieRead, json!({})));
        let (out, truncated) = cap_trace(t, 5);
        assert!(truncated);
        assert_eq!(out.len(), 5);
        assert!(out.iter().any(|e| e.kind == TraceKind::Fetch));
        assert!(out.iter().any(|e| e.kind == TraceKind::CookieRead));
        let marker = out.last().unwrap();
        assert_eq!(marker.api(), "trace.truncated");
        assert_eq!(marker.detail["dropped"], 8);
        let (same, t2) = cap_trace(out.clone(), 10);
        assert!(!t2);
        assert_eq!(same, out);
    }

    #[test]
    fn trace_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trace.json");
        let events = vec![ev(TraceKind::Websocket, json!({"url": "wss://x/"}))];
        write_trace(&p, "https://a.test/", &events).unwrap();
        let back = read_trace(&p).unwrap();
        assert_eq!(back.events, events);
        assert_eq!(back.version, TRACE_FILE_VERSION);
        assert_eq!(TraceKind::parse("script_append"), Some(TraceKind::ScriptAppend));
    }
}
