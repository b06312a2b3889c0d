//! Page snapshots (saved copies on disk or fetched live) and corpus manifests.
//!
//! A snapshot directory holds `page.html`, `manifest.json` and the external
//! script files the manifest names:
//!
//! ```json
//! {
//!   "url": "https://github.com/",
//!   "fetched_at": 1718000000,
//!   "tls": true,
//!   "scripts": [{ "url": "https://cdn.example/app.js", "file": "app.js" }],
//!   "responses": { "https://api.example/x": "x.json" }
//! }
//! ```
//!
//! `responses` is optional and maps request URLs to local files the sandbox
//! serves instead of touching the network.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use scraper::{Html, Selector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::{EvidenceError, Label, UrlRecord};

pub const USER_AGENT: &str =
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/124.0.0.0 Safari/537.36";
pub const MAX_REDIRECTS: u32 = 5;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{0}: manifest.json not found")]
    MissingManifest(PathBuf),
    #[error("{path}: malformed JSON: {source}")]
    BadJson {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("script file {0} listed in manifest is missing")]
    MissingScript(PathBuf),
    #[error("{0}: page.html is missing or empty")]
    EmptyHtml(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Url(#[from] EvidenceError),
    #[error("unsupported scheme {0:?}; only http and https can be fetched")]
    UnsupportedScheme(String),
    #[error("{url} answered HTTP {status}")]
    Status { url: String, status: u16 },
    #[error("timed out after {elapsed_ms} ms fetching {url}")]
    Timeout {
        url: String,
        elapsed_ms: u64,
        /// Snapshot with the document body, when it arrived before the deadline.
        partial: Option<Box<PageSnapshot>>,
    },
    #[error("fetching {url}: {message}")]
    Transport { url: String, message: String },
    #[error("corpus manifest has no entries")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptOrigin {
    Inline,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptSource {
    pub name: String,
    pub source: String,
    pub origin: ScriptOrigin,
    /// Absolute URL for external scripts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    /// Set when the resource could not be retrieved; `source` is then empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageSnapshot {
    pub url: UrlRecord,
    pub html: String,
    pub scripts: Vec<ScriptSource>,
    /// Unix seconds.
    pub fetched_at: u64,
    pub tls_present: bool,
    #[serde(default)]
    pub responses: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct ScriptEntry {
    #[serde(default)]
    url: Option<String>,
    file: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct SnapshotManifest {
    url: String,
    #[serde(default)]
    fetched_at: u64,
    #[serde(default)]
    tls: Option<bool>,
    #[serde(default)]
    scripts: Vec<ScriptEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    responses: BTreeMap<String, String>,
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    fs::read(path)
        .map(|b| String::from_utf8_lossy(&b).into_owned())
        .map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CorpusError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| CorpusError::BadJson { path: path.to_path_buf(), source })
}

fn is_javascript_type(ty: Option<&str>) -> bool {
    match ty.map(|t| t.trim().to_ascii_lowercase()) {
        None => true,
        Some(t) => t.is_empty() || t == "module" || t.contains("javascript") || t.contains("ecmascript"),
    }
}

/// Inline `<script>` bodies in document order, named `inline#<k>`.
pub fn inline_scripts(html: &str) -> Vec<ScriptSource> {
    let doc = Html::parse_document(html);
    let sel = Selector::parse("script").expect("static selector");
    doc.select(&sel)
        .filter(|el| el.value().attr("src").is_none() && is_javascript_type(el.value().attr("type")))
        .enumerate()
        .map(|(k, el)| ScriptSource {
            name: format!("inline#{k}"),
            source: el.text().collect(),
            origin: ScriptOrigin::Inline,
            url: None,
            warning: None,
        })
        .collect()
}

/// Absolute `src` URLs of external JavaScript tags, in document order.
pub fn external_script_urls(html: &str, base: &str) -> Vec<String> {
    let doc = Html::parse_document(html);
    let sel = Selector::parse("script[src]").expect("static selector");
    let base = url::Url::parse(base).ok();
    doc.select(&sel)
        .filter(|el| is_javascript_type(el.value().attr("type")))
        .filter_map(|el| {
            let src = el.value().attr("src")?.trim();
            match &base {
                Some(b) => b.join(src).ok().map(|u| u.to_string()),
                None => Some(src.to_string()),
            }
        })
        .collect()
}

fn unique_name(wanted: &str, taken: &mut BTreeSet<String>) -> String {
    let mut name = wanted.to_string();
    let mut k = 2;
    while !taken.insert(name.clone()) {
        name = format!("{wanted}~{k}");
        k += 1;
    }
    name
}

fn name_from_url(u: &str) -> String {
    let path = u.split(['?', '#']).next().unwrap_or(u);
    let last = path.trim_end_matches('/').rsplit('/').next().unwrap_or("");
    if last.is_empty() { "script.js".to_string() } else { last.to_string() }
}

impl PageSnapshot {
    pub fn total_script_bytes(&self) -> usize {
        self.scripts.iter().map(|s| s.source.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    /// Writes the on-disk layout that [`load_snapshot`] reads back.
    pub fn save(&self, dir: &Path) -> Result<(), CorpusError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CorpusError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let page = dir.join("page.html");
        fs::write(&page, &self.html).map_err(io(&page))?;
        let mut manifest = SnapshotManifest {
            url: self.url.raw.clone(),
            fetched_at: self.fetched_at,
            tls: Some(self.tls_present),
            ..Default::default()
        };
        for s in self.scripts.iter().filter(|s| s.origin == ScriptOrigin::External) {
            let file = s.name.replace(['/', '\\'], "_");
            let path = dir.join(&file);
            fs::write(&path, &s.source).map_err(io(&path))?;
            manifest.scripts.push(ScriptEntry { url: s.url.clone(), file });
        }
        for (k, (url, body)) in self.responses.iter().enumerate() {
            let file = format!("response-{k}.txt");
            let path = dir.join(&file);
            fs::write(&path, body).map_err(io(&path))?;
            manifest.responses.insert(url.clone(), file);
        }
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text).map_err(io(&path))
    }
}

pub fn load_snapshot(dir: &Path) -> Result<PageSnapshot, CorpusError> {
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(CorpusError::MissingManifest(dir.to_path_buf()));
    }
    let manifest: SnapshotManifest = read_json(&manifest_path)?;
    let page = dir.join("page.html");
    let html = if page.is_file() { read_text(&page)? } else { String::new() };
    if html.trim().is_empty() {
        return Err(CorpusError::EmptyHtml(dir.to_path_buf()));
    }
    let url = UrlRecord::parse(&manifest.url)?;
    let mut taken = BTreeSet::new();
    let mut scripts = Vec::new();
    for entry in &manifest.scripts {
        let path = dir.join(&entry.file);
        if !path.is_file() {
            return Err(CorpusError::MissingScript(path));
        }
        scripts.push(ScriptSource {
            name: unique_name(&entry.file, &mut taken),
            source: read_text(&path)?,
            origin: ScriptOrigin::External,
            url: entry.url.clone(),
            warning: None,
        });
    }
    scripts.extend(inline_scripts(&html));
    let mut responses = BTreeMap::new();
    for (req, file) in &manifest.responses {
        let path = dir.join(file);
        if !path.is_file() {
            return Err(CorpusError::MissingScript(path));
        }
        responses.insert(req.clone(), read_text(&path)?);
    }
    Ok(PageSnapshot {
        tls_present: manifest.tls.unwrap_or_else(|| url.is_https()),
        url,
        html,
        scripts,
        fetched_at: manifest.fetched_at,
        responses,
    })
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .max_redirects(MAX_REDIRECTS)
        .http_status_as_error(false)
        .user_agent(USER_AGENT)
        .build()
        .into()
}

enum Fetched {
    Body(String),
    Status(u16),
}

fn classify(url: &str, err: ureq::Error, started: Instant) -> CorpusError {
    match err {
        ureq::Error::Timeout(_) => CorpusError::Timeout { url: url.to_string(), elapsed_ms: started.elapsed().as_millis() as u64, partial: None },
        other => CorpusError::Transport { url: url.to_string(), message: other.to_string() },
    }
}

fn get(agent: &ureq::Agent, url: &str, started: Instant) -> Result<Fetched, CorpusError> {
    let mut resp = agent.get(url).call().map_err(|e| classify(url, e, started))?;
    let status = resp.status().as_u16();
    if !(200..300).contains(&status) {
        return Ok(Fetched::Status(status));
    }
    let mut body = Vec::new();
    resp.body_mut()
        .as_reader()
        .read_to_end(&mut body)
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::TimedOut => CorpusError::Timeout { url: url.to_string(), elapsed_ms: started.elapsed().as_millis() as u64, partial: None },
            _ => CorpusError::Transport { url: url.to_string(), message: e.to_string() },
        })?;
    Ok(Fetched::Body(String::from_utf8_lossy(&body).into_owned()))
}

/// Downloads the page and its external scripts, anonymously and without a
/// cookie jar. Script requests run concurrently and share the same deadline.
pub fn fetch_live(url: &UrlRecord, timeout_ms: u64) -> Result<PageSnapshot, CorpusError> {
    if url.scheme != "http" && url.scheme != "https" {
        return Err(CorpusError::UnsupportedScheme(url.scheme.clone()));
    }
    let started = Instant::now();
    let agent = agent(Duration::from_millis(timeout_ms.max(1)));
    let html = match get(&agent, &url.raw, started)? {
        Fetched::Body(b) => b,
        Fetched::Status(status) => return Err(CorpusError::Status { url: url.raw.clone(), status }),
    };
    let fetched_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut snapshot = PageSnapshot {
        url: url.clone(),
        scripts: Vec::new(),
        fetched_at,
        tls_present: url.scheme == "https",
        responses: BTreeMap::new(),
        html,
    };
    let srcs = external_script_urls(&snapshot.html, &url.raw);
    let results: Vec<Result<Fetched, CorpusError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = srcs.iter().map(|src| scope.spawn(|| get(&agent, src, started))).collect();
        handles.into_iter().map(|h| h.join().expect("fetch thread panicked")).collect()
    });
    let mut taken = BTreeSet::new();
    for (src, result) in srcs.iter().zip(results) {
        let (source, warning) = match result {
            Ok(Fetched::Body(b)) => (b, None),
            Ok(Fetched::Status(status)) => (String::new(), Some(format!("HTTP {status}"))),
            Err(CorpusError::Timeout { url: u, elapsed_ms, .. }) => {
                let inline = inline_scripts(&snapshot.html);
                snapshot.scripts.extend(inline);
                return Err(CorpusError::Timeout { url: u, elapsed_ms, partial: Some(Box::new(snapshot)) });
            }
            Err(e) => (String::new(), Some(e.to_string())),
        };
        snapshot.scripts.push(ScriptSource {
            name: unique_name(&name_from_url(src), &mut taken),
            source,
            origin: ScriptOrigin::External,
            url: Some(src.clone()),
            warning,
        });
    }
    let inline = inline_scripts(&snapshot.html);
    snapshot.scripts.extend(inline);
    Ok(snapshot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub snapshot_dir: PathBuf,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threat_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub entries: Vec<CorpusEntry>,
    /// Directory that relative `snapshot_dir` values resolve against.
    #[serde(skip)]
    pub root: PathBuf,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let mut m: CorpusManifest = read_json(path)?;
        m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn resolve(&self, entry: &CorpusEntry) -> PathBuf {
        if entry.snapshot_dir.is_absolute() { entry.snapshot_dir.clone() } else { self.root.join(&entry.snapshot_dir) }
    }

    /// Loads one entry with the manifest's ground-truth label attached to its URL.
    pub fn load_entry(&self, entry: &CorpusEntry) -> Result<PageSnapshot, CorpusError> {
        let mut snap = load_snapshot(&self.resolve(entry))?;
        snap.url.label = Some(entry.label);
        Ok(snap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::{Arc, Mutex};

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    fn manifest(dir: &Path, json: serde_json::Value) {
        write(dir, "manifest.json", &json.to_string());
    }

    #[test]
    fn single_inline_script() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "page.html", "<html><body><script>var a=1;</script></body></html>");
        manifest(tmp.path(), serde_json::json!({"url": "http://example.test/", "scripts": []}));
        let snap = load_snapshot(tmp.path()).unwrap();
        assert_eq!(
            snap.scripts,
            vec![ScriptSource { name: "inline#0".into(), source: "var a=1;".into(), origin: ScriptOrigin::Inline, url: None, warning: None }]
        );
        assert!(!snap.tls_present);
    }

    #[test]
    fn externals_precede_inlines_in_document_order() {
        let tmp = tempfile::tempdir().unwrap();
        let d = tmp.path();
        write(
            d,
            "page.html",
            "<script>first()</script><script src='a.js'></script><p>x</p><script type='application/ld+json'>{}</script><script>second()</script>",
        );
        for f in ["a.js", "b.js", "c.js"] {
            write(d, f, &format!("// {f}"));
        }
        manifest(
            d,
            serde_json::json!({"url": "https://example.test/", "scripts": [{"file": "c.js"}, {"file": "a.js"}, {"file": "b.js"}]}),
        );
        let snap = load_snapshot(d).unwrap();
        // enumerated by hand from the fixture above
        let got: Vec<(&str, ScriptOrigin)> = snap.scripts.iter().map(|s| (s.name.as_str(), s.origin)).collect();
        assert_eq!(
            got,
            [
                ("c.js", ScriptOrigin::External),
                ("a.js", ScriptOrigin::External),
                ("b.js", ScriptOrigin::External),
                ("inline#0", ScriptOrigin::Inline),
                ("inline#1", ScriptOrigin::Inline),
            ]
        );
        assert_eq!(snap.scripts[4].source, "second()");
        assert!(snap.tls_present);
    }

    #[test]
    fn load_errors_are_specific() {
        let tmp = tempfile::tempdir().unwrap();
        let d = tmp.path();
        assert!(matches!(load_snapshot(d), Err(CorpusError::MissingManifest(_))));
        write(d, "page.html", "<p>hi</p>");
        manifest(d, serde_json::json!({"url": "https://example.test/", "scripts": [{"file": "gone.js"}]}));
        let err = load_snapshot(d).unwrap_err();
        assert!(err.to_string().contains("gone.js"), "{err}");
        write(d, "manifest.json", "{not json");
        assert!(matches!(load_snapshot(d), Err(CorpusError::BadJson { .. })));
    }

    #[test]
    fn malformed_html_is_not_fatal() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "page.html", "<div><p>unclosed <b>tags<script>go()</script");
        manifest(tmp.path(), serde_json::json!({"url": "https://example.test/"}));
        let snap = load_snapshot(tmp.path()).unwrap();
        assert!(snap.html.contains("unclosed"));
    }

    #[test]
    fn loading_is_deterministic_and_save_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let d = tmp.path();
        write(d, "page.html", "<script src=x.js></script><script>inline()</script>");
        write(d, "x.js", "external()");
        write(d, "r.json", "{\"ok\":true}");
        manifest(
            d,
            serde_json::json!({"url": "https://example.test/p", "fetched_at": 7, "scripts": [{"url": "https://example.test/x.js", "file": "x.js"}], "responses": {"https://example.test/api": "r.json"}}),
        );
        let a = load_snapshot(d).unwrap();
        assert_eq!(a.to_json(), load_snapshot(d).unwrap().to_json());
        let out = tempfile::tempdir().unwrap();
        a.save(out.path()).unwrap();
        assert_eq!(load_snapshot(out.path()).unwrap(), a);
    }

    #[test]
    fn corpus_manifest_resolves_relative_dirs() {
        let tmp = tempfile::tempdir().unwrap();
        let site = tmp.path().join("site");
        fs::create_dir(&site).unwrap();
        write(&site, "page.html", "<p>x</p>");
        manifest(&site, serde_json::json!({"url": "https://example.test/"}));
        let corpus = tmp.path().join("corpus.json");
        fs::write(&corpus, r#"{"entries":[{"snapshot_dir":"site","label":"malicious","threat_type":"phishing"}]}"#).unwrap();
        let m = CorpusManifest::load(&corpus).unwrap();
        let snap = m.load_entry(&m.entries[0]).unwrap();
        assert_eq!(snap.url.label, Some(Label::Malicious));
        assert!(fs::write(&corpus, r#"{"entries":[{"snapshot_dir":"site","label":"unknown"}]}"#).is_ok());
        assert!(CorpusManifest::load(&corpus).is_err());
    }

    struct Server {
        base: String,
        log: Arc<Mutex<Vec<String>>>,
    }

    fn serve(routes: Vec<(&'static str, u16, &'static str)>) -> Server {
        let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
        let port = server.server_addr().to_ip().unwrap().port();
        let log = Arc::new(Mutex::new(Vec::new()));
        let seen = log.clone();
        std::thread::spawn(move || {
            for req in server.incoming_requests() {
                let path = req.url().to_string();
                let ua = req.headers().iter().find(|h| h.field.equiv("User-Agent")).map(|h| h.value.to_string()).unwrap_or_default();
                seen.lock().unwrap().push(format!("{path} {ua}"));
                let (status, body) = routes.iter().find(|r| r.0 == path).map(|r| (r.1, r.2)).unwrap_or((404, ""));
                if path == "/slow.js" {
                    std::thread::sleep(Duration::from_millis(800));
                }
                let _ = req.respond(tiny_http::Response::from_string(body).with_status_code(status));
            }
        });
        Server { base: format!("http://127.0.0.1:{port}"), log }
    }

    #[test]
    fn fetch_live_collects_external_scripts() {
        let srv = serve(vec![
            ("/", 200, "<script src='/a.js'></script><script src='b.js'></script><script>inline()</script>"),
            ("/a.js", 200, "a()"),
            ("/b.js", 200, "b()"),
        ]);
        let url = UrlRecord::parse(&format!("{}/", srv.base)).unwrap();
        let snap = fetch_live(&url, 5000).unwrap();
        let externals: Vec<&str> = snap.scripts.iter().filter(|s| s.origin == ScriptOrigin::External).map(|s| s.source.as_str()).collect();
        let log = srv.log.lock().unwrap().clone();
        let script_requests = log.iter().filter(|l| l.contains(".js ")).count();
        assert_eq!(externals.len(), script_requests);
        assert_eq!(externals, ["a()", "b()"]);
        assert!(log.iter().all(|l| l.ends_with(USER_AGENT)));
        assert!(!snap.tls_present);
    }

    #[test]
    fn fetch_live_tolerates_missing_script() {
        let srv = serve(vec![("/", 200, "<script src='/ok.js'></script><script src='/missing.js'></script>"), ("/ok.js", 200, "ok()")]);
        let snap = fetch_live(&UrlRecord::parse(&format!("{}/", srv.base)).unwrap(), 5000).unwrap();
        let missing = snap.scripts.iter().find(|s| s.name == "missing.js").unwrap();
        assert_eq!(missing.source, "");
        assert_eq!(missing.warning.as_deref(), Some("HTTP 404"));
        assert!(snap.scripts.iter().find(|s| s.name == "ok.js").unwrap().warning.is_none());
    }

    #[test]
    fn fetch_live_error_paths() {
        let srv = serve(vec![("/", 200, "<script src='/slow.js'></script>"), ("/slow.js", 200, "late()"), ("/gone", 500, "")]);
        let err = fetch_live(&UrlRecord::parse(&format!("{}/gone", srv.base)).unwrap(), 2000).unwrap_err();
        assert!(matches!(err, CorpusError::Status { status: 500, .. }), "{err}");
        match fetch_live(&UrlRecord::parse(&format!("{}/", srv.base)).unwrap(), 400) {
            Err(CorpusError::Timeout { partial: Some(p), .. }) => assert!(p.html.contains("slow.js")),
            other => panic!("expected timeout with partial snapshot, got {other:?}"),
        }
        let ftp = UrlRecord::parse("ftp://example.test/x").unwrap();
        assert!(matches!(fetch_live(&ftp, 100), Err(CorpusError::UnsupportedScheme(_))));
    }

    #[test]
    fn https_sets_tls_flag() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "page.html", "<p>x</p>");
        manifest(tmp.path(), serde_json::json!({"url": "https://secure.example.test/"}));
        assert!(load_snapshot(tmp.path()).unwrap().tls_present);
    }
}
