//! Page execution inside an embedded JavaScript engine.
//!
//! The engine gets a small emulated browser (`assets/emulation.js`), the
//! instrumentation shim (`assets/shim.js`) and the page's scripts in document
//! order. Time is virtual: timers fire by fast-forwarding a clock, so a 4 s
//! observation window costs only as much wall time as the scripts need.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;
use std::time::{Duration, Instant};

use rquickjs::context::EvalOptions;
use rquickjs::{CatchResultExt, Coerced, Context, Ctx, Function, Object, Runtime, Value};
use scraper::{Html, Selector};
use serde_json::{json, Map};
use thiserror::Error;
use url::Url;

use crate::corpus::{PageSnapshot, ScriptOrigin, ScriptSource, USER_AGENT};
use crate::evidence::{DomMetadata, UrlRecord};
use crate::sandbox::dom::{dom_metadata, extract_visible_text, DomNode};
use crate::sandbox::trace::{cap_trace, TraceEvent, TraceKind};

pub const EMULATION_JS: &str = include_str!("../../assets/emulation.js");
pub const SHIM_JS: &str = include_str!("../../assets/shim.js");
/// Global names present in a fresh sandbox before any page code runs.
pub const BUILTIN_GLOBALS: &str = include_str!("../../assets/builtin_globals.txt");

const MEMORY_LIMIT: usize = 256 << 20;
const STACK_LIMIT: usize = 1 << 20;
/// Wall time granted after the hard cap to serialize the DOM and diff globals.
const FINISH_GRACE_MS: u64 = 300;
/// Stored messages beyond this multiple of `max_trace_events` keep only
/// high-value kinds.
const OVERFLOW_FACTOR: usize = 4;
/// Fixed page epoch so `Date.now()` is reproducible.
const EPOCH_MS: u64 = 1_718_000_000_000;

#[derive(Debug, Error)]
pub enum SandboxError {
    #[error("invalid sandbox configuration: {0}")]
    Config(String),
    #[error("engine setup failed: {0}")]
    Engine(String),
    #[error("instrumentation shim failed to load: {0}")]
    ShimLoad(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandboxConfig {
    /// Virtual observation window.
    pub window_ms: u64,
    /// Wall-clock limit for the whole execution; also the ceiling for the
    /// virtual window after interaction.
    pub hard_cap_ms: u64,
    /// Stop early once timers keep firing for this long without new events.
    pub settle_quiet_ms: u64,
    pub simulate_interactions: bool,
    pub max_trace_events: usize,
    pub seed: u64,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        SandboxConfig {
            window_ms: 4000,
            hard_cap_ms: 6000,
            settle_quiet_ms: 750,
            simulate_interactions: true,
            max_trace_events: 10_000,
            seed: 0x5eed,
        }
    }
}

impl SandboxConfig {
    pub fn validate(&self) -> Result<(), SandboxError> {
        if self.window_ms == 0 || self.hard_cap_ms == 0 {
            return Err(SandboxError::Config("window_ms and hard_cap_ms must be positive".into()));
        }
        if self.window_ms > self.hard_cap_ms {
            return Err(SandboxError::Config(format!(
                "window_ms ({}) exceeds hard_cap_ms ({})",
                self.window_ms, self.hard_cap_ms
            )));
        }
        if self.max_trace_events == 0 {
            return Err(SandboxError::Config("max_trace_events must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionResult {
    pub trace: Vec<TraceEvent>,
    pub dom: DomNode,
    pub dom_meta: DomMetadata,
    pub visible_text: String,
    pub new_globals: Vec<String>,
    pub virtual_ms: u64,
    pub wall_ms: u64,
    pub truncated: bool,
    pub hard_cap_hit: bool,
    pub script_errors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// No timers left at or before the deadline.
    Drained,
    /// Timers kept firing without producing events.
    Settled,
    HardCap,
}

#[derive(Debug, Clone)]
struct Message {
    at: u64,
    kind: String,
    payload: String,
}

#[derive(Debug)]
struct HostState {
    clock: u64,
    messages: Vec<Message>,
    overflow: usize,
    soft_limit: usize,
    page: Option<Url>,
    responses: BTreeMap<String, String>,
}

const HIGH_VALUE: &[&str] = &[
    "logFetch",
    "logXhr",
    "logWebSocket",
    "logEval",
    "logScriptAppend",
    "logDomMutation",
    "geolocation",
    "beacon",
    "navigate",
    "interaction",
    "scriptError",
    "logGlobalDiff",
];

impl HostState {
    fn push(&mut self, kind: String, payload: String) {
        if self.messages.len() >= self.soft_limit && !HIGH_VALUE.contains(&kind.as_str()) {
            self.overflow += 1;
            return;
        }
        self.messages.push(Message { at: self.clock, kind, payload });
    }

    fn resolve(&self, raw: &str) -> Option<Url> {
        match &self.page {
            Some(base) => base.join(raw).ok(),
            None => Url::parse(raw).ok(),
        }
    }

    fn resource(&self, raw: &str) -> Option<String> {
        if let Some(body) = self.responses.get(raw) {
            return Some(body.clone());
        }
        let abs = self.resolve(raw)?;
        let key = abs.as_str();
        self.responses
            .get(key)
            .or_else(|| {
                let mut bare = abs.clone();
                bare.set_fragment(None);
                self.responses.get(bare.as_str())
            })
            .cloned()
    }
}

/// A live sandbox: emulation loaded and the DOM seeded from the page HTML.
pub struct Sandbox {
    rt: Runtime,
    ctx: Context,
    state: Rc<RefCell<HostState>>,
    deadline: Rc<Cell<Instant>>,
    interrupted: Rc<Cell<bool>>,
    started: Instant,
    cfg: SandboxConfig,
    page_url: String,
    shim: bool,
    script_errors: usize,
}

fn exception_text(ctx: &Ctx<'_>, err: rquickjs::Error) -> String {
    match err {
        rquickjs::Error::Exception => describe_value(&ctx.catch()),
        other => other.to_string(),
    }
}

fn describe_value(v: &Value<'_>) -> String {
    if let Some(ex) = v.as_exception() {
        let name: Option<String> = ex.get("name").ok();
        let msg = ex.message().unwrap_or_default();
        return match name {
            Some(n) if !n.is_empty() => format!("{n}: {msg}"),
            _ => msg,
        };
    }
    v.get::<Coerced<String>>().map(|c| c.0).unwrap_or_else(|_| "unknown error".into())
}

fn page_options(url: &UrlRecord, seed: u64) -> String {
    let parsed = Url::parse(&url.raw).ok();
    let get = |f: fn(&Url) -> String| parsed.as_ref().map(f).unwrap_or_default();
    json!({
        "url": url.raw,
        "scheme": url.scheme,
        "host": url.host,
        "host_port": get(|u| match u.port() {
            Some(p) => format!("{}:{p}", u.host_str().unwrap_or("")),
            None => u.host_str().unwrap_or("").to_string(),
        }),
        "port": get(|u| u.port().map(|p| p.to_string()).unwrap_or_default()),
        "path": if url.path.is_empty() { "/".to_string() } else { url.path.clone() },
        "search": get(|u| u.query().map(|q| format!("?{q}")).unwrap_or_default()),
        "hash": get(|u| u.fragment().map(|f| format!("#{f}")).unwrap_or_default()),
        "origin": url.origin(),
        "user_agent": USER_AGENT,
        "epoch_ms": EPOCH_MS,
        "seed": (seed & 0xffff_ffff) as u32,
    })
    .to_string()
}

impl Sandbox {
    /// Builds the engine, installs the browser emulation and seeds the DOM.
    /// The instrumentation shim is not installed yet.
    pub fn new(snapshot: &PageSnapshot, cfg: &SandboxConfig) -> Result<Self, SandboxError> {
        cfg.validate()?;
        let started = Instant::now();
        let rt = Runtime::new().map_err(|e| SandboxError::Engine(e.to_string()))?;
        rt.set_memory_limit(MEMORY_LIMIT);
        rt.set_max_stack_size(STACK_LIMIT);
        let deadline = Rc::new(Cell::new(started + Duration::from_millis(cfg.hard_cap_ms)));
        let interrupted = Rc::new(Cell::new(false));
        {
            let deadline = deadline.clone();
            let interrupted = interrupted.clone();
            rt.set_interrupt_handler(Some(Box::new(move || {
                if Instant::now() >= deadline.get() {
                    interrupted.set(true);
                    true
                } else {
                    false
                }
            })));
        }
        let ctx = Context::full(&rt).map_err(|e| SandboxError::Engine(e.to_string()))?;
        let state = Rc::new(RefCell::new(HostState {
            clock: 0,
            messages: Vec::new(),
            overflow: 0,
            soft_limit: cfg.max_trace_events.saturating_mul(OVERFLOW_FACTOR),
            page: Url::parse(&snapshot.url.raw).ok(),
            responses: snapshot.responses.clone(),
        }));
        let mut sandbox = Sandbox {
            rt,
            ctx,
            state,
            deadline,
            interrupted,
            started,
            cfg: cfg.clone(),
            page_url: snapshot.url.raw.clone(),
            shim: false,
            script_errors: 0,
        };
        sandbox.install_emulation(&snapshot.url)?;
        let dom = DomNode::from_html(&snapshot.html);
        let dom_json = serde_json::to_string(&dom).expect("dom serializes");
        sandbox
            .call_env(&format!("__urlscope_env.seed({})", serde_json::to_string(&dom_json).unwrap()))
            .map_err(SandboxError::Engine)?;
        sandbox.call_env("__urlscope_env.markExecuted()").map_err(SandboxError::Engine)?;
        Ok(sandbox)
    }

    fn install_emulation(&mut self, url: &UrlRecord) -> Result<(), SandboxError> {
        let opts = page_options(url, self.cfg.seed);
        let state = self.state.clone();
        self.ctx.with(|ctx| -> Result<(), SandboxError> {
            let host = Object::new(ctx.clone()).map_err(|e| SandboxError::Engine(e.to_string()))?;
            let s = state.clone();
            let emit = Function::new(ctx.clone(), move |kind: String, payload: String| {
                s.borrow_mut().push(kind, payload);
            });
            let s = state.clone();
            let now = Function::new(ctx.clone(), move || s.borrow().clock as f64);
            let parse_html = Function::new(ctx.clone(), |html: String| {
                serde_json::to_string(&DomNode::fragment(&html)).unwrap_or_else(|_| "[]".into())
            });
            let s = state.clone();
            let resource = Function::new(ctx.clone(), move |u: String| s.borrow().resource(&u));
            let engine = |e: rquickjs::Error| SandboxError::Engine(e.to_string());
            host.set("emit", emit.map_err(engine)?).map_err(engine)?;
            host.set("now", now.map_err(engine)?).map_err(engine)?;
            host.set("parseHtml", parse_html.map_err(engine)?).map_err(engine)?;
            host.set("resource", resource.map_err(engine)?).map_err(engine)?;
            let mut eo = EvalOptions::default();
            eo.global = true;
            eo.strict = false;
            eo.filename = Some("emulation.js".into());
            let installer: Function = ctx
                .eval_with_options(EMULATION_JS, eo)
                .catch(&ctx)
                .map_err(|e| SandboxError::Engine(e.to_string()))?;
            installer
                .call::<_, bool>((host, opts))
                .catch(&ctx)
                .map_err(|e| SandboxError::Engine(e.to_string()))?;
            Ok(())
        })
    }

    /// Installs the instrumentation shim. Returns the number of wrapped APIs.
    pub fn install_shim(&mut self) -> Result<usize, SandboxError> {
        let n = self.ctx.with(|ctx| {
            let mut eo = EvalOptions::default();
            eo.global = true;
            eo.strict = false;
            eo.filename = Some("shim.js".into());
            ctx.eval_with_options::<i32, _>(SHIM_JS, eo).map_err(|e| exception_text(&ctx, e))
        });
        let n = n.map_err(SandboxError::ShimLoad)?;
        self.shim = true;
        Ok(n.max(0) as usize)
    }

    /// Evaluates `code` in the page's global scope and returns the result
    /// coerced to a string. Errors carry the exception text.
    pub fn eval(&mut self, code: &str) -> Result<String, String> {
        let r = self.ctx.with(|ctx| {
            let mut eo = EvalOptions::default();
            eo.global = true;
            eo.strict = false;
            ctx.eval_with_options::<Coerced<String>, _>(code, eo).map(|c| c.0).map_err(|e| exception_text(&ctx, e))
        });
        self.drain_jobs();
        r
    }

    fn call_env(&self, code: &str) -> Result<String, String> {
        self.ctx.with(|ctx| {
            ctx.eval::<Coerced<String>, _>(code).map(|c| c.0).map_err(|e| exception_text(&ctx, e))
        })
    }

    fn env_number(&self, code: &str) -> f64 {
        self.ctx.with(|ctx| ctx.eval::<f64, _>(code).unwrap_or(-1.0))
    }

    pub fn hard_cap_hit(&self) -> bool {
        self.interrupted.get()
    }

    pub fn virtual_now(&self) -> u64 {
        self.state.borrow().clock
    }

    pub fn message_count(&self) -> usize {
        self.state.borrow().messages.len()
    }

    fn record_error(&mut self, script: &str, error: String) {
        self.script_errors += 1;
        let payload = json!({ "script": script, "error": error }).to_string();
        self.state.borrow_mut().push("scriptError".into(), payload);
    }

    /// Runs one page script. Errors are recorded in the trace and do not stop
    /// later scripts.
    pub fn run_script(&mut self, name: &str, source: &str) {
        if self.interrupted.get() {
            return;
        }
        let result = self.ctx.with(|ctx| {
            let mut eo = EvalOptions::default();
            eo.global = true;
            eo.strict = false;
            eo.filename = Some(name.to_string());
            ctx.eval_with_options::<(), _>(source, eo).map_err(|e| exception_text(&ctx, e))
        });
        if let Err(e) = result {
            self.record_error(name, e);
        }
        self.drain_jobs();
    }

    /// Runs queued promise jobs until none remain.
    pub fn drain_jobs(&mut self) {
        loop {
            if self.interrupted.get() {
                return;
            }
            match self.rt.execute_pending_job() {
                Ok(true) => continue,
                Ok(false) => return,
                Err(job) => {
                    let text = job.0.with(|ctx| describe_value(&ctx.catch()));
                    self.record_error("microtask", text);
                }
            }
        }
    }

    pub fn dispatch_load(&mut self) {
        if let Err(e) = self.call_env("__urlscope_env.dispatchLoad()") {
            self.record_error("load", e);
        }
        self.drain_jobs();
    }

    fn events_since(&self, from: usize) -> usize {
        self.state.borrow().messages.len() - from
    }

    /// Fires timers in due order until none are due by `deadline` (virtual
    /// ms), the page settles, or the wall-clock cap is reached.
    pub fn run_timers(&mut self, deadline: u64) -> StopReason {
        let mut quiet_since: Option<u64> = None;
        loop {
            if self.interrupted.get() {
                return StopReason::HardCap;
            }
            let due = self.env_number("__urlscope_env.nextDue()");
            if due < 0.0 || due as u64 > deadline {
                return StopReason::Drained;
            }
            {
                let mut st = self.state.borrow_mut();
                st.clock = st.clock.max(due as u64);
            }
            let before = self.message_count();
            let _ = self.call_env("__urlscope_env.fireNext()");
            self.drain_jobs();
            let now = self.virtual_now();
            if self.events_since(before) > 0 {
                quiet_since = None;
            } else {
                match quiet_since {
                    None => quiet_since = Some(now),
                    Some(q) if now.saturating_sub(q) >= self.cfg.settle_quiet_ms => return StopReason::Settled,
                    _ => {}
                }
            }
        }
    }

    fn network_seen(&self) -> bool {
        self.state
            .borrow()
            .messages
            .iter()
            .any(|m| matches!(m.kind.as_str(), "logFetch" | "logXhr" | "logWebSocket" | "beacon"))
    }

    /// Clicks the most prominent element with a click handler and moves the
    /// mouse, then lets resulting timers run. Returns the events this
    /// produced. Nothing happens when disabled or when no element reacts to
    /// clicks.
    pub fn simulate_interaction(&mut self, enabled: bool) -> Vec<TraceEvent> {
        if !enabled || self.interrupted.get() {
            return Vec::new();
        }
        let before = self.message_count();
        let fired = self.env_number("__urlscope_env.simulateInteraction()");
        if fired <= 0.0 {
            return Vec::new();
        }
        self.drain_jobs();
        let until = (self.virtual_now() + self.cfg.settle_quiet_ms).min(self.cfg.hard_cap_ms);
        self.run_timers(until);
        let st = self.state.borrow();
        let origin = st.page.clone();
        st.messages[before..].iter().flat_map(|m| to_events(m, origin.as_ref())).collect()
    }

    /// Visible text and DOM metadata of the current document.
    pub fn dom(&self) -> Result<DomNode, String> {
        let json = self.call_env("__urlscope_env.serialize()")?;
        serde_json::from_str(&json).map_err(|e| e.to_string())
    }

    /// Per-element hidden flags as computed inside the engine.
    pub fn hidden_flags(&self) -> Result<Vec<(String, bool)>, String> {
        let json = self.call_env("__urlscope_env.hiddenFlags()")?;
        serde_json::from_str(&json).map_err(|e| e.to_string())
    }

    /// Ends the session: diffs globals, serializes the DOM and converts
    /// messages into trace events.
    pub fn finish(self) -> ExecutionResult {
        self.deadline.set(Instant::now() + Duration::from_millis(FINISH_GRACE_MS));
        let hard_cap_hit = self.interrupted.replace(false);
        if self.shim {
            let _ = self.call_env("globalThis[Symbol.for('urlscope.shim')].diff()");
        }
        let dom = self.dom().unwrap_or_else(|_| DomNode::from_html(""));
        let builtin: BTreeSet<&str> = BUILTIN_GLOBALS.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let st = self.state.borrow();
        let origin = st.page.clone();
        let mut trace: Vec<TraceEvent> = Vec::with_capacity(st.messages.len());
        let mut new_globals = Vec::new();
        for m in &st.messages {
            for ev in to_events(m, origin.as_ref()) {
                if ev.kind == TraceKind::GlobalCreated {
                    let name = ev.str_field("name").unwrap_or_default().to_string();
                    if builtin.contains(name.as_str()) {
                        continue;
                    }
                    new_globals.push(name);
                }
                trace.push(ev);
            }
        }
        let overflow = st.overflow;
        let virtual_ms = st.clock;
        drop(st);
        let (mut trace, mut truncated) = cap_trace(trace, self.cfg.max_trace_events);
        if overflow > 0 {
            if !truncated {
                trace.push(TraceEvent::new(
                    virtual_ms,
                    TraceKind::ApiCall,
                    json!({"api": "trace.truncated", "dropped": 0}),
                ));
                truncated = true;
            }
            if let Some(marker) = trace.last_mut() {
                let dropped = marker.detail.get("dropped").and_then(|d| d.as_u64()).unwrap_or(0);
                marker.detail["dropped"] = json!(dropped + overflow as u64);
            }
        }
        let visible_text = extract_visible_text(&dom);
        let dom_meta = dom_metadata(&dom, &self.page_url);
        ExecutionResult {
            trace,
            dom,
            dom_meta,
            visible_text,
            new_globals,
            virtual_ms,
            wall_ms: self.started.elapsed().as_millis() as u64,
            truncated,
            hard_cap_hit,
            script_errors: self.script_errors,
        }
    }
}

fn cross_origin(page: Option<&Url>, raw: &str) -> bool {
    let Some(page) = page else { return false };
    let Ok(target) = page.join(raw) else { return false };
    if !matches!(target.scheme(), "http" | "https" | "ws" | "wss") {
        return false;
    }
    let norm = |u: &Url| {
        let scheme = match u.scheme() {
            "ws" => "http",
            "wss" => "https",
            s => s,
        };
        (scheme.to_string(), u.host_str().map(str::to_ascii_lowercase), u.port_or_known_default())
    };
    norm(page) != norm(&target)
}

fn str_of<'a>(p: &'a Map<String, serde_json::Value>, key: &str) -> &'a str {
    p.get(key).and_then(|v| v.as_str()).unwrap_or("")
}

/// Converts one channel message into trace events.
fn to_events(m: &Message, page: Option<&Url>) -> Vec<TraceEvent> {
    let Ok(serde_json::Value::Object(p)) = serde_json::from_str::<serde_json::Value>(&m.payload) else {
        return Vec::new();
    };
    let at = m.at;
    let one = |kind: TraceKind, detail: serde_json::Value| vec![TraceEvent::new(at, kind, detail)];
    let url = str_of(&p, "url");
    match m.kind.as_str() {
        "logFetch" => one(
            TraceKind::Fetch,
            json!({"api": "window.fetch", "url": url, "method": str_of(&p, "method"), "cross_origin": cross_origin(page, url)}),
        ),
        "beacon" => one(
            TraceKind::Fetch,
            json!({"api": "navigator.sendBeacon", "url": url, "method": "POST", "cross_origin": cross_origin(page, url)}),
        ),
        "logXhr" => {
            let phase = str_of(&p, "phase");
            let api = if phase == "open" { "XMLHttpRequest.open" } else { "XMLHttpRequest.send" };
            one(
                TraceKind::Xhr,
                json!({"api": api, "phase": phase, "url": url, "method": str_of(&p, "method"), "cross_origin": cross_origin(page, url)}),
            )
        }
        "logWebSocket" => one(
            TraceKind::Websocket,
            json!({"api": "window.WebSocket", "url": url, "cross_origin": cross_origin(page, url)}),
        ),
        "logEval" => one(TraceKind::Eval, json!({"api": "window.eval", "code": str_of(&p, "code")})),
        "scriptError" => one(
            TraceKind::Eval,
            json!({"api": "script.error", "script": str_of(&p, "script"), "error": str_of(&p, "error")}),
        ),
        "logScriptAppend" => {
            let src = p.get("src").and_then(|v| v.as_str());
            let mut d = json!({"api": str_of(&p, "api"), "content": str_of(&p, "content")});
            if let Some(src) = src {
                d["src"] = json!(src);
                d["url"] = json!(src);
                d["cross_origin"] = json!(cross_origin(page, src));
            }
            one(TraceKind::ScriptAppend, d)
        }
        "logDomMutation" => {
            let kind = if str_of(&p, "op") == "remove" { TraceKind::DomRemove } else { TraceKind::DomInsert };
            let mut d = json!({
                "api": str_of(&p, "api"),
                "tag": str_of(&p, "tag"),
                "attrs": p.get("attrs").cloned().unwrap_or(json!({})),
                "hidden": p.get("hidden").and_then(|v| v.as_bool()).unwrap_or(false),
            });
            if let Some(src) = p.get("attrs").and_then(|a| a.get("src")).and_then(|s| s.as_str()) {
                d["url"] = json!(src);
                d["cross_origin"] = json!(cross_origin(page, src));
            }
            one(kind, d)
        }
        "logCookie" => {
            if str_of(&p, "op") == "write" {
                one(TraceKind::CookieWrite, json!({"api": "Document.cookie.set", "name": str_of(&p, "name")}))
            } else {
                one(TraceKind::CookieRead, json!({"api": "Document.cookie.get", "names": str_of(&p, "names")}))
            }
        }
        "logStorage" => {
            let mut d = json!({"api": str_of(&p, "api"), "op": str_of(&p, "op"), "area": str_of(&p, "area")});
            if let Some(k) = p.get("key") {
                d["key"] = k.clone();
            }
            one(TraceKind::StorageAccess, d)
        }
        "logTimer" => {
            let mut d = json!({
                "api": str_of(&p, "api"),
                "delay": p.get("delay").cloned().unwrap_or(json!(0)),
                "string_handler": p.get("string_handler").and_then(|v| v.as_bool()).unwrap_or(false),
            });
            if let Some(c) = p.get("code") {
                d["code"] = c.clone();
            }
            one(TraceKind::TimerSet, d)
        }
        "logListener" => {
            let kind = if str_of(&p, "op") == "remove" { TraceKind::ListenerRemove } else { TraceKind::ListenerAdd };
            one(kind, json!({"api": str_of(&p, "api"), "event": str_of(&p, "event"), "target": str_of(&p, "target")}))
        }
        "logGlobalDiff" => {
            if let Some(w) = p.get("warning").and_then(|v| v.as_str()) {
                return one(TraceKind::ApiCall, json!({"api": "shim.warning", "message": w}));
            }
            p.get("added")
                .and_then(|a| a.as_array())
                .map(|names| {
                    names
                        .iter()
                        .filter_map(|n| n.as_str())
                        .map(|n| TraceEvent::new(at, TraceKind::GlobalCreated, json!({"name": n})))
                        .collect()
                })
                .unwrap_or_default()
        }
        "geolocation" => one(TraceKind::Geolocation, json!({"api": str_of(&p, "api")})),
        "navigate" => one(TraceKind::ApiCall, json!({"api": str_of(&p, "api"), "url": url})),
        "interaction" => one(
            TraceKind::InteractionSimulated,
            json!({"event": str_of(&p, "event"), "target": str_of(&p, "target")}),
        ),
        "apiCall" => one(TraceKind::ApiCall, json!({"api": str_of(&p, "api")})),
        _ => Vec::new(),
    }
}

/// Page scripts in the order a browser would run them: the document's
/// `<script>` elements in order, each matched to its snapshot entry.
/// Snapshot scripts that match no tag run afterwards.
pub fn document_order(snapshot: &PageSnapshot) -> Vec<&ScriptSource> {
    let doc = Html::parse_document(&snapshot.html);
    let sel = Selector::parse("script").expect("static selector");
    let base = Url::parse(&snapshot.url.raw).ok();
    let mut used = vec![false; snapshot.scripts.len()];
    let mut order = Vec::new();
    let mut inline_k = 0usize;
    for el in doc.select(&sel) {
        let ty = el.value().attr("type").map(|t| t.trim().to_ascii_lowercase());
        let is_js = match ty.as_deref() {
            None | Some("") | Some("module") => true,
            Some(t) => t.contains("javascript") || t.contains("ecmascript"),
        };
        if !is_js {
            continue;
        }
        let found = match el.value().attr("src") {
            Some(src) => {
                let abs = base.as_ref().and_then(|b| b.join(src.trim()).ok()).map(|u| u.to_string());
                snapshot.scripts.iter().enumerate().position(|(i, s)| {
                    !used[i] && s.origin == ScriptOrigin::External && (s.url.is_some() && s.url == abs)
                })
            }
            None => {
                let name = format!("inline#{inline_k}");
                inline_k += 1;
                snapshot.scripts.iter().enumerate().position(|(i, s)| !used[i] && s.name == name)
            }
        };
        if let Some(i) = found {
            used[i] = true;
            order.push(&snapshot.scripts[i]);
        }
    }
    for (i, s) in snapshot.scripts.iter().enumerate() {
        if !used[i] {
            order.push(s);
        }
    }
    order
}

/// Runs a page in a fresh instrumented sandbox.
pub fn execute_page(snapshot: &PageSnapshot, cfg: &SandboxConfig) -> Result<ExecutionResult, SandboxError> {
    let mut sb = Sandbox::new(snapshot, cfg)?;
    sb.install_shim()?;
    sb.call_env("__urlscope_env.setReadyState('loading')").map_err(SandboxError::Engine)?;
    for script in document_order(snapshot) {
        if script.source.trim().is_empty() {
            continue;
        }
        sb.run_script(&script.name, &script.source);
    }
    sb.dispatch_load();
    let window = cfg.window_ms;
    sb.run_timers(window);
    if !sb.hard_cap_hit() && !sb.network_seen() {
        sb.simulate_interaction(cfg.simulate_interactions);
    }
    Ok(sb.finish())
}
