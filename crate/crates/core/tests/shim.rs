use std::collections::BTreeMap;

use urlscope_core::corpus::{inline_scripts, PageSnapshot};
use urlscope_core::evidence::UrlRecord;
use urlscope_core::sandbox::engine::{execute_page, Sandbox, SandboxConfig, SHIM_JS};
use urlscope_core::sandbox::trace::TraceKind;

const SHIM: &str = "globalThis[Symbol.for('urlscope.shim')]";

fn page(html: &str) -> PageSnapshot {
    PageSnapshot {
        url: UrlRecord::parse("https://bank.example/").unwrap(),
        html: html.to_string(),
        scripts: inline_scripts(html),
        fetched_at: 0,
        tls_present: true,
        responses: BTreeMap::new(),
    }
}

fn sandbox() -> Sandbox {
    Sandbox::new(&page("<html><body><div id='root'></div></body></html>"), &SandboxConfig::default()).unwrap()
}

fn shimmed() -> Sandbox {
    let mut sb = sandbox();
    sb.install_shim().unwrap();
    sb
}

#[test]
fn wrappers_pass_camouflage_check() {
    let mut sb = shimmed();
    assert_eq!(sb.eval(&format!("{SHIM}.check()")).as_deref(), Ok("true"));
    assert_eq!(sb.eval(&format!("{SHIM}.hooks.length > 15")).as_deref(), Ok("true"));
    for api in ["fetch", "eval", "setTimeout", "WebSocket"] {
        let expr = format!("Function.prototype.toString.call({api}) === 'function {api}() {{\\n    [native code]\\n}}'");
        assert_eq!(sb.eval(&expr).as_deref(), Ok("true"), "{api}");
    }
    let expr = "Function.prototype.toString.call(Node.prototype.appendChild).includes('[native code]')";
    assert_eq!(sb.eval(expr).as_deref(), Ok("true"));
}

#[test]
fn camouflage_check_rejects_a_plain_function_wrapper() {
    let mut sb = shimmed();
    let broken = format!("{SHIM}.check([[function fetch(a, b) {{ return a; }}, {SHIM}.original('window.fetch')]])");
    assert_eq!(sb.eval(&broken).as_deref(), Ok("false"));
    let renamed = format!("{SHIM}.check([[new Proxy(Math.max, {{}}), {SHIM}.original('window.fetch')]])");
    assert_eq!(sb.eval(&renamed).as_deref(), Ok("false"));
}

#[test]
fn installing_twice_changes_nothing() {
    let mut sb = shimmed();
    let before = sb.eval(&format!("{SHIM}.hooks.length")).unwrap();
    sb.install_shim().unwrap();
    assert_eq!(sb.eval(&format!("{SHIM}.hooks.length")).unwrap(), before);
    assert_eq!(sb.eval(&format!("fetch === {SHIM}.hooks[0].wrapper")).as_deref(), Ok("true"));
    let n0 = sb.message_count();
    sb.eval("fetch('/once')").unwrap();
    assert_eq!(sb.message_count() - n0, 1);
}

#[test]
fn one_message_per_invocation() {
    let mut sb = shimmed();
    let calls = [
        ("fetch('/a')", 1),
        ("localStorage.setItem('a', '1')", 1),
        ("localStorage.getItem('a')", 1),
        ("document.cookie", 1),
        ("document.cookie = 'x=1'", 1),
        ("setTimeout(function () {}, 5)", 1),
        ("document.addEventListener('click', function () {})", 1),
        ("new WebSocket('wss://w.example/')", 1),
        ("eval('2')", 1),
        ("var r = new XMLHttpRequest(); r.open('GET', '/x'); r.send()", 2),
    ];
    for (code, want) in calls {
        let n0 = sb.message_count();
        sb.eval(code).unwrap();
        assert_eq!(sb.message_count() - n0, want, "{code}");
    }
}

#[test]
fn instrumentation_is_transparent_to_page_results() {
    let program = r#"(function () {
        var out = [];
        out.push(eval('6 * 7'));
        localStorage.setItem('k', 'v'); out.push(localStorage.getItem('k'));
        document.cookie = 'a=1'; out.push(document.cookie);
        var d = document.createElement('div'); d.id = 'n';
        out.push(document.getElementById('root').appendChild(d) === d);
        out.push(document.getElementById('root').insertBefore(document.createElement('b'), d).tagName);
        out.push(document.getElementById('root').removeChild(d).id);
        var ws = new WebSocket('wss://w.example/'); out.push(ws instanceof WebSocket, ws.url);
        out.push(typeof setTimeout(function () {}, 1));
        out.push(fetch('/x') instanceof Promise);
        var xhr = new XMLHttpRequest(); xhr.open('POST', '/p'); out.push(xhr.readyState);
        out.push(fetch.length, fetch.name, eval.name, WebSocket.name);
        out.push(Object.keys(window).length);
        return JSON.stringify(out);
    })()"#;
    let mut plain = sandbox();
    let mut wrapped = shimmed();
    let a = plain.eval(program).unwrap();
    let b = wrapped.eval(program).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("[42,\"v\",\"a=1\",true,\"B\",\"n\",true,"), "{a}");
}

#[test]
fn wrappers_delegate_to_the_originals() {
    let mut sb = shimmed();
    let checks = [
        (format!("{SHIM}.original('window.fetch') !== fetch"), "true"),
        (format!("{SHIM}.original('window.eval')('1 + 2')"), "3"),
        ("eval('var leaked = 5'); typeof leaked".to_string(), "number"),
        ("new (WebSocket)('wss://a.example/').readyState".to_string(), "0"),
        ("class Sub extends WebSocket {}; new Sub('wss://a.example/') instanceof Sub".to_string(), "true"),
        ("localStorage.setItem('z', 9); localStorage.getItem('z')".to_string(), "9"),
        ("Storage.prototype.getItem.call(sessionStorage, 'none')".to_string(), "null"),
    ];
    for (expr, want) in checks {
        assert_eq!(sb.eval(&expr).as_deref(), Ok(want), "{expr}");
    }
}

#[test]
fn wrapper_exceptions_propagate_unchanged() {
    let mut sb = shimmed();
    let r = sb.eval("try { document.body.appendChild(null); 'no' } catch (e) { e instanceof TypeError }");
    assert_eq!(r.as_deref(), Ok("true"));
    let r = sb.eval("try { eval('syntax error here'); 'no' } catch (e) { e.name }");
    assert_eq!(r.as_deref(), Ok("SyntaxError"));
}

#[test]
fn payloads_stay_under_four_kib() {
    let html = "<html><body><script>(function () {\
        var big = 'x'.repeat(100000);\
        eval('/*' + big + '*/ 1');\
        var s = document.createElement('script'); s.textContent = '/*' + big + '*/'; document.body.appendChild(s);\
        fetch('https://e.example/' + big);\
        localStorage.setItem(big, big);\
        for (var i = 0; i < 600; i++) window['global_' + i + '_' + 'y'.repeat(20)] = i;\
    })();</script></body></html>";
    let out = execute_page(&page(html), &SandboxConfig::default()).unwrap();
    for e in &out.trace {
        assert!(e.detail.to_string().len() <= 4096, "{} bytes for {:?}", e.detail.to_string().len(), e.kind);
    }
    assert_eq!(out.new_globals.len(), 600);
}

#[test]
fn global_diff_reports_exactly_the_page_globals() {
    let html = "<html><body><script>window.stealCreds = function () {}; (function () { var hidden = 1; })();</script></body></html>";
    let out = execute_page(&page(html), &SandboxConfig::default()).unwrap();
    assert_eq!(out.new_globals, ["stealCreds"]);
    let created: Vec<_> = out.trace.iter().filter(|e| e.kind == TraceKind::GlobalCreated).collect();
    assert_eq!(created.len(), 1);
    assert_eq!(created[0].str_field("name"), Some("stealCreds"));
}

#[test]
fn a_failing_hook_is_reported_and_the_rest_still_install() {
    let mut sb = sandbox();
    sb.eval("Object.defineProperty(window, 'fetch', { value: fetch, writable: false, configurable: false })").unwrap();
    let installed = sb.install_shim().unwrap();
    assert!(installed > 10);
    let warnings = sb.eval(&format!("{SHIM}.warnings.length")).unwrap();
    assert_eq!(warnings, "1");
    assert_eq!(sb.eval(&format!("{SHIM}.check()")).as_deref(), Ok("true"));
}

#[test]
fn missing_channel_is_a_load_failure() {
    let mut sb = sandbox();
    assert_eq!(sb.eval("delete globalThis.__urlscope_env").as_deref(), Ok("false"));
    // The channel cannot be removed, so run the shim against a shadowed global.
    let r = sb.eval(&format!("(function (globalThis) {{ return (\n{}\n); }})({{}})", SHIM_JS.trim().trim_end_matches(';')));
    assert!(r.unwrap_err().contains("instrumentation channel unavailable"));
}
