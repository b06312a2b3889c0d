//! Serializable DOM tree shared with the engine-side emulation, plus the
//! hidden-element heuristic, visible-text extraction and form/brand metadata.
//!
//! An element is hidden when it carries the `hidden` attribute, has
//! `display:none` or `visibility:hidden|collapse`, has zero width or height
//! (inline style, or the `width`/`height` attributes), or is absolutely
//! positioned entirely outside a 1366x768 viewport. An unknown width or height
//! counts as the full viewport extent for the off-screen test.
//! `emulation.js` carries the same rule as `isHidden`.

use std::collections::BTreeMap;

use scraper::{Html, Node};
use serde::{Deserialize, Serialize};

use crate::evidence::DomMetadata;

pub const VIEWPORT_WIDTH: f64 = 1366.0;
pub const VIEWPORT_HEIGHT: f64 = 768.0;

/// Tags whose text never renders.
const NON_RENDERED: &[&str] = &["head", "script", "style", "noscript", "template", "title", "meta", "link", "iframe", "frame", "object"];

/// Meta `property`/`name` keys treated as brand claims.
pub const BRAND_META_KEYS: &[&str] = &["og:site_name", "og:title", "application-name", "apple-mobile-web-app-title", "twitter:site"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomNode {
    Element {
        tag: String,
        #[serde(default)]
        attrs: Vec<(String, String)>,
        #[serde(default)]
        children: Vec<DomNode>,
    },
    Text {
        text: String,
    },
}

fn convert(node: ego_tree::NodeRef<'_, Node>) -> Option<DomNode> {
    match node.value() {
        Node::Element(el) => Some(DomNode::Element {
            tag: el.name().to_ascii_lowercase(),
            attrs: el.attrs().map(|(k, v)| (k.to_ascii_lowercase(), v.to_string())).collect(),
            children: node.children().filter_map(convert).collect(),
        }),
        Node::Text(t) => Some(DomNode::Text { text: t.to_string() }),
        _ => None,
    }
}

impl DomNode {
    pub fn element(tag: &str, attrs: &[(&str, &str)], children: Vec<DomNode>) -> DomNode {
        DomNode::Element {
            tag: tag.to_string(),
            attrs: attrs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            children,
        }
    }

    pub fn text(s: &str) -> DomNode {
        DomNode::Text { text: s.to_string() }
    }

    /// Parses a full document; the root is a `#document` element.
    pub fn from_html(html: &str) -> DomNode {
        let doc = Html::parse_document(html);
        DomNode::Element { tag: "#document".into(), attrs: Vec::new(), children: doc.tree.root().children().filter_map(convert).collect() }
    }

    /// Parses a fragment as it would appear inside `<body>`.
    pub fn fragment(html: &str) -> Vec<DomNode> {
        let frag = Html::parse_fragment(html);
        // parse_fragment wraps content in an <html> element
        let root = frag.tree.root();
        root.children()
            .filter_map(convert)
            .flat_map(|n| match n {
                DomNode::Element { tag, children, .. } if tag == "html" => children,
                other => vec![other],
            })
            .collect()
    }

    pub fn tag(&self) -> Option<&str> {
        match self {
            DomNode::Element { tag, .. } => Some(tag),
            DomNode::Text { .. } => None,
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        match self {
            DomNode::Element { attrs, .. } => attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str()),
            DomNode::Text { .. } => None,
        }
    }

    pub fn children(&self) -> &[DomNode] {
        match self {
            DomNode::Element { children, .. } => children,
            DomNode::Text { .. } => &[],
        }
    }

    /// All elements in document order, including `self`.
    pub fn elements(&self) -> Vec<&DomNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            if n.tag().is_some() {
                out.push(n);
                stack.extend(n.children().iter().rev());
            }
        }
        out
    }

    fn find_all<'a>(&'a self, tag: &str) -> impl Iterator<Item = &'a DomNode> + 'a {
        let tag = tag.to_string();
        self.elements().into_iter().filter(move |e| e.tag() == Some(tag.as_str()))
    }

    /// Concatenated descendant text.
    pub fn text_content(&self) -> String {
        match self {
            DomNode::Text { text } => text.clone(),
            DomNode::Element { children, .. } => children.iter().map(DomNode::text_content).collect(),
        }
    }
}

pub fn parse_style(style: &str) -> BTreeMap<String, String> {
    style
        .split(';')
        .filter_map(|decl| {
            let (k, v) = decl.split_once(':')?;
            let v = v.trim().trim_end_matches("!important").trim().to_ascii_lowercase();
            Some((k.trim().to_ascii_lowercase(), v))
        })
        .filter(|(k, _)| !k.is_empty())
        .collect()
}

/// Pixel length of `0`, `12`, `12px` or `12.5px`; other units are unknown.
pub fn parse_length(v: &str) -> Option<f64> {
    let v = v.trim();
    let num = v.strip_suffix("px").unwrap_or(v).trim();
    num.parse::<f64>().ok().filter(|n| n.is_finite())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Visibility {
    Visible,
    Hidden,
    Inherit,
}

struct Box_ {
    display_none: bool,
    visibility: Visibility,
    zero_area: bool,
    off_screen: bool,
}

fn layout(node: &DomNode) -> Box_ {
    let style = node.attr("style").map(parse_style).unwrap_or_default();
    let get = |k: &str| style.get(k).map(String::as_str);
    let dim = |k: &str| get(k).and_then(parse_length).or_else(|| node.attr(k).and_then(parse_length));
    let width = dim("width");
    let height = dim("height");
    let positioned = matches!(get("position"), Some("absolute" | "fixed"));
    let left = get("left").and_then(parse_length).unwrap_or(0.0);
    let top = get("top").and_then(parse_length).unwrap_or(0.0);
    let w = width.unwrap_or(VIEWPORT_WIDTH);
    let h = height.unwrap_or(VIEWPORT_HEIGHT);
    Box_ {
        display_none: node.attr("hidden").is_some() || get("display") == Some("none"),
        visibility: match get("visibility") {
            Some("hidden" | "collapse") => Visibility::Hidden,
            Some("visible") => Visibility::Visible,
            _ => Visibility::Inherit,
        },
        zero_area: width == Some(0.0) || height == Some(0.0),
        off_screen: positioned && (left >= VIEWPORT_WIDTH || top >= VIEWPORT_HEIGHT || left + w <= 0.0 || top + h <= 0.0),
    }
}

/// Hidden state of an element given whether its parent is hidden and whether
/// `visibility:hidden` is inherited from an ancestor.
fn hidden_state(node: &DomNode, parent_hidden: bool, inherited_invisible: bool) -> (bool, bool) {
    let b = layout(node);
    let invisible = match b.visibility {
        Visibility::Hidden => true,
        Visibility::Visible => false,
        Visibility::Inherit => inherited_invisible,
    };
    // display:none, zero area and off-screen hide the whole subtree
    let subtree_hidden = parent_hidden || b.display_none || b.zero_area || b.off_screen;
    (subtree_hidden, invisible)
}

/// Hidden flag of every element in document order (cross-checked against the
/// engine emulation in tests).
pub fn hidden_flags(root: &DomNode) -> Vec<(String, bool)> {
    fn walk(n: &DomNode, parent_hidden: bool, invisible: bool, out: &mut Vec<(String, bool)>) {
        let Some(tag) = n.tag() else { return };
        let (sub, inv) = hidden_state(n, parent_hidden, invisible);
        out.push((tag.to_string(), sub || inv));
        for c in n.children() {
            walk(c, sub, inv, out);
        }
    }
    let mut out = Vec::new();
    walk(root, false, false, &mut out);
    out
}

pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whitespace-normalized text of every visible text node. The content of a
/// visible `<iframe srcdoc>` is included; hidden frames contribute nothing.
pub fn extract_visible_text(root: &DomNode) -> String {
    fn walk(n: &DomNode, parent_hidden: bool, invisible: bool, out: &mut Vec<String>) {
        match n {
            DomNode::Text { text } => {
                if !parent_hidden && !invisible && !text.trim().is_empty() {
                    out.push(text.clone());
                }
            }
            DomNode::Element { tag, children, .. } => {
                let (sub, inv) = hidden_state(n, parent_hidden, invisible);
                if sub {
                    return;
                }
                if tag == "iframe" {
                    if let Some(doc) = n.attr("srcdoc").filter(|_| !inv) {
                        walk(&DomNode::from_html(doc), false, false, out);
                    }
                    return;
                }
                if NON_RENDERED.contains(&tag.as_str()) {
                    return;
                }
                for c in children {
                    walk(c, sub, inv, out);
                }
            }
        }
    }
    let mut parts = Vec::new();
    walk(root, false, false, &mut parts);
    normalize_ws(&parts.join(" "))
}

fn attr_lower(n: &DomNode, name: &str) -> String {
    n.attr(name).unwrap_or_default().trim().to_ascii_lowercase()
}

fn input_type(n: &DomNode) -> String {
    let t = attr_lower(n, "type");
    if t.is_empty() { "text".into() } else { t }
}

fn is_credential_id_field(n: &DomNode) -> bool {
    let ty = input_type(n);
    if ty == "email" {
        return true;
    }
    if ty != "text" {
        return false;
    }
    ["name", "id", "autocomplete", "placeholder"]
        .iter()
        .map(|a| attr_lower(n, a))
        .any(|v| v.contains("email") || v.contains("login") || v.contains("user"))
}

fn host_of(url: &str) -> Option<String> {
    url::Url::parse(url).ok().and_then(|u| u.host_str().map(|h| h.trim_start_matches("www.").to_ascii_lowercase()))
}

/// Form, brand and hidden-element counts for the DOM prompt.
pub fn dom_metadata(root: &DomNode, page_url: &str) -> DomMetadata {
    let mut meta = DomMetadata {
        title: root.find_all("title").next().map(|t| normalize_ws(&t.text_content())).unwrap_or_default(),
        ..Default::default()
    };
    let page_host = host_of(page_url);
    let base = url::Url::parse(page_url).ok();
    for form in root.find_all("form") {
        meta.total_forms += 1;
        if form.find_all("input").any(|i| input_type(i) == "password") {
            meta.login_forms += 1;
        }
        if attr_lower(form, "autocomplete") != "off" {
            meta.autocomplete_forms += 1;
        }
        let action = form.attr("action").unwrap_or_default().trim();
        if !action.is_empty() {
            let resolved = match &base {
                Some(b) => b.join(action).map(|u| u.to_string()).unwrap_or_else(|_| action.to_string()),
                None => action.to_string(),
            };
            let host = host_of(&resolved);
            if host.is_some() && host != page_host {
                meta.external_form_actions.push(resolved);
            }
        }
    }
    for input in root.find_all("input") {
        match input_type(input).as_str() {
            "password" => meta.password_fields += 1,
            "hidden" => meta.hidden_elements += 1,
            _ if is_credential_id_field(input) => meta.email_fields += 1,
            _ => {}
        }
    }
    for m in root.find_all("meta") {
        let key = m.attr("property").or_else(|| m.attr("name")).unwrap_or_default().to_ascii_lowercase();
        let content = m.attr("content").map(normalize_ws).unwrap_or_default();
        if BRAND_META_KEYS.contains(&key.as_str()) && !content.is_empty() {
            meta.brand_meta.entry(key).or_insert(content);
        }
    }
    meta.hidden_elements += count_hidden_roots(root);
    meta
}

/// Rendered elements that are hidden while their parent is not.
fn count_hidden_roots(root: &DomNode) -> u32 {
    fn walk(n: &DomNode, parent_hidden: bool, invisible: bool, count: &mut u32) {
        let Some(tag) = n.tag() else { return };
        if matches!(tag, "head" | "script" | "style" | "template" | "noscript" | "meta" | "link" | "title") {
            return;
        }
        let (sub, inv) = hidden_state(n, parent_hidden, invisible);
        if (sub && !parent_hidden) || (inv && !invisible && !sub) {
            *count += 1;
        }
        for c in n.children() {
            walk(c, sub, inv, count);
        }
    }
    let mut count = 0;
    walk(root, false, false, &mut count);
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hidden_div_is_excluded() {
        let dom = DomNode::from_html(r#"<div>Secure Login</div><div style="display:none">x</div>"#);
        assert_eq!(extract_visible_text(&dom), "Secure Login");
    }

    #[test]
    fn zero_area_iframe_content_excluded() {
        // walking by hand: body > h1 (visible), iframe width=0 height=0 (area 0 -> hidden),
        // iframe width=300 height=200 (visible, srcdoc rendered)
        let html = r#"<body><h1>Welcome back</h1>
            <iframe width="0" height="0" srcdoc="<p>Enter your password</p>">fallback</iframe>
            <iframe width="300" height="200" srcdoc="<p>Weather widget</p>"></iframe></body>"#;
        assert_eq!(extract_visible_text(&DomNode::from_html(html)), "Welcome back Weather widget");
    }

    #[test]
    fn visibility_inherits_and_can_be_overridden() {
        let html = r#"<div style="visibility:hidden">a<span style="visibility: visible">b</span></div><p>c</p>"#;
        assert_eq!(extract_visible_text(&DomNode::from_html(html)), "b c");
    }

    #[test]
    fn off_screen_positioning() {
        let html = r#"
            <div style="position:absolute; left:-9999px">far left</div>
            <div style="position:absolute; left:-10px">nudged</div>
            <div style="position:fixed; top:800px">below</div>
            <div style="position:absolute; left:-200px; width:150px">narrow</div>
            <div style="left:-9999px">static</div>"#;
        assert_eq!(extract_visible_text(&DomNode::from_html(html)), "nudged static");
    }

    #[test]
    fn scripts_and_styles_do_not_render() {
        let html = "<head><title>T</title><style>p{}</style></head><body><script>var x</script><noscript>js off</noscript>Hi   there</body>";
        assert_eq!(extract_visible_text(&DomNode::from_html(html)), "Hi there");
    }

    #[test]
    fn hidden_flags_follow_document_order() {
        let dom = DomNode::from_html(r#"<p hidden><b>x</b></p><i style="width:0px">y</i><u>z</u>"#);
        let flags: Vec<(String, bool)> = hidden_flags(&dom).into_iter().filter(|(t, _)| ["p", "b", "i", "u"].contains(&t.as_str())).collect();
        assert_eq!(flags, [("p".into(), true), ("b".into(), true), ("i".into(), true), ("u".into(), false)]);
    }

    #[test]
    fn metadata_counts() {
        let html = r#"<html><head><title> Sign in   to Bank </title>
            <meta property="og:site_name" content="Example Bank"><meta name="description" content="ignored"></head>
            <body>
              <form action="https://collect.evil.test/post"><input name="username"><input type="password"></form>
              <form autocomplete="off"><input type="email"><input type="hidden" name="csrf"></form>
              <form action="/search"><input name="q"></form>
              <div style="display:none"><span>a</span></div>
            </body></html>"#;
        let m = dom_metadata(&DomNode::from_html(html), "https://bank.example/login");
        assert_eq!(m.title, "Sign in to Bank");
        assert_eq!((m.total_forms, m.login_forms, m.password_fields, m.email_fields, m.autocomplete_forms), (3, 1, 1, 2, 2));
        assert_eq!(m.hidden_elements, 2, "hidden input plus display:none div");
        assert_eq!(m.brand_meta.get("og:site_name").map(String::as_str), Some("Example Bank"));
        assert_eq!(m.brand_meta.len(), 1);
        assert_eq!(m.external_form_actions, ["https://collect.evil.test/post"]);
    }

    #[test]
    fn empty_page_metadata() {
        let m = dom_metadata(&DomNode::from_html(""), "https://blank.example/");
        assert_eq!(m, DomMetadata::default());
    }

    #[test]
    fn json_form_round_trips() {
        let dom = DomNode::from_html("<p class=a>x<b>y</b></p>");
        let text = serde_json::to_string(&dom).unwrap();
        assert_eq!(serde_json::from_str::<DomNode>(&text).unwrap(), dom);
        assert!(text.contains(r#"{"text":"x"}"#));
    }

    #[test]
    fn fragment_parsing() {
        let nodes = DomNode::fragment("<iframe src='x'></iframe>text<input type=password>");
        let tags: Vec<Option<&str>> = nodes.iter().map(DomNode::tag).collect();
        assert_eq!(tags, [Some("iframe"), None, Some("input")]);
    }
}
