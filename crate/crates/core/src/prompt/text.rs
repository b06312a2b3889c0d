//! Page-text summarization and URL observations fed into the prompts.

use std::collections::BTreeMap;
use std::net::IpAddr;

use regex::Regex;

use crate::evidence::{Severity, UrlRecord};
use crate::static_analysis::identifier_words;

pub const SUMMARY_HEAD_WORDS: usize = 60;

/// Terms that phishing URLs put in hosts and paths.
pub const SUSPICIOUS_SUBSTRINGS: &[&str] = &["login", "l0gin", "verify", "secure", "account", "update", "signin", "confirm"];

/// Brands commonly impersonated, with the registrable domains they own.
pub const KNOWN_BRANDS: &[(&str, &[&str])] = &[
    ("paypal", &["paypal.com"]),
    ("microsoft", &["microsoft.com", "microsoftonline.com", "live.com"]),
    ("office365", &["office.com", "microsoft.com"]),
    ("outlook", &["outlook.com", "live.com"]),
    ("apple", &["apple.com", "icloud.com"]),
    ("icloud", &["icloud.com", "apple.com"]),
    ("google", &["google.com"]),
    ("amazon", &["amazon.com"]),
    ("netflix", &["netflix.com"]),
    ("facebook", &["facebook.com"]),
    ("instagram", &["instagram.com"]),
    ("github", &["github.com", "githubassets.com"]),
    ("dropbox", &["dropbox.com"]),
    ("linkedin", &["linkedin.com"]),
    ("coinbase", &["coinbase.com"]),
    ("chase", &["chase.com"]),
    ("wellsfargo", &["wellsfargo.com"]),
    ("dhl", &["dhl.com"]),
];

/// The first words of the page plus every sentence naming a sensitive keyword.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TextSummary {
    pub head: String,
    pub keyword_sentences: Vec<String>,
}

fn keyword_regex(keywords: &[String]) -> Option<Regex> {
    if keywords.is_empty() {
        return None;
    }
    let alts: Vec<String> = keywords.iter().map(|k| regex::escape(k)).collect();
    Regex::new(&format!(r"(?i)\b(?:{})\b", alts.join("|"))).ok()
}

fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, c) in text.char_indices() {
        let end = match c {
            '\n' => Some(i),
            '.' | '!' | '?' if bytes.get(i + 1).is_none_or(|b| b.is_ascii_whitespace()) => Some(i + 1),
            _ => None,
        };
        if let Some(e) = end {
            let s = text[start..e].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = e;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

pub fn summarize_text(text: &str, keywords: &[String]) -> TextSummary {
    let head = text.split_whitespace().take(SUMMARY_HEAD_WORDS).collect::<Vec<_>>().join(" ");
    let mut keyword_sentences = Vec::new();
    if let Some(re) = keyword_regex(keywords) {
        for s in sentences(text) {
            let s = s.split_whitespace().collect::<Vec<_>>().join(" ");
            if re.is_match(&s) && !head.contains(&s) && !keyword_sentences.contains(&s) {
                keyword_sentences.push(s);
            }
        }
    }
    TextSummary { head, keyword_sentences }
}

/// Whether any sentence of `text` names a sensitive keyword.
pub fn mentions_keyword(text: &str, keywords: &[String]) -> bool {
    keyword_regex(keywords).is_some_and(|re| re.is_match(text))
}

fn registrable(host: &str) -> String {
    let labels: Vec<&str> = host.split('.').collect();
    labels[labels.len().saturating_sub(2)..].join(".")
}

/// Known brands named in page metadata whose domains the page is not on.
pub fn brand_mismatches(brand_meta: &BTreeMap<String, String>, url: &UrlRecord) -> Vec<&'static str> {
    let reg = registrable(&url.host);
    // Whole tokens catch camel-cased names such as "PayPal".
    let words: Vec<String> = brand_meta
        .values()
        .flat_map(|v| {
            let tokens = v.split(|c: char| !c.is_ascii_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_ascii_lowercase);
            identifier_words(v).into_iter().chain(tokens)
        })
        .collect();
    let mut out = Vec::new();
    for (brand, owned) in KNOWN_BRANDS {
        if words.iter().any(|w| w == brand) && !owned.contains(&reg.as_str()) && !out.contains(brand) {
            out.push(*brand);
        }
    }
    out
}

/// Lexical observations about the URL itself, each with a severity.
pub fn url_hints(url: &UrlRecord, suspicious_tlds: &[String]) -> Vec<(String, Severity)> {
    let mut out = Vec::new();
    let host = url.host.trim_matches(|c| c == '[' || c == ']');
    let is_ip = host.parse::<IpAddr>().is_ok();
    if is_ip {
        out.push(("Host is a raw IP address".to_string(), Severity::Medium));
    }
    if host.split('.').any(|l| l.starts_with("xn--")) {
        out.push(("Host uses punycode labels".to_string(), Severity::Medium));
    }
    if !is_ip {
        if let Some(tld) = host.rsplit('.').next().filter(|t| suspicious_tlds.iter().any(|s| s == t)) {
            out.push((format!("Top-level domain .{tld} is frequently abused"), Severity::Low));
        }
        let subdomains = host.split('.').count().saturating_sub(2);
        if subdomains >= 3 {
            out.push((format!("Host has {subdomains} subdomain levels"), Severity::Low));
        }
    }
    if url.raw.contains('@') {
        out.push(("URL contains an '@' character".to_string(), Severity::Medium));
    }
    let lower = format!("{}{}", host, url.path).to_ascii_lowercase();
    for term in SUSPICIOUS_SUBSTRINGS {
        if lower.contains(term) {
            out.push((format!("URL contains the term '{term}'"), Severity::Low));
        }
    }
    if !is_ip {
        let reg = registrable(host);
        for (brand, owned) in KNOWN_BRANDS {
            if host.contains(brand) && !owned.contains(&reg.as_str()) {
                out.push((format!("Host mentions {brand} but is not a {brand} domain"), Severity::High));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kw() -> Vec<String> {
        vec!["password".into(), "bank".into()]
    }

    #[test]
    fn head_is_sixty_words() {
        let text = (0..100).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let s = summarize_text(&text, &kw());
        assert_eq!(s.head.split(' ').count(), 60);
        assert!(s.head.ends_with("w59"));
        assert!(s.keyword_sentences.is_empty());
    }

    #[test]
    fn keyword_sentences_are_whole_words() {
        let filler = "lorem ".repeat(70);
        let text = format!("{filler}. Enter your bank password now. Passwords are nice. Bankruptcy news.");
        let s = summarize_text(&text, &kw());
        assert_eq!(s.keyword_sentences, ["Enter your bank password now."]);
    }

    #[test]
    fn github_has_no_hints() {
        let u = UrlRecord::parse("https://github.com").unwrap();
        assert!(url_hints(&u, &[]).is_empty());
    }

    #[test]
    fn fake_microsoft_hints() {
        let u = UrlRecord::parse("http://secure-login-microsoft.com.verify-account.xyz/login").unwrap();
        let hints: Vec<String> = url_hints(&u, &["xyz".to_string()]).into_iter().map(|h| h.0).collect();
        assert!(hints.contains(&"Top-level domain .xyz is frequently abused".to_string()));
        assert!(hints.contains(&"URL contains the term 'login'".to_string()));
        assert!(hints.contains(&"Host mentions microsoft but is not a microsoft domain".to_string()));
        assert!(!hints.iter().any(|h| h.contains("subdomain")));
    }

    #[test]
    fn brand_metadata_against_domain() {
        let meta: BTreeMap<String, String> = [("og:site_name".to_string(), "Microsoft Account".to_string())].into();
        let fake = UrlRecord::parse("https://login-portal.example/").unwrap();
        assert_eq!(brand_mismatches(&meta, &fake), ["microsoft"]);
        let real = UrlRecord::parse("https://www.microsoft.com/").unwrap();
        assert!(brand_mismatches(&meta, &real).is_empty());
        let camel: BTreeMap<String, String> = [("og:site_name".to_string(), "PayPal".to_string())].into();
        assert_eq!(brand_mismatches(&camel, &fake), ["paypal"]);
    }

    #[test]
    fn ip_host() {
        let u = UrlRecord::parse("http://192.168.4.20/a@b").unwrap();
        let hints: Vec<String> = url_hints(&u, &[]).into_iter().map(|h| h.0).collect();
        assert_eq!(hints, ["Host is a raw IP address", "URL contains an '@' character"]);
    }
}
