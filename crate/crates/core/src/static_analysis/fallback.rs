//! Regex detectors used when a script does not parse.
//!
//! All patterns run on the `regex` crate's linear-time engine, so the fallback
//! stays O(|source|) however hostile the input.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

use super::strings::StringScanner;
use super::PatternFlag;

fn table() -> &'static [(PatternFlag, Regex)] {
    static TABLE: OnceLock<Vec<(PatternFlag, Regex)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let raw: &[(PatternFlag, &str)] = &[
            (PatternFlag::EvalUsage, r"\beval\s*\("),
            (PatternFlag::FunctionConstructor, r"\bFunction\s*\("),
            (PatternFlag::DelayedStringExec, r#"\bset(?:Timeout|Interval)\s*\(\s*["'`]"#),
            (PatternFlag::DynamicScriptInjection, r#"(?i)createElement\s*\(\s*["'`]script["'`]|document\s*\.\s*write(?:ln)?\s*\([^)]*<script"#),
            (PatternFlag::Base64Decode, r#"\batob\s*\(|\bBuffer\s*\.\s*from\s*\([^)]*["']base64["']"#),
            (PatternFlag::NavigatorWebdriverCheck, r"\bnavigator\s*\.\s*webdriver\b"),
            (
                PatternFlag::DomInjection,
                r#"(?i)\.(?:inner|outer)html\s*\+?=[^=]|insertAdjacentHTML\s*\(|document\s*\.\s*write(?:ln)?\s*\(|createElement\s*\(\s*["'`](?:iframe|form|input|frame|object|embed)["'`]|<iframe"#,
            ),
            (PatternFlag::EventCaptureKeys, r#"["'`]key(?:down|up|press)["'`]|\.onkey(?:down|up|press)\s*="#),
            (PatternFlag::EventCaptureMouse, r#"["'`](?:mouse(?:move|down|up)|pointer(?:move|down))["'`]|\.onmouse(?:move|down|up)\s*="#),
            (PatternFlag::CookieAccess, r"\bdocument\s*\.\s*cookie\b"),
            (PatternFlag::StorageAccess, r"\b(?:localStorage|sessionStorage|indexedDB)\b"),
            (PatternFlag::OpaqueControlFlow, r"\b(?:if|while)\s*\(\s*(?:!+\s*\[\s*\]|\d+\s*(?:[<>]=?|[!=]==?)\s*\d+)\s*\)"),
        ];
        raw.iter().map(|(f, p)| (*f, Regex::new(p).expect("fallback regex"))).collect()
    })
}

fn string_literals() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#""((?:[^"\\\n]|\\.)*)"|'((?:[^'\\\n]|\\.)*)'|`((?:[^`\\]|\\.)*)`"#).expect("literal regex"))
}

fn identifiers() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z_$][A-Za-z0-9_$]*").expect("identifier regex"))
}

pub(super) fn scan(src: &str, strings: &mut StringScanner<'_>) -> BTreeSet<PatternFlag> {
    let mut flags: BTreeSet<PatternFlag> = table().iter().filter(|(_, re)| re.is_match(src)).map(|(f, _)| *f).collect();
    for caps in string_literals().captures_iter(src) {
        if let Some(m) = caps.get(1).or_else(|| caps.get(2)).or_else(|| caps.get(3)) {
            flags.extend(strings.scan(m.as_str()));
        }
    }
    let mut seen = BTreeSet::new();
    for m in identifiers().find_iter(src) {
        if seen.insert(m.as_str()) && strings.identifier_has_keyword(m.as_str()) {
            flags.insert(PatternFlag::SensitiveKeyword);
        }
    }
    flags
}
