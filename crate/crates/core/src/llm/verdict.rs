//! Strict JSON parsing of model output, with a single repair pass.
//!
//! Repairs run in a fixed order, each applied on top of the previous one,
//! and parsing is retried after every step:
//!
//! 1. strip Markdown code fences
//! 2. trim prose before the first `{` and after its matching `}`
//! 3. drop trailing commas before `}` or `]`
//! 4. close unbalanced strings, brackets and braces

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::LlmError;
use crate::prompt::ResponseSchema;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictDocument {
    pub schema_id: String,
    pub fields: Map<String, Value>,
    pub raw_text: String,
    pub repair_applied: bool,
}

impl VerdictDocument {
    /// Wraps an already-parsed object without validation. Non-object values
    /// give an empty document.
    pub fn from_value(kind: crate::prompt::PromptKind, value: Value) -> Self {
        let raw_text = value.to_string();
        let fields = match value {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        VerdictDocument { schema_id: kind.as_str().to_string(), fields, raw_text, repair_applied: false }
    }

    pub fn get(&self, path: &str) -> Option<&Value> {
        let mut cur = self.fields.get(path.split('.').next()?)?;
        for seg in path.split('.').skip(1) {
            cur = cur.get(seg)?;
        }
        Some(cur)
    }

    pub fn f64(&self, path: &str) -> Option<f64> {
        self.get(path).and_then(Value::as_f64)
    }

    pub fn str(&self, path: &str) -> Option<&str> {
        self.get(path).and_then(Value::as_str)
    }

    pub fn bool(&self, path: &str) -> Option<bool> {
        self.get(path).and_then(Value::as_bool)
    }
}

fn strict(text: &str) -> Option<Map<String, Value>> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(m)) => Some(m),
        _ => None,
    }
}

pub fn strip_fences(text: &str) -> String {
    let t = text.trim();
    let Some(start) = t.find("```") else { return t.to_string() };
    let after = &t[start + 3..];
    // skip an info string such as `json`
    let body = match after.find('\n') {
        Some(nl) if after[..nl].chars().all(|c| c.is_ascii_alphanumeric()) => &after[nl + 1..],
        _ => after,
    };
    match body.rfind("```") {
        Some(end) => body[..end].trim().to_string(),
        None => body.trim().to_string(),
    }
}

/// Scans `text` outside string literals, calling `f(index, byte)`.
fn scan_code(text: &str, mut f: impl FnMut(usize, u8)) {
    let mut in_str = false;
    let mut escaped = false;
    for (i, b) in text.bytes().enumerate() {
        if in_str {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_str = false;
            }
            continue;
        }
        if b == b'"' {
            in_str = true;
        }
        f(i, b);
    }
}

pub fn trim_prose(text: &str) -> String {
    let Some(start) = text.find('{') else { return text.to_string() };
    let body = &text[start..];
    let mut depth = 0i32;
    let mut end = None;
    scan_code(body, |i, b| {
        if end.is_some() {
            return;
        }
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    end = Some(i);
                }
            }
            _ => {}
        }
    });
    match end {
        Some(e) => body[..=e].to_string(),
        None => body.to_string(),
    }
}

pub fn drop_trailing_commas(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut remove = Vec::new();
    scan_code(text, |i, b| {
        if b == b',' && matches!(bytes[i + 1..].iter().find(|c| !c.is_ascii_whitespace()), Some(b'}' | b']')) {
            remove.push(i);
        }
    });
    text.char_indices().filter(|(i, _)| !remove.contains(i)).map(|(_, c)| c).collect()
}

pub fn balance(text: &str) -> String {
    let mut stack = Vec::new();
    let mut in_str = false;
    let mut escaped = false;
    for b in text.bytes() {
        if in_str {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_str = false;
            }
            continue;
        }
        match b {
            b'"' => in_str = true,
            b'{' => stack.push(b'}'),
            b'[' => stack.push(b']'),
            b'}' | b']' if stack.last() == Some(&b) => {
                stack.pop();
            }
            _ => {}
        }
    }
    let mut out = text.trim_end().to_string();
    if in_str {
        out.push('"');
    }
    while out.ends_with(',') {
        out.pop();
    }
    for c in stack.into_iter().rev() {
        out.push(c as char);
    }
    out
}

/// Parses model text into a schema-validated document.
pub fn parse_verdict(raw_text: &str, schema: &ResponseSchema) -> Result<VerdictDocument, LlmError> {
    let (mut fields, repaired) = match strict(raw_text) {
        Some(m) => (m, false),
        None => {
            let steps: [fn(&str) -> String; 4] = [strip_fences, trim_prose, drop_trailing_commas, balance];
            let mut text = raw_text.to_string();
            let mut found = None;
            for step in steps {
                text = step(&text);
                if let Some(m) = strict(&text) {
                    found = Some(m);
                    break;
                }
            }
            match found {
                Some(m) => (m, true),
                None => {
                    let message = match serde_json::from_str::<Value>(&text) {
                        Err(e) => e.to_string(),
                        Ok(_) => "top-level value is not an object".to_string(),
                    };
                    return Err(LlmError::Parse { raw_text: raw_text.to_string(), message });
                }
            }
        }
    };
    schema.apply_defaults(&mut fields);
    let violations = schema.validate(&fields);
    if !violations.is_empty() {
        return Err(LlmError::Validation { raw_text: raw_text.to_string(), fields: violations });
    }
    Ok(VerdictDocument { schema_id: schema.schema_id.clone(), fields, raw_text: raw_text.to_string(), repair_applied: repaired })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::PromptKind;

    const SANDBOX: &str = r#"{"sandboxRiskScore": 20, "sandboxRiskLevel": "Low", "sandboxFindings": [{"title": "x", "severity": "Low"}]}"#;

    fn schema() -> ResponseSchema {
        PromptKind::SandboxBehavior.schema()
    }

    #[test]
    fn strict_parse() {
        let d = parse_verdict(SANDBOX, &schema()).unwrap();
        assert!(!d.repair_applied);
        assert_eq!(d.f64("sandboxRiskScore"), Some(20.0));
        assert_eq!(d.str("sandboxRiskLevel"), Some("Low"));
    }

    #[test]
    fn fenced_matches_strict() {
        let fenced = format!("Here you go:\n```json\n{SANDBOX}\n```\n");
        let a = parse_verdict(&fenced, &schema()).unwrap();
        let b = parse_verdict(SANDBOX, &schema()).unwrap();
        assert!(a.repair_applied);
        assert_eq!(a.fields, b.fields);
    }

    #[test]
    fn prose_and_trailing_commas() {
        let text = r#"Sure! {"sandboxRiskScore": 5, "sandboxRiskLevel": "Low", "sandboxFindings": [{"title": "a, }", "severity": "Low",},],} Thanks."#;
        let d = parse_verdict(text, &schema()).unwrap();
        assert!(d.repair_applied);
        assert_eq!(d.fields["sandboxFindings"][0]["title"], "a, }");
    }

    #[test]
    fn truncated_output_is_balanced() {
        let text = r#"{"sandboxRiskScore": 5, "sandboxRiskLevel": "Low", "sandboxFindings": [{"severity": "Low", "title": "cut off"#;
        let d = parse_verdict(text, &schema()).unwrap();
        assert_eq!(d.fields["sandboxFindings"][0]["title"], "cut off");
    }

    #[test]
    fn unrepairable_keeps_raw_text() {
        match parse_verdict("I cannot help with that.", &schema()) {
            Err(LlmError::Parse { raw_text, .. }) => assert_eq!(raw_text, "I cannot help with that."),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_range_score_is_a_validation_error() {
        let text = SANDBOX.replace("20", "150");
        match parse_verdict(&text, &schema()) {
            Err(LlmError::Validation { fields, .. }) => {
                assert_eq!(fields.len(), 1);
                assert_eq!(fields[0].path, "sandboxRiskScore");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multibyte_text_survives_comma_repair() {
        let t = drop_trailing_commas(r#"{"a": "é, ü",}"#);
        assert_eq!(t, r#"{"a": "é, ü"}"#);
    }
}
