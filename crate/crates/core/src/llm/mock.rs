//! Rule-table backend: deterministic verdicts chosen by markers in the prompt.
//!
//! A rule applies to one prompt kind and matches when all of its conditions
//! hold against the prompt body. Among matching rules the highest `priority`
//! wins; equal priorities go to the rule listed first. Inside the response,
//! string values may reference `{{Label}}`, which expands to the value of
//! the first body line of the form `Label: value` (a leading `- ` is ignored).
//! A string that is exactly `{{#Label}}` becomes that value's leading number.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::LlmError;
use crate::prompt::{PromptKind, RenderedPrompt};

const BUNDLED_RULES: &str = include_str!("../../assets/mock_rules.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareOp {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
}

/// One test against the prompt body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Contains(String),
    /// Case-insensitive containment.
    ContainsCi(String),
    NotContains(String),
    /// Regular expression, checked when the rule set loads.
    Regex(String),
    AnyOf(Vec<Condition>),
    /// Numeric comparison on the leading number of a `Label: value` line.
    Field { label: String, op: CompareOp, value: f64 },
}

impl Condition {
    fn holds(&self, body: &str) -> bool {
        match self {
            Condition::Contains(s) => body.contains(s.as_str()),
            Condition::ContainsCi(s) => body.to_lowercase().contains(&s.to_lowercase()),
            Condition::NotContains(s) => !body.contains(s.as_str()),
            Condition::Regex(re) => regex::Regex::new(re).is_ok_and(|r| r.is_match(body)),
            Condition::AnyOf(cs) => cs.iter().any(|c| c.holds(body)),
            Condition::Field { label, op, value } => {
                let Some(n) = field_value(body, label).and_then(leading_number) else { return false };
                match op {
                    CompareOp::Gt => n > *value,
                    CompareOp::Ge => n >= *value,
                    CompareOp::Lt => n < *value,
                    CompareOp::Le => n <= *value,
                    CompareOp::Eq => n == *value,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    pub name: String,
    pub kind: PromptKind,
    #[serde(default)]
    pub priority: i32,
    #[serde(default)]
    pub when: Vec<Condition>,
    pub response: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRuleSet {
    pub version: u32,
    pub rules: Vec<MockRule>,
}

impl Default for MockRuleSet {
    fn default() -> Self {
        serde_json::from_str(BUNDLED_RULES).expect("bundled mock rules are valid")
    }
}

impl MockRuleSet {
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::Rules(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let set: MockRuleSet = serde_json::from_str(text).map_err(|e| LlmError::Rules(e.to_string()))?;
        for r in &set.rules {
            for c in &r.when {
                check_regexes(c).map_err(|e| LlmError::Rules(format!("rule {}: {e}", r.name)))?;
            }
        }
        for kind in PromptKind::ALL {
            if !set.rules.iter().any(|r| r.kind == kind && r.when.is_empty()) {
                return Err(LlmError::Rules(format!("no unconditional default rule for {kind}")));
            }
        }
        Ok(set)
    }

    /// The winning rule for a prompt body.
    pub fn select(&self, kind: PromptKind, body: &str) -> Option<&MockRule> {
        let mut best: Option<&MockRule> = None;
        for r in self.rules.iter().filter(|r| r.kind == kind && r.when.iter().all(|c| c.holds(body))) {
            if best.is_none_or(|b| r.priority > b.priority) {
                best = Some(r);
            }
        }
        best
    }
}

fn check_regexes(c: &Condition) -> Result<(), regex::Error> {
    match c {
        Condition::Regex(re) => regex::Regex::new(re).map(|_| ()),
        Condition::AnyOf(cs) => cs.iter().try_for_each(check_regexes),
        _ => Ok(()),
    }
}

fn field_value<'a>(body: &'a str, label: &str) -> Option<&'a str> {
    body.lines().find_map(|l| {
        let l = l.trim_start();
        let l = l.strip_prefix("- ").unwrap_or(l);
        l.strip_prefix(label).and_then(|r| r.strip_prefix(':')).map(str::trim)
    })
}

fn leading_number(s: &str) -> Option<f64> {
    let end = s.find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-')).unwrap_or(s.len());
    s[..end].parse().ok()
}

fn substitute(v: &Value, body: &str) -> Value {
    match v {
        Value::String(s) if s.starts_with("{{#") && s.ends_with("}}") && s.matches("{{").count() == 1 => {
            let n = field_value(body, &s[3..s.len() - 2]).and_then(leading_number).unwrap_or(0.0);
            serde_json::Number::from_f64(n).map_or(Value::Null, |num| if n.fract() == 0.0 { Value::from(n as i64) } else { Value::Number(num) })
        }
        Value::String(s) if s.contains("{{") => {
            let mut out = String::new();
            let mut rest = s.as_str();
            while let Some(start) = rest.find("{{") {
                out.push_str(&rest[..start]);
                let after = &rest[start + 2..];
                let Some(end) = after.find("}}") else {
                    out.push_str(&rest[start..]);
                    rest = "";
                    break;
                };
                out.push_str(field_value(body, &after[..end]).unwrap_or(""));
                rest = &after[end + 2..];
            }
            out.push_str(rest);
            Value::String(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(|x| substitute(x, body)).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, x)| (k.clone(), substitute(x, body))).collect()),
        other => other.clone(),
    }
}

/// Pretty-printed JSON of the winning rule's response.
pub fn mock_generate(prompt: &RenderedPrompt, rules: &MockRuleSet) -> Result<String, LlmError> {
    let rule = rules.select(prompt.kind, &prompt.body).ok_or_else(|| LlmError::Rules(format!("no rule matches a {} prompt", prompt.kind)))?;
    let doc = substitute(&rule.response, &prompt.body);
    Ok(serde_json::to_string_pretty(&doc).expect("JSON value serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn prompt(kind: PromptKind, body: &str) -> RenderedPrompt {
        RenderedPrompt { kind, system_preamble: String::new(), body: body.into(), schema_id: kind.as_str().into(), token_estimate: 0 }
    }

    fn set(rules: Value) -> MockRuleSet {
        let mut all: Vec<Value> = PromptKind::ALL.iter().map(|k| json!({"name": "d", "kind": k, "response": {"d": true}})).collect();
        all.extend(rules.as_array().unwrap().iter().cloned());
        MockRuleSet::from_json(&json!({"version": 1, "rules": all}).to_string()).unwrap()
    }

    #[test]
    fn higher_priority_wins() {
        let s = set(json!([
            {"name": "five", "kind": "trust", "priority": 5, "when": [{"contains": "x"}], "response": {"p": 5}},
            {"name": "ten", "kind": "trust", "priority": 10, "when": [{"contains": "x"}], "response": {"p": 10}},
        ]));
        assert_eq!(s.select(PromptKind::Trust, "x").unwrap().name, "ten");
        assert_eq!(s.select(PromptKind::Trust, "y").unwrap().name, "d");
    }

    #[test]
    fn field_conditions_and_substitution() {
        let s = set(json!([
            {"name": "pw", "kind": "dom_metadata", "priority": 1,
             "when": [{"field": {"label": "Password fields", "op": "gt", "value": 0}}],
             "response": {"note": "pw={{Password fields}} t={{Title}}", "n": "{{#Password fields}}"}},
        ]));
        let body = "Title: Bank\n- Password fields: 2\n";
        let out = mock_generate(&prompt(PromptKind::DomMetadata, body), &s).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&out).unwrap(), json!({"note": "pw=2 t=Bank", "n": 2}));
        let none = mock_generate(&prompt(PromptKind::DomMetadata, "- Password fields: 0\n"), &s).unwrap();
        assert!(none.contains("\"d\""));
    }

    #[test]
    fn missing_default_is_rejected() {
        let err = MockRuleSet::from_json(r#"{"version": 1, "rules": []}"#).unwrap_err();
        assert!(err.to_string().contains("default"));
    }
}
