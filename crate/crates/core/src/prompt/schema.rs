//! Machine-readable response schemas, one per prompt kind.
//!
//! Field names are paths: `a.b` descends into objects and `a[].b` applies to
//! every element of the array `a`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::PromptKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldType {
    Integer,
    Number,
    String,
    Boolean,
    Array,
    Object,
    StringOrNull,
}

impl FieldType {
    pub fn matches(self, v: &Value) -> bool {
        match self {
            FieldType::Integer => v.as_i64().is_some() || v.as_f64().is_some_and(|f| f.fract() == 0.0),
            FieldType::Number => v.is_number(),
            FieldType::String => v.is_string(),
            FieldType::Boolean => v.is_boolean(),
            FieldType::Array => v.is_array(),
            FieldType::Object => v.is_object(),
            FieldType::StringOrNull => v.is_string() || v.is_null(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: FieldType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<String>>,
    #[serde(default)]
    pub optional: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSchema {
    pub schema_id: String,
    pub version: u32,
    pub required_fields: Vec<FieldSpec>,
    #[serde(default)]
    pub score_ranges: BTreeMap<String, [f64; 2]>,
}

/// One validation failure, addressed by concrete path such as `x[0].severity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldViolation {
    pub path: String,
    pub problem: String,
}

impl std::fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.problem)
    }
}

fn bundled(kind: PromptKind) -> &'static str {
    match kind {
        PromptKind::SandboxBehavior => include_str!("../../assets/schemas/sandbox_behavior.json"),
        PromptKind::Trust => include_str!("../../assets/schemas/trust.json"),
        PromptKind::ScriptSecurity => include_str!("../../assets/schemas/script_security.json"),
        PromptKind::GlobalProperties => include_str!("../../assets/schemas/global_properties.json"),
        PromptKind::DomMetadata => include_str!("../../assets/schemas/dom_metadata.json"),
    }
}

/// Splits `a[].b.c` into `[("a", true), ("b", false), ("c", false)]`.
fn segments(path: &str) -> Vec<(&str, bool)> {
    path.split('.').map(|s| s.strip_suffix("[]").map_or((s, false), |n| (n, true))).collect()
}

impl ResponseSchema {
    pub fn for_kind(kind: PromptKind) -> ResponseSchema {
        serde_json::from_str(bundled(kind)).expect("bundled schema is valid")
    }

    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.required_fields.iter().find(|f| f.name == name)
    }

    /// Inserts declared defaults for absent optional fields. Returns how many
    /// were filled.
    pub fn apply_defaults(&self, doc: &mut Map<String, Value>) -> usize {
        let mut filled = 0;
        for spec in self.required_fields.iter().filter(|f| f.optional) {
            if let Some(d) = &spec.default {
                filled += fill_default(doc, &segments(&spec.name), d);
            }
        }
        filled
    }

    pub fn validate(&self, doc: &Map<String, Value>) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        for spec in &self.required_fields {
            let range = self.score_ranges.get(&spec.name);
            check(&Value::Object(doc.clone()), &segments(&spec.name), String::new(), spec, range, &mut out);
        }
        out
    }
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

fn check(node: &Value, segs: &[(&str, bool)], prefix: String, spec: &FieldSpec, range: Option<&[f64; 2]>, out: &mut Vec<FieldViolation>) {
    let Some(((name, is_array), rest)) = segs.split_first() else { return };
    let path = join(&prefix, name);
    let Some(obj) = node.as_object() else { return };
    let Some(value) = obj.get(*name) else {
        // element specs are reported through their parent array
        if rest.is_empty() && !is_array && !spec.optional {
            out.push(FieldViolation { path, problem: "missing".into() });
        }
        return;
    };
    if *is_array {
        let Some(items) = value.as_array() else { return };
        for (i, item) in items.iter().enumerate() {
            let at = format!("{path}[{i}]");
            if rest.is_empty() {
                check_leaf(item, &at, spec, range, out);
            } else {
                check(item, rest, at, spec, range, out);
            }
        }
    } else if rest.is_empty() {
        check_leaf(value, &path, spec, range, out);
    } else {
        check(value, rest, path, spec, range, out);
    }
}

fn check_leaf(value: &Value, path: &str, spec: &FieldSpec, range: Option<&[f64; 2]>, out: &mut Vec<FieldViolation>) {
    if !spec.ty.matches(value) {
        out.push(FieldViolation { path: path.to_string(), problem: format!("expected {:?}", spec.ty).to_lowercase() });
        return;
    }
    if let (Some(allowed), Some(s)) = (&spec.allowed, value.as_str()) {
        if !allowed.iter().any(|a| a == s) {
            out.push(FieldViolation { path: path.to_string(), problem: format!("{s:?} not in {}", allowed.join("|")) });
        }
    }
    if let (Some([lo, hi]), Some(n)) = (range, value.as_f64()) {
        if n < *lo || n > *hi {
            out.push(FieldViolation { path: path.to_string(), problem: format!("{n} outside [{lo}, {hi}]") });
        }
    }
}

fn fill_default(doc: &mut Map<String, Value>, segs: &[(&str, bool)], default: &Value) -> usize {
    let Some(((name, is_array), rest)) = segs.split_first() else { return 0 };
    if rest.is_empty() {
        if doc.contains_key(*name) {
            return 0;
        }
        doc.insert(name.to_string(), default.clone());
        return 1;
    }
    match doc.get_mut(*name) {
        Some(Value::Array(items)) if *is_array => items.iter_mut().filter_map(Value::as_object_mut).map(|o| fill_default(o, rest, default)).sum(),
        Some(Value::Object(o)) if !is_array => fill_default(o, rest, default),
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn obj(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn all_bundled_schemas_load() {
        for k in PromptKind::ALL {
            let s = ResponseSchema::for_kind(k);
            assert_eq!(s.schema_id, k.as_str());
        }
    }

    #[test]
    fn sandbox_schema_constraints() {
        let s = ResponseSchema::for_kind(PromptKind::SandboxBehavior);
        assert_eq!(s.score_ranges["sandboxRiskScore"], [0.0, 100.0]);
        let level = s.field("sandboxRiskLevel").unwrap();
        assert_eq!(level.allowed.as_deref().unwrap(), ["Low", "Medium", "High", "Critical"]);
        let ok = obj(json!({"sandboxRiskScore": 10, "sandboxRiskLevel": "Low", "sandboxFindings": []}));
        assert!(s.validate(&ok).is_empty());
        let bad = obj(json!({"sandboxRiskScore": 101, "sandboxRiskLevel": "Severe", "sandboxFindings": [{"title": "x", "severity": "Huge"}]}));
        let paths: Vec<_> = s.validate(&bad).into_iter().map(|v| v.path).collect();
        assert_eq!(paths, ["sandboxRiskScore", "sandboxRiskLevel", "sandboxFindings[0].severity"]);
    }

    #[test]
    fn missing_fields_are_named() {
        let s = ResponseSchema::for_kind(PromptKind::Trust);
        let v = s.validate(&obj(json!({"score": 5})));
        assert_eq!(v.iter().map(|v| v.path.as_str()).collect::<Vec<_>>(), ["level", "factors"]);
    }

    #[test]
    fn optional_booleans_get_defaults() {
        let s = ResponseSchema::for_kind(PromptKind::GlobalProperties);
        let mut doc = obj(json!({"behaviorAnalysis": {"hasKeyloggers": true}}));
        assert_eq!(s.apply_defaults(&mut doc), 2);
        assert_eq!(doc["behaviorAnalysis"], json!({"hasKeyloggers": true, "hasDataExfiltrators": false, "hasSessionHijackers": false}));
    }
}
