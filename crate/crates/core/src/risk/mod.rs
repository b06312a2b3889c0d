//! Final classification: model verdicts blended with rule-based evidence points.

mod evidence;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::evidence::{Finding, FindingCategory, Severity, UrlRecord};
use crate::llm::VerdictDocument;
use crate::prompt::PromptKind;

pub use evidence::{score_evidence, score_evidence_with, EvidenceCategory, EvidenceScore};

pub const REPORT_VERSION: u32 = 1;
const BUNDLED_WEIGHTS: &str = include_str!("../../assets/weights.json");

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("missing required verdicts: {}", .0.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", "))]
    MissingVerdicts(Vec<PromptKind>),
    #[error("weight table: {0}")]
    Weights(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Already a 0-100 risk score.
    Direct,
    /// A 0-100 legitimacy score, entered as `100 - x`.
    Inverted,
    /// A severity name mapped through `level_scores`.
    Level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFallback {
    pub field: String,
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictWeight {
    pub schema_id: PromptKind,
    pub field: String,
    pub multiplier: f64,
    pub transform: Transform,
    #[serde(default)]
    pub fallback: Option<FieldFallback>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub benign_max: u32,
    pub warnings_min: u32,
    pub malicious_min: u32,
    /// Malicious decisions at or above this are reported as Critical.
    pub critical_min: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blend {
    pub model: f64,
    pub evidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub version: u32,
    pub evidence: BTreeMap<EvidenceCategory, u32>,
    pub verdicts: Vec<VerdictWeight>,
    pub level_scores: BTreeMap<Severity, u32>,
    pub thresholds: Thresholds,
    pub blend: Blend,
    /// Minimum confidence for an `isPhishing` verdict to force malicious.
    pub override_confidence: u32,
    /// Reported as findings but never counted toward points.
    #[serde(default)]
    pub excluded_from_points: Vec<EvidenceCategory>,
}

impl Default for WeightTable {
    fn default() -> Self {
        serde_json::from_str(BUNDLED_WEIGHTS).expect("bundled weight table is valid")
    }
}

impl WeightTable {
    pub fn load(path: &Path) -> Result<Self, RiskError> {
        let text = std::fs::read_to_string(path).map_err(|e| RiskError::Weights(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, RiskError> {
        let t: WeightTable = serde_json::from_str(text).map_err(|e| RiskError::Weights(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), RiskError> {
        let th = &self.thresholds;
        if !(th.benign_max < th.warnings_min && th.warnings_min <= th.malicious_min) {
            return Err(RiskError::Weights("thresholds must satisfy benign_max < warnings_min <= malicious_min".into()));
        }
        if th.malicious_min > 100 || th.critical_min < th.malicious_min {
            return Err(RiskError::Weights("critical_min must lie between malicious_min and 100".into()));
        }
        if self.blend.model < 0.0 || self.blend.evidence < 0.0 || (self.blend.model + self.blend.evidence - 1.0).abs() > 1e-9 {
            return Err(RiskError::Weights("blend weights must be non-negative and sum to 1".into()));
        }
        if self.verdicts.iter().any(|v| v.multiplier.is_nan() || v.multiplier < 0.0) {
            return Err(RiskError::Weights("verdict multipliers must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Benign,
    BenignWithWarnings,
    Malicious,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Benign => "benign",
            Classification::BenignWithWarnings => "benign_with_warnings",
            Classification::Malicious => "malicious",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreatType {
    None,
    Phishing,
    Scam,
    Malware,
    Exploit,
    Other,
}

impl ThreatType {
    pub fn as_str(self) -> &'static str {
        match self {
            ThreatType::None => "none",
            ThreatType::Phishing => "phishing",
            ThreatType::Scam => "scam",
            ThreatType::Malware => "malware",
            ThreatType::Exploit => "exploit",
            ThreatType::Other => "other",
        }
    }

    fn from_phishing_type(t: &str) -> ThreatType {
        match t {
            "credential-harvesting" | "clone-site" | "brand-impersonation" | "fake-login" => ThreatType::Phishing,
            "social-engineering" => ThreatType::Scam,
            "data-exfiltrator" | "keylogger" | "session-hijacker" => ThreatType::Malware,
            _ => ThreatType::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub version: u32,
    pub url: UrlRecord,
    pub classification: Classification,
    pub threat_type: ThreatType,
    pub risk_level: Severity,
    pub risk_score: u32,
    pub evidence_points: u32,
    /// Weighted mean of the verdict scores, before blending.
    pub model_score: f64,
    pub findings: Vec<Finding>,
    pub explanations: BTreeMap<PromptKind, String>,
    pub timings: BTreeMap<String, u64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RiskReport {
    /// One-line verdict such as `Malicious (Phishing) - High Risk`.
    pub fn headline(&self) -> String {
        let class = match self.classification {
            Classification::Benign => "Benign".to_string(),
            Classification::BenignWithWarnings => "Benign with warnings".to_string(),
            Classification::Malicious => {
                let t = self.threat_type.as_str();
                format!("Malicious ({}{})", t[..1].to_ascii_uppercase(), &t[1..])
            }
        };
        format!("{class} - {} Risk", self.risk_level)
    }

    pub fn max_severity(&self) -> Option<Severity> {
        self.findings.iter().map(|f| f.severity).max()
    }
}

fn verdict_score(doc: &VerdictDocument, field: &str, transform: Transform, weights: &WeightTable) -> Option<f64> {
    let v = match transform {
        Transform::Direct => doc.f64(field)?,
        Transform::Inverted => 100.0 - doc.f64(field)?,
        Transform::Level => {
            let sev: Severity = doc.str(field)?.parse().ok()?;
            f64::from(*weights.level_scores.get(&sev)?)
        }
    };
    Some(v.clamp(0.0, 100.0))
}

/// Weighted mean of the per-verdict risk scores; 0 when none apply.
pub fn model_aggregate(verdicts: &BTreeMap<PromptKind, VerdictDocument>, weights: &WeightTable) -> f64 {
    let mut sum = 0.0;
    let mut total = 0.0;
    for w in &weights.verdicts {
        let Some(doc) = verdicts.get(&w.schema_id) else { continue };
        let score = verdict_score(doc, &w.field, w.transform, weights)
            .or_else(|| w.fallback.as_ref().and_then(|f| verdict_score(doc, &f.field, f.transform, weights)));
        if let Some(s) = score {
            sum += s * w.multiplier;
            total += w.multiplier;
        }
    }
    if total > 0.0 {
        sum / total
    } else {
        0.0
    }
}

fn category_for(text: &str) -> FindingCategory {
    let t = text.to_ascii_lowercase();
    let has = |words: &[&str]| words.iter().any(|w| t.contains(w));
    if has(&["keylog", "keystroke"]) {
        FindingCategory::Keylogging
    } else if has(&["session", "hijack"]) {
        FindingCategory::SessionHijacking
    } else if has(&["exfiltrat", "post request", "third-party origin", "data sent"]) {
        FindingCategory::DataExfiltration
    } else if has(&["credential", "password", "login", "form"]) {
        FindingCategory::CredentialHarvesting
    } else if has(&["brand"]) {
        FindingCategory::BrandMismatch
    } else if has(&["obfusc"]) {
        FindingCategory::Obfuscation
    } else if has(&["eval", "inject", "dynamic"]) {
        FindingCategory::DynamicInjection
    } else if has(&["hidden", "iframe"]) {
        FindingCategory::HiddenElement
    } else if has(&["insecure", "deserializ", "disclosure", "cookie"]) {
        FindingCategory::InsecurePractice
    } else {
        FindingCategory::Other
    }
}

fn list<'a>(doc: &'a VerdictDocument, path: &str) -> &'a [Value] {
    doc.get(path).and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[])
}

/// Findings stated by the model itself, one per listed item.
pub fn verdict_findings(kind: PromptKind, doc: &VerdictDocument) -> Vec<Finding> {
    let (path, title_keys): (&str, &[&str]) = match kind {
        PromptKind::SandboxBehavior => ("sandboxFindings", &["title"]),
        PromptKind::ScriptSecurity => ("securityAnalysis.vulnerabilities", &["type"]),
        PromptKind::GlobalProperties => ("globalPropIndicators", &["description", "property"]),
        PromptKind::DomMetadata => ("domIndicators", &["description", "type"]),
        PromptKind::Trust => return Vec::new(),
    };
    let mut items: Vec<&Value> = list(doc, path).iter().collect();
    if kind == PromptKind::DomMetadata {
        items.extend(list(doc, "indicators"));
    }
    let mut out = Vec::new();
    for item in items {
        let ty = item.get("type").and_then(Value::as_str).unwrap_or("");
        if ty == "none" {
            continue;
        }
        let Some(title) = title_keys.iter().find_map(|k| item.get(*k).and_then(Value::as_str)) else { continue };
        let severity = item.get("severity").and_then(Value::as_str).and_then(|s| s.parse().ok()).unwrap_or(Severity::Low);
        let category = category_for(&format!("{ty} {title}"));
        out.push(Finding { title: title.to_string(), category, severity, evidence_refs: vec![format!("verdict:{kind}")] });
    }
    out
}

fn explanation(kind: PromptKind, doc: &VerdictDocument) -> Option<String> {
    match kind {
        PromptKind::DomMetadata | PromptKind::GlobalProperties => doc.str("recommendation").map(str::to_string),
        PromptKind::ScriptSecurity => doc.str("summary").map(str::to_string),
        PromptKind::SandboxBehavior => {
            let titles: Vec<&str> = list(doc, "sandboxFindings").iter().filter_map(|f| f.get("title").and_then(Value::as_str)).collect();
            Some(if titles.is_empty() { "No notable runtime behavior".to_string() } else { titles.join("; ") })
        }
        PromptKind::Trust => {
            let factors: Vec<&str> = list(doc, "factors").iter().filter_map(Value::as_str).collect();
            let head = format!("Trust score {} ({})", doc.f64("score")?, doc.str("level").unwrap_or("?"));
            Some(if factors.is_empty() { head } else { format!("{head}: {}", factors.join(", ")) })
        }
    }
}

/// The `isPhishing` verdict with the highest confidence, if any.
fn strongest_phishing(verdicts: &BTreeMap<PromptKind, VerdictDocument>) -> Option<(f64, &str)> {
    let mut best: Option<(f64, &str)> = None;
    for doc in verdicts.values() {
        if doc.bool("isPhishing") != Some(true) {
            continue;
        }
        let conf = doc.f64("confidence").unwrap_or(0.0);
        if best.is_none_or(|(c, _)| conf > c) {
            best = Some((conf, doc.str("phishingType").unwrap_or("none")));
        }
    }
    best
}

pub const REQUIRED_VERDICTS: [PromptKind; 2] = [PromptKind::DomMetadata, PromptKind::SandboxBehavior];

pub fn combine(
    url: &UrlRecord,
    verdicts: &BTreeMap<PromptKind, VerdictDocument>,
    evidence: &EvidenceScore,
    weights: &WeightTable,
) -> Result<RiskReport, RiskError> {
    let missing: Vec<PromptKind> = REQUIRED_VERDICTS.into_iter().filter(|k| !verdicts.contains_key(k)).collect();
    if !missing.is_empty() {
        return Err(RiskError::MissingVerdicts(missing));
    }
    let th = weights.thresholds;
    let points = evidence.points.min(100);
    let model = model_aggregate(verdicts, weights);
    let blended = weights.blend.model * model + weights.blend.evidence * f64::from(points);
    let risk_score = blended.round().clamp(0.0, 100.0) as u32;

    let mut findings = evidence.findings.clone();
    for (kind, doc) in verdicts {
        findings.extend(verdict_findings(*kind, doc));
    }
    let worst = findings.iter().map(|f| f.severity).max();

    // Evidence points alone can move a page into a band the blended score
    // would dilute; a Critical finding never leaves the page plain benign.
    let mut decision = points.max(risk_score);
    if worst == Some(Severity::Critical) {
        decision = decision.max(th.warnings_min);
    }
    let phishing = strongest_phishing(verdicts);
    let forced = phishing.is_some_and(|(c, _)| c >= f64::from(weights.override_confidence));
    let classification = if forced || decision >= th.malicious_min {
        Classification::Malicious
    } else if decision <= th.benign_max {
        Classification::Benign
    } else {
        Classification::BenignWithWarnings
    };
    let risk_level = match classification {
        Classification::Malicious if decision >= th.critical_min || worst == Some(Severity::Critical) => Severity::Critical,
        Classification::Malicious => Severity::High,
        Classification::BenignWithWarnings if worst >= Some(Severity::High) => Severity::High,
        Classification::BenignWithWarnings => Severity::Medium,
        Classification::Benign => Severity::Low,
    };
    let threat_type = match classification {
        Classification::Malicious => match phishing {
            Some((_, t)) if t != "none" => ThreatType::from_phishing_type(t),
            _ if findings.iter().any(|f| matches!(f.category, FindingCategory::CredentialHarvesting | FindingCategory::BrandMismatch)) => {
                ThreatType::Phishing
            }
            _ => ThreatType::Malware,
        },
        _ => ThreatType::None,
    };
    let explanations = verdicts.iter().filter_map(|(k, d)| explanation(*k, d).map(|e| (*k, e))).collect();
    Ok(RiskReport {
        version: REPORT_VERSION,
        url: url.clone(),
        classification,
        threat_type,
        risk_level,
        risk_score,
        evidence_points: points,
        model_score: (model * 100.0).round() / 100.0,
        findings,
        explanations,
        timings: BTreeMap::new(),
        warnings: Vec::new(),
    })
}
