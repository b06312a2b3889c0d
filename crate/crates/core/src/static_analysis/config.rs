use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PatternFlag;

const DEFAULT_CONFIG: &str = include_str!("../../assets/detectors.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObfuscationWeights {
    pub short_identifiers: f64,
    pub whitespace: f64,
    pub string_entropy: f64,
    pub hex_identifiers: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObfuscationConfig {
    pub short_identifier_len: usize,
    pub weights: ObfuscationWeights,
    pub obfuscated_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityConfig {
    pub obfuscation_factor: f64,
    pub issue_penalty: u32,
    pub issue_flags: BTreeSet<PatternFlag>,
}

/// Keyword lists, thresholds and weights used by the static detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub version: u32,
    pub sensitive_keywords: Vec<String>,
    pub api_key_patterns: Vec<String>,
    pub base64_min_len: usize,
    pub hex_min_len: usize,
    pub suspicious_tlds: Vec<String>,
    pub obfuscation: ObfuscationConfig,
    pub quality: QualityConfig,
    pub opaque_nesting_depth: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CONFIG).expect("bundled detector config is valid")
    }
}

impl DetectorConfig {
    pub fn load(path: &Path) -> Result<Self, super::StaticError> {
        let text = std::fs::read_to_string(path).map_err(|e| super::StaticError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| super::StaticError::Config(format!("{}: {e}", path.display())))
    }
}
