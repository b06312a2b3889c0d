use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ObfuscationConfig;

/// Intermediate statistics gathered while walking a script.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObfuscationStats {
    /// Distinct identifier names bucketed by length in chars.
    pub identifier_length_histogram: BTreeMap<usize, usize>,
    /// Whitespace chars divided by total chars.
    pub whitespace_ratio: f64,
    /// Shannon entropy (bits/char) of each sufficiently long string literal.
    pub string_entropies: Vec<f64>,
    /// Identifiers shaped like `_0x1f2e`.
    pub hex_identifier_count: usize,
    pub total_chars: usize,
}

/// Strings shorter than this carry too little signal for entropy.
pub const ENTROPY_MIN_LEN: usize = 12;
/// Whitespace ratio is ignored for tiny scripts.
pub const WHITESPACE_MIN_CHARS: usize = 64;

impl ObfuscationStats {
    pub fn is_empty(&self) -> bool {
        self.identifier_length_histogram.is_empty() && self.string_entropies.is_empty() && self.total_chars == 0
    }

    pub fn add_identifier(&mut self, name: &str) {
        *self.identifier_length_histogram.entry(name.chars().count()).or_default() += 1;
        if is_hex_identifier(name) {
            self.hex_identifier_count += 1;
        }
    }

    pub fn add_string(&mut self, s: &str) {
        if s.chars().count() >= ENTROPY_MIN_LEN {
            self.string_entropies.push(shannon_entropy(s));
        }
    }

    pub fn set_source(&mut self, src: &str) {
        self.total_chars = src.chars().count();
        let ws = src.chars().filter(|c| c.is_whitespace()).count();
        self.whitespace_ratio = if self.total_chars == 0 { 0.0 } else { ws as f64 / self.total_chars as f64 };
    }
}

pub fn is_hex_identifier(name: &str) -> bool {
    name.strip_prefix("_0x").is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_hexdigit()))
}

pub fn shannon_entropy(s: &str) -> f64 {
    let mut counts: BTreeMap<char, usize> = BTreeMap::new();
    let mut n = 0usize;
    for c in s.chars() {
        *counts.entry(c).or_default() += 1;
        n += 1;
    }
    if n == 0 {
        return 0.0;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// The four sub-signals, each in [0, 1], before weighting.
pub fn signals(stats: &ObfuscationStats, cfg: &ObfuscationConfig) -> [f64; 4] {
    let total_idents: usize = stats.identifier_length_histogram.values().sum();
    let short: usize = stats
        .identifier_length_histogram
        .iter()
        .filter(|(len, _)| **len <= cfg.short_identifier_len)
        .map(|(_, n)| n)
        .sum();
    let short_signal = if total_idents == 0 { 0.0 } else { clamp01((short as f64 / total_idents as f64 - 0.5) / 0.4) };
    let ws_signal = if stats.total_chars >= WHITESPACE_MIN_CHARS { clamp01((0.08 - stats.whitespace_ratio) / 0.06) } else { 0.0 };
    let entropy_signal = if stats.string_entropies.is_empty() {
        0.0
    } else {
        let mean = stats.string_entropies.iter().sum::<f64>() / stats.string_entropies.len() as f64;
        clamp01((mean - 3.5) / 1.0)
    };
    let hex_signal = clamp01(stats.hex_identifier_count as f64 / 4.0);
    [short_signal, ws_signal, entropy_signal, hex_signal]
}

/// Weighted obfuscation score in [0, 1].
pub fn score_obfuscation(stats: &ObfuscationStats, cfg: &ObfuscationConfig) -> f64 {
    if stats.is_empty() {
        return 0.0;
    }
    let w = &cfg.weights;
    let [a, b, c, d] = signals(stats, cfg);
    clamp01(a * w.short_identifiers + b * w.whitespace + c * w.string_entropy + d * w.hex_identifiers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::static_analysis::DetectorConfig;

    fn cfg() -> ObfuscationConfig {
        DetectorConfig::default().obfuscation
    }

    #[test]
    fn empty_stats_score_zero() {
        assert_eq!(score_obfuscation(&ObfuscationStats::default(), &cfg()), 0.0);
    }

    #[test]
    fn entropy_reference_values() {
        assert_eq!(shannon_entropy(""), 0.0);
        assert_eq!(shannon_entropy("aaaa"), 0.0);
        assert!((shannon_entropy("abcd") - 2.0).abs() < 1e-12);
        assert!((shannon_entropy("0123456789abcdef") - 4.0).abs() < 1e-12);
    }

    #[test]
    fn hex_identifiers() {
        assert!(is_hex_identifier("_0x1a2b"));
        assert!(!is_hex_identifier("_0x"));
        assert!(!is_hex_identifier("_0xzz"));
        assert!(!is_hex_identifier("x0x1"));
    }

    #[test]
    fn packed_profile_scores_high() {
        let mut s = ObfuscationStats::default();
        for name in ["a", "b", "c", "d", "e", "f"] {
            s.add_identifier(name);
        }
        s.total_chars = 1000;
        s.whitespace_ratio = 0.01;
        s.string_entropies = vec![4.8, 4.9];
        // short: 1.0*0.35, whitespace: 1.0*0.25, entropy: 1.0*0.25
        let score = score_obfuscation(&s, &cfg());
        assert!((score - 0.85).abs() < 1e-9, "{score}");
    }
}
