//! Classical lexical-feature baseline: a point-scoring rule set and a small
//! bagged ensemble of CART trees.

use std::io::Read;
use std::net::IpAddr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::evidence::{Label, UrlRecord};
use crate::prompt::text::SUSPICIOUS_SUBSTRINGS;

const BUNDLED_TRAINING: &str = include_str!("../../assets/baseline_train.csv");

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LexicalFeatureVector {
    pub url_length: u32,
    /// Dots in the hostname.
    pub dot_count: u32,
    pub hyphen_count: u32,
    pub has_suspicious_substring: bool,
    pub subdomain_depth: u32,
    pub path_length: u32,
    pub form_count: u32,
    pub has_password_field: bool,
    /// Share of URL characters that are ASCII digits, in `[0, 1]`.
    pub digit_ratio: f64,
}

pub const FEATURE_NAMES: [&str; 9] = [
    "url_length",
    "dot_count",
    "hyphen_count",
    "has_suspicious_substring",
    "subdomain_depth",
    "path_length",
    "form_count",
    "has_password_field",
    "digit_ratio",
];

impl LexicalFeatureVector {
    pub fn as_array(&self) -> [f64; 9] {
        [
            f64::from(self.url_length),
            f64::from(self.dot_count),
            f64::from(self.hyphen_count),
            f64::from(u8::from(self.has_suspicious_substring)),
            f64::from(self.subdomain_depth),
            f64::from(self.path_length),
            f64::from(self.form_count),
            f64::from(u8::from(self.has_password_field)),
            self.digit_ratio,
        ]
    }
}

/// Undoes the usual defanging (`hxxp`, `[.]`, `[:]`) used when sharing URLs.
pub fn refang(url: &str) -> String {
    let s = url.trim().replace("[.]", ".").replace("[:]", ":").replace("(.)", ".");
    match s.get(..4) {
        Some(p) if p.eq_ignore_ascii_case("hxxp") => format!("http{}", &s[4..]),
        _ => s,
    }
}

pub fn lexical_features(url: &str, form_count: u32, has_password_field: bool, substrings: &[String]) -> Result<LexicalFeatureVector, EvalError> {
    let raw = refang(url);
    let rec = UrlRecord::parse(&raw).map_err(|e| EvalError::Baseline(e.to_string()))?;
    let host = rec.host.trim_matches(|c| c == '[' || c == ']');
    let is_ip = host.parse::<IpAddr>().is_ok();
    let chars = raw.chars().count().max(1);
    let digits = raw.chars().filter(char::is_ascii_digit).count();
    let lower = format!("{}{}", host, rec.path).to_ascii_lowercase();
    Ok(LexicalFeatureVector {
        url_length: raw.chars().count() as u32,
        dot_count: host.matches('.').count() as u32,
        hyphen_count: raw.matches('-').count() as u32,
        has_suspicious_substring: substrings.iter().any(|s| lower.contains(&s.to_ascii_lowercase())),
        subdomain_depth: if is_ip { 0 } else { host.split('.').count().saturating_sub(2) as u32 },
        path_length: rec.path.chars().count() as u32,
        form_count,
        has_password_field,
        digit_ratio: digits as f64 / chars as f64,
    })
}

/// Point-scoring fallback. Each matching condition adds its points; the URL
/// is malicious once the total reaches `malicious_at`.
///
/// | condition                      | points |
/// |--------------------------------|--------|
/// | suspicious substring           | 2      |
/// | any hyphen                     | 1      |
/// | digit ratio above 0.1          | 1      |
/// | path longer than 20            | 1      |
/// | 3 or more subdomain levels     | 1      |
/// | URL longer than 54             | 1      |
/// | password field on the page     | 1      |
/// | 4 or more dots in the hostname | 1      |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalRules {
    pub suspicious_substrings: Vec<String>,
    pub malicious_at: u32,
}

impl Default for LexicalRules {
    fn default() -> Self {
        LexicalRules { suspicious_substrings: SUSPICIOUS_SUBSTRINGS.iter().map(|s| s.to_string()).collect(), malicious_at: 4 }
    }
}

impl LexicalRules {
    pub fn score(&self, v: &LexicalFeatureVector) -> u32 {
        let checks = [
            (v.has_suspicious_substring, 2),
            (v.hyphen_count > 0, 1),
            (v.digit_ratio > 0.1, 1),
            (v.path_length > 20, 1),
            (v.subdomain_depth >= 3, 1),
            (v.url_length > 54, 1),
            (v.has_password_field, 1),
            (v.dot_count >= 4, 1),
        ];
        checks.iter().filter(|(hit, _)| *hit).map(|(_, p)| p).sum()
    }

    pub fn classify(&self, v: &LexicalFeatureVector) -> Label {
        if self.score(v) >= self.malicious_at {
            Label::Malicious
        } else {
            Label::Benign
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf { malicious: bool },
    Split { feature: usize, threshold: f64, left: Box<TreeNode>, right: Box<TreeNode> },
}

impl TreeNode {
    fn predict(&self, x: &[f64; 9]) -> bool {
        match self {
            TreeNode::Leaf { malicious } => *malicious,
            TreeNode::Split { feature, threshold, left, right } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { trees: 25, max_depth: 8, min_samples_split: 2, seed: 7 }
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn majority(rows: &[&([f64; 9], bool)]) -> bool {
    let pos = rows.iter().filter(|r| r.1).count();
    pos * 2 > rows.len()
}

/// Best (feature, threshold) by weighted Gini impurity; earlier features
/// and lower thresholds win ties.
fn best_split(rows: &[&([f64; 9], bool)]) -> Option<(usize, f64)> {
    let n = rows.len();
    let total_pos = rows.iter().filter(|r| r.1).count();
    let parent = gini(total_pos, n);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..9 {
        let mut sorted: Vec<(f64, bool)> = rows.iter().map(|r| (r.0[f], r.1)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_pos = 0;
        for i in 0..n - 1 {
            left_pos += usize::from(sorted[i].1);
            if sorted[i].0 == sorted[i + 1].0 {
                continue;
            }
            let left_n = i + 1;
            let impurity = (left_n as f64 * gini(left_pos, left_n) + (n - left_n) as f64 * gini(total_pos - left_pos, n - left_n)) / n as f64;
            if impurity < parent - 1e-12 && best.is_none_or(|b| impurity < b.0 - 1e-12) {
                best = Some((impurity, f, (sorted[i].0 + sorted[i + 1].0) / 2.0));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

fn grow(rows: &[&([f64; 9], bool)], depth: usize, p: &ForestParams) -> TreeNode {
    let pos = rows.iter().filter(|r| r.1).count();
    if depth >= p.max_depth || rows.len() < p.min_samples_split || pos == 0 || pos == rows.len() {
        return TreeNode::Leaf { malicious: majority(rows) };
    }
    let Some((feature, threshold)) = best_split(rows) else {
        return TreeNode::Leaf { malicious: majority(rows) };
    };
    let (l, r): (Vec<_>, Vec<_>) = rows.iter().partition(|row| row.0[feature] <= threshold);
    TreeNode::Split { feature, threshold, left: Box::new(grow(&l, depth + 1, p)), right: Box::new(grow(&r, depth + 1, p)) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub params: ForestParams,
    pub trees: Vec<TreeNode>,
}

impl Forest {
    /// Bootstrap-aggregated CART trees, reproducible for a fixed seed.
    pub fn fit(samples: &[(LexicalFeatureVector, Label)], params: ForestParams) -> Result<Self, EvalError> {
        if samples.is_empty() || params.trees == 0 {
            return Err(EvalError::Baseline("training needs at least one sample and one tree".into()));
        }
        let rows: Vec<([f64; 9], bool)> = samples.iter().map(|(v, l)| (v.as_array(), *l == Label::Malicious)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let trees = (0..params.trees)
            .map(|_| {
                let bag: Vec<&([f64; 9], bool)> = (0..rows.len()).map(|_| &rows[rng.random_range(0..rows.len())]).collect();
                grow(&bag, 0, &params)
            })
            .collect();
        Ok(Forest { params, trees })
    }

    pub fn predict(&self, v: &LexicalFeatureVector) -> Label {
        let x = v.as_array();
        let votes = self.trees.iter().filter(|t| t.predict(&x)).count();
        if votes * 2 > self.trees.len() {
            Label::Malicious
        } else {
            Label::Benign
        }
    }
}

#[derive(Debug, Deserialize)]
struct TrainingRow {
    url: String,
    #[serde(default)]
    form_count: u32,
    #[serde(default)]
    has_password_field: bool,
    label: Label,
}

/// Reads `url,form_count,has_password_field,label` rows.
pub fn read_training_csv(reader: impl Read, substrings: &[String]) -> Result<Vec<(LexicalFeatureVector, Label)>, EvalError> {
    let mut out = Vec::new();
    for (i, row) in csv::Reader::from_reader(reader).deserialize::<TrainingRow>().enumerate() {
        let row = row.map_err(|e| EvalError::Baseline(format!("training row {}: {e}", i + 1)))?;
        out.push((lexical_features(&row.url, row.form_count, row.has_password_field, substrings)?, row.label));
    }
    Ok(out)
}

/// A trained ensemble, a rule fallback, or both; the ensemble wins when present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BaselineModel {
    pub forest: Option<Forest>,
    pub rules: Option<LexicalRules>,
}

impl BaselineModel {
    pub fn rules_only() -> Self {
        BaselineModel { forest: None, rules: Some(LexicalRules::default()) }
    }

    /// Ensemble fit on the bundled synthetic training set, with the rule fallback.
    pub fn bundled(params: ForestParams) -> Result<Self, EvalError> {
        let rules = LexicalRules::default();
        let samples = read_training_csv(BUNDLED_TRAINING.as_bytes(), &rules.suspicious_substrings)?;
        Ok(BaselineModel { forest: Some(Forest::fit(&samples, params)?), rules: Some(rules) })
    }

    pub fn substrings(&self) -> Vec<String> {
        self.rules.clone().unwrap_or_default().suspicious_substrings
    }
}

pub fn baseline_classify(v: &LexicalFeatureVector, model: &BaselineModel) -> Result<Label, EvalError> {
    match (&model.forest, &model.rules) {
        (Some(f), _) => Ok(f.predict(v)),
        (None, Some(r)) => Ok(r.classify(v)),
        (None, None) => Err(EvalError::Baseline("model is untrained and has no rule fallback".into())),
    }
}
