//! Confusion-matrix metrics for the malicious (positive) class.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::evidence::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Malicious, Label::Malicious) => self.tp += 1,
            (Label::Benign, Label::Malicious) => self.fp += 1,
            (Label::Benign, Label::Benign) => self.tn += 1,
            (Label::Malicious, Label::Benign) => self.fn_ += 1,
        }
    }

    /// Counts for a sequence of (truth, prediction) pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        pairs.into_iter().fold(ConfusionCounts::default(), |mut c, (t, p)| {
            c.record(t, p);
            c
        })
    }
}

/// Unrounded metrics. `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(c: ConfusionCounts) -> Metrics {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Metrics { accuracy: ratio(c.tp + c.tn, c.total()), precision, recall, f1 }
}

/// Two decimals, e.g. `0.90`; `undefined` for a missing value.
pub fn fmt_ratio(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.2}"))
}

/// Percent with up to two decimals, e.g. `92%` or `91.5%`.
pub fn fmt_percent(v: Option<f64>) -> String {
    match v {
        None => "undefined".to_string(),
        Some(x) => {
            let s = format!("{:.2}", x * 100.0);
            format!("{}%", s.trim_end_matches('0').trim_end_matches('.'))
        }
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "accuracy {}, precision {}, recall {}, F1 {}",
            fmt_percent(self.accuracy),
            fmt_ratio(self.precision),
            fmt_ratio(self.recall),
            fmt_ratio(self.f1)
        )
    }
}
