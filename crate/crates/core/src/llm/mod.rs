//! Inference backends and verdict parsing.

mod http;
pub mod mock;
pub mod verdict;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::{FieldViolation, RenderedPrompt};

pub use http::CompletionRequest;
pub use mock::{mock_generate, MockRule, MockRuleSet};
pub use verdict::{parse_verdict, VerdictDocument};

/// Environment variable holding the default `http_local` endpoint.
pub const ENDPOINT_ENV: &str = "URLSCOPE_ENDPOINT";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("backend timed out after {elapsed_ms} ms")]
    Timeout { elapsed_ms: u64 },
    #[error("cannot reach {endpoint}: {message}")]
    Connect { endpoint: String, message: String },
    #[error("connection to {endpoint} broke mid-response: {message}")]
    MidStream { endpoint: String, message: String },
    #[error("backend answered HTTP {status}")]
    Status { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    BadResponse(String),
    #[error("model output is not JSON: {message}")]
    Parse { raw_text: String, message: String },
    #[error("model output violates the schema: {}", fields.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "))]
    Validation { raw_text: String, fields: Vec<FieldViolation> },
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("mock rules: {0}")]
    Rules(String),
}

impl LlmError {
    /// Worth retrying unchanged: the request may succeed on a second attempt.
    pub fn is_retriable(&self) -> bool {
        matches!(self, LlmError::Timeout { .. } | LlmError::MidStream { .. }) || matches!(self, LlmError::Status { status, .. } if *status >= 500)
    }

    pub fn raw_text(&self) -> Option<&str> {
        match self {
            LlmError::Parse { raw_text, .. } | LlmError::Validation { raw_text, .. } => Some(raw_text),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    HttpLocal,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    pub model_name: String,
    pub max_tokens: usize,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub seed: u64,
    pub timeout_ms: u64,
    /// Rule table for the mock backend; the bundled table when absent.
    #[serde(default)]
    pub mock_rules: Option<PathBuf>,
}

pub const DEFAULT_MAX_TOKENS: usize = 1024;
pub const DEFAULT_TIMEOUT_MS: u64 = 120_000;

impl BackendDescriptor {
    pub fn mock() -> Self {
        BackendDescriptor {
            kind: BackendKind::Mock,
            endpoint: None,
            model_name: "mock-rules".into(),
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: 0.0,
            seed: 0,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            mock_rules: None,
        }
    }

    pub fn http_local(endpoint: &str, model_name: &str) -> Self {
        BackendDescriptor { kind: BackendKind::HttpLocal, endpoint: Some(endpoint.to_string()), model_name: model_name.to_string(), ..Self::mock() }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.kind == BackendKind::HttpLocal && self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err(LlmError::Config("http_local backend requires an endpoint".into()));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::Config("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

/// A ready backend: descriptor plus, for the mock, its loaded rule table.
#[derive(Debug, Clone)]
pub struct Backend {
    pub descriptor: BackendDescriptor,
    rules: Option<MockRuleSet>,
}

impl Backend {
    pub fn new(descriptor: BackendDescriptor) -> Result<Self, LlmError> {
        descriptor.validate()?;
        let rules = match (descriptor.kind, &descriptor.mock_rules) {
            (BackendKind::Mock, Some(p)) => Some(MockRuleSet::load(p)?),
            (BackendKind::Mock, None) => Some(MockRuleSet::default()),
            (BackendKind::HttpLocal, _) => None,
        };
        Ok(Backend { descriptor, rules })
    }

    pub fn with_rules(rules: MockRuleSet) -> Self {
        Backend { descriptor: BackendDescriptor::mock(), rules: Some(rules) }
    }

    /// Raw model text, cut to the descriptor's token allowance.
    pub fn generate(&self, prompt: &RenderedPrompt) -> Result<String, LlmError> {
        let text = match &self.rules {
            Some(rules) => mock_generate(prompt, rules)?,
            None => http::generate_http(prompt, &self.descriptor)?,
        };
        Ok(cap_chars(text, self.descriptor.max_tokens))
    }

    /// Generates and parses against the prompt kind's schema.
    pub fn verdict(&self, prompt: &RenderedPrompt) -> Result<VerdictDocument, LlmError> {
        parse_verdict(&self.generate(prompt)?, &prompt.kind.schema())
    }
}

/// Keeps at most `3.5 * max_tokens` characters, so the default estimator
/// never counts more than `max_tokens`.
fn cap_chars(text: String, max_tokens: usize) -> String {
    let limit = max_tokens * 7 / 2;
    match text.char_indices().nth(limit) {
        Some((i, _)) => text[..i].to_string(),
        None => text,
    }
}

pub fn generate(prompt: &RenderedPrompt, backend: &BackendDescriptor) -> Result<String, LlmError> {
    Backend::new(backend.clone())?.generate(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::estimate_tokens;

    #[test]
    fn http_needs_endpoint() {
        let mut d = BackendDescriptor::http_local("", "m");
        assert!(matches!(d.validate(), Err(LlmError::Config(_))));
        d.endpoint = Some("http://127.0.0.1:1/".into());
        assert!(d.validate().is_ok());
    }

    #[test]
    fn output_is_capped_to_max_tokens() {
        let t = cap_chars("x".repeat(1000), 10);
        assert_eq!(t.len(), 35);
        assert!(estimate_tokens(&t) <= 10);
    }

    #[test]
    fn retriable_errors() {
        assert!(LlmError::Timeout { elapsed_ms: 5 }.is_retriable());
        assert!(!LlmError::Connect { endpoint: "e".into(), message: "m".into() }.is_retriable());
        assert!(LlmError::Status { status: 503, body: String::new() }.is_retriable());
    }
}
