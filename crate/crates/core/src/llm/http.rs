//! Minimal completion protocol for local inference servers.
//!
//! Request, `POST <endpoint>` with a JSON body:
//!
//! ```json
//! {"model": "...", "system": "...", "prompt": "...", "max_tokens": 1024, "temperature": 0.0, "seed": 7}
//! ```
//!
//! Response: `{"text": "..."}`. Any other server can be adapted with a thin
//! proxy translating to and from these two shapes.
//!
//! Requests to the same endpoint are served strictly in arrival order.

use std::collections::HashMap;
use std::io::Read;
use std::sync::{Arc, Condvar, Mutex, OnceLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{BackendDescriptor, LlmError};
use crate::prompt::RenderedPrompt;

#[derive(Debug, Serialize)]
pub struct CompletionRequest<'a> {
    pub model: &'a str,
    pub system: &'a str,
    pub prompt: &'a str,
    pub max_tokens: usize,
    pub temperature: f64,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    text: String,
}

#[derive(Default)]
struct Gate {
    state: Mutex<(u64, u64)>,
    turn: Condvar,
}

/// Holds the endpoint's turn until dropped.
struct Turn(Arc<Gate>);

impl Gate {
    fn enter(self: &Arc<Self>) -> Turn {
        let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let ticket = st.0;
        st.0 += 1;
        while st.1 != ticket {
            st = self.turn.wait(st).unwrap_or_else(|e| e.into_inner());
        }
        Turn(self.clone())
    }
}

impl Drop for Turn {
    fn drop(&mut self) {
        let mut st = self.0.state.lock().unwrap_or_else(|e| e.into_inner());
        st.1 += 1;
        self.0.turn.notify_all();
    }
}

fn gate(endpoint: &str) -> Arc<Gate> {
    static GATES: OnceLock<Mutex<HashMap<String, Arc<Gate>>>> = OnceLock::new();
    let mut map = GATES.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    map.entry(endpoint.to_string()).or_default().clone()
}

pub fn generate_http(prompt: &RenderedPrompt, desc: &BackendDescriptor) -> Result<String, LlmError> {
    let endpoint = desc.endpoint.as_deref().ok_or_else(|| LlmError::Config("http_local backend requires an endpoint".into()))?;
    let request = CompletionRequest {
        model: &desc.model_name,
        system: &prompt.system_preamble,
        prompt: &prompt.body,
        max_tokens: desc.max_tokens,
        temperature: desc.temperature,
        seed: desc.seed,
    };
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(desc.timeout_ms.max(1))))
        .http_status_as_error(false)
        .build()
        .into();
    let _turn = gate(endpoint).enter();
    let started = Instant::now();
    let elapsed = || started.elapsed().as_millis() as u64;
    let mut resp = agent.post(endpoint).send_json(&request).map_err(|e| match e {
        ureq::Error::Timeout(_) => LlmError::Timeout { elapsed_ms: elapsed() },
        other => LlmError::Connect { endpoint: endpoint.to_string(), message: other.to_string() },
    })?;
    let status = resp.status().as_u16();
    let mut body = Vec::new();
    resp.body_mut().as_reader().read_to_end(&mut body).map_err(|e| match e.kind() {
        std::io::ErrorKind::TimedOut => LlmError::Timeout { elapsed_ms: elapsed() },
        _ => LlmError::MidStream { endpoint: endpoint.to_string(), message: e.to_string() },
    })?;
    let body = String::from_utf8_lossy(&body).into_owned();
    if !(200..300).contains(&status) {
        return Err(LlmError::Status { status, body });
    }
    let parsed: CompletionResponse = serde_json::from_str(&body).map_err(|e| LlmError::BadResponse(format!("expected {{\"text\": ...}}: {e}")))?;
    Ok(parsed.text)
}
