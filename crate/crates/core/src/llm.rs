//! LLM completion clients with record and replay.
//!
//! Replay fixtures are a directory of `<sha256(prompt) hex>.txt` files, one
//! response per prompt.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("no recorded response for prompt digest {digest} in {dir}")]
    MissingReplay { digest: String, dir: PathBuf },
    #[error("response sequence exhausted")]
    Exhausted,
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid response sequence file {path}: {source}")]
    Sequence {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("LLM endpoint not configured: {0} is unset")]
    NotConfigured(&'static str),
    #[error("LLM request failed: {0}")]
    Http(String),
    #[error("malformed LLM response: {0}")]
    Response(String),
}

impl LlmError {
    /// Whether retrying the same prompt can succeed.
    pub fn is_transient(&self) -> bool {
        matches!(self, LlmError::Http(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

pub trait LlmClient {
    fn complete(&mut self, prompt: &str, settings: &GenerationSettings) -> Result<String, LlmError>;
}

impl<C: LlmClient + ?Sized> LlmClient for Box<C> {
    fn complete(&mut self, prompt: &str, settings: &GenerationSettings) -> Result<String, LlmError> {
        (**self).complete(prompt, settings)
    }
}

/// Lowercase hex SHA-256 of the prompt bytes.
pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

fn normalize_newlines(s: String) -> String {
    if s.contains('\r') {
        s.replace("\r\n", "\n")
    } else {
        s
    }
}

/// Serves responses from a fixture directory keyed by prompt digest.
#[derive(Debug, Clone)]
pub struct ReplayClient {
    dir: PathBuf,
}

impl ReplayClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, prompt: &str) -> PathBuf {
        self.dir.join(format!("{}.txt", prompt_digest(prompt)))
    }
}

impl LlmClient for ReplayClient {
    fn complete(&mut self, prompt: &str, _: &GenerationSettings) -> Result<String, LlmError> {
        let path = self.path_for(prompt);
        match std::fs::read_to_string(&path) {
            Ok(s) => Ok(normalize_newlines(s)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(LlmError::MissingReplay {
                digest: prompt_digest(prompt),
                dir: self.dir.clone(),
            }),
            Err(source) => Err(LlmError::Io { path, source }),
        }
    }
}

/// Returns canned responses in order, ignoring the prompt.
#[derive(Debug, Clone, Default)]
pub struct SequenceClient {
    responses: VecDeque<String>,
}

impl SequenceClient {
    pub fn new(responses: impl IntoIterator<Item = String>) -> Self {
        Self {
            responses: responses.into_iter().collect(),
        }
    }

    /// Loads a JSON array of response strings.
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|source| LlmError::Io {
            path: path.into(),
            source,
        })?;
        let responses: Vec<String> = serde_json::from_str(&text).map_err(|source| LlmError::Sequence {
            path: path.into(),
            source,
        })?;
        Ok(Self::new(responses))
    }

    pub fn remaining(&self) -> usize {
        self.responses.len()
    }
}

impl LlmClient for SequenceClient {
    fn complete(&mut self, _: &str, _: &GenerationSettings) -> Result<String, LlmError> {
        self.responses.pop_front().ok_or(LlmError::Exhausted)
    }
}

/// Forwards to `inner` and writes every response into a replay directory.
#[derive(Debug)]
pub struct RecordingClient<C> {
    inner: C,
    dir: PathBuf,
}

impl<C: LlmClient> RecordingClient<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        Self { inner, dir: dir.into() }
    }

    pub fn into_inner(self) -> C {
        self.inner
    }
}

impl<C: LlmClient> LlmClient for RecordingClient<C> {
    fn complete(&mut self, prompt: &str, settings: &GenerationSettings) -> Result<String, LlmError> {
        let response = self.inner.complete(prompt, settings)?;
        std::fs::create_dir_all(&self.dir).map_err(|source| LlmError::Io {
            path: self.dir.clone(),
            source,
        })?;
        let path = self.dir.join(format!("{}.txt", prompt_digest(prompt)));
        std::fs::write(&path, &response).map_err(|source| LlmError::Io { path, source })?;
        Ok(response)
    }
}

pub const ENV_LLM_ENDPOINT: &str = "SKILLGRAPH_LLM_ENDPOINT";
pub const ENV_LLM_API_KEY: &str = "SKILLGRAPH_LLM_API_KEY";
pub const ENV_LLM_MODEL: &str = "SKILLGRAPH_LLM_MODEL";

/// Client for an OpenAI-compatible chat-completions endpoint.
#[derive(Debug, Clone)]
pub struct HttpClient {
    endpoint: String,
    api_key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(endpoint: String, api_key: Option<String>, model: String) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(300)).build();
        Self {
            endpoint,
            api_key,
            model,
            agent,
        }
    }

    pub fn from_env() -> Result<Self, LlmError> {
        let endpoint = std::env::var(ENV_LLM_ENDPOINT).map_err(|_| LlmError::NotConfigured(ENV_LLM_ENDPOINT))?;
        let model = std::env::var(ENV_LLM_MODEL).map_err(|_| LlmError::NotConfigured(ENV_LLM_MODEL))?;
        Ok(Self::new(endpoint, std::env::var(ENV_LLM_API_KEY).ok(), model))
    }
}

impl LlmClient for HttpClient {
    fn complete(&mut self, prompt: &str, settings: &GenerationSettings) -> Result<String, LlmError> {
        let mut body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = settings.temperature {
            body["temperature"] = json!(t);
        }
        if let Some(m) = settings.max_tokens {
            body["max_tokens"] = json!(m);
        }
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let reply: Value = req
            .send_json(body)
            .map_err(|e| LlmError::Http(e.to_string()))?
            .into_json()
            .map_err(|e| LlmError::Response(e.to_string()))?;
        reply["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| LlmError::Response("missing choices[0].message.content".into()))
    }
}
