//! Text embeddings for neighbor lookup.

use std::hash::Hasher;
use std::time::Duration;

use fnv::FnvHasher;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding endpoint not configured: {0} is unset")]
    NotConfigured(&'static str),
    #[error("embedding request failed: {0}")]
    Http(String),
    #[error("malformed embedding response: {0}")]
    Response(String),
    #[error("embedding has dimension {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Maps text to a fixed-dimension vector. Identical text must map to an
/// identical vector.
pub trait EmbeddingProvider {
    /// Stable identifier recorded in the library sidecar.
    fn id(&self) -> String;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbeddingError>;
}

/// Deterministic fallback: lowercase character trigrams hashed (FNV-1a
/// 64) into `dimension` buckets, then L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalEmbedder {
    dimension: usize,
}

pub const LOCAL_DIMENSION: usize = 256;

impl Default for LocalEmbedder {
    fn default() -> Self {
        Self { dimension: LOCAL_DIMENSION }
    }
}

impl LocalEmbedder {
    pub fn with_dimension(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self { dimension }
    }

    fn bucket(&self, gram: &str) -> usize {
        let mut h = FnvHasher::default();
        h.write(gram.as_bytes());
        (h.finish() % self.dimension as u64) as usize
    }

    pub fn vector(&self, text: &str) -> Vec<f64> {
        let chars: Vec<char> = text.to_lowercase().chars().collect();
        let mut v = vec![0.0; self.dimension];
        if chars.is_empty() {
            return v;
        }
        if chars.len() < 3 {
            v[self.bucket(&chars.iter().collect::<String>())] += 1.0;
        } else {
            for w in chars.windows(3) {
                v[self.bucket(&w.iter().collect::<String>())] += 1.0;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}

impl EmbeddingProvider for LocalEmbedder {
    fn id(&self) -> String {
        format!("local-trigram-fnv1a-{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbeddingError> {
        Ok(self.vector(text))
    }
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub const ENV_EMBED_ENDPOINT: &str = "SKILLGRAPH_EMBED_ENDPOINT";
pub const ENV_EMBED_API_KEY: &str = "SKILLGRAPH_EMBED_API_KEY";
pub const ENV_EMBED_MODEL: &str = "SKILLGRAPH_EMBED_MODEL";
pub const ENV_EMBED_DIMENSION: &str = "SKILLGRAPH_EMBED_DIMENSION";

/// Client for an OpenAI-compatible `/embeddings` endpoint.
#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    endpoint: String,
    api_key: Option<String>,
    model: String,
    dimension: usize,
    agent: ureq::Agent,
}

impl HttpEmbedder {
    pub fn new(endpoint: String, api_key: Option<String>, model: String, dimension: usize) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(60)).build();
        Self {
            endpoint,
            api_key,
            model,
            dimension,
            agent,
        }
    }

    pub fn from_env() -> Result<Self, EmbeddingError> {
        let endpoint = std::env::var(ENV_EMBED_ENDPOINT).map_err(|_| EmbeddingError::NotConfigured(ENV_EMBED_ENDPOINT))?;
        let model = std::env::var(ENV_EMBED_MODEL).unwrap_or_else(|_| "text-embedding-3-small".into());
        let dimension = std::env::var(ENV_EMBED_DIMENSION)
            .ok()
            .and_then(|d| d.parse().ok())
            .unwrap_or(1536);
        Ok(Self::new(endpoint, std::env::var(ENV_EMBED_API_KEY).ok(), model, dimension))
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn id(&self) -> String {
        format!("http:{}", self.model)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbeddingError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let body: Value = req
            .send_json(json!({"model": self.model, "input": text}))
            .map_err(|e| EmbeddingError::Http(e.to_string()))?
            .into_json()
            .map_err(|e| EmbeddingError::Response(e.to_string()))?;
        let v: Vec<f64> = body["data"][0]["embedding"]
            .as_array()
            .ok_or_else(|| EmbeddingError::Response("missing data[0].embedding".into()))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| EmbeddingError::Response("non-numeric component".into())))
            .collect::<Result<_, _>>()?;
        if v.len() != self.dimension {
            return Err(EmbeddingError::Dimension {
                got: v.len(),
                expected: self.dimension,
            });
        }
        Ok(v)
    }
}
