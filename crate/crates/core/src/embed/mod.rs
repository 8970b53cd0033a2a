//! Embedding providers.
//!
//! [`Provider`] is the entry point: it validates inputs, prepends the
//! instruction, consults the [`EmbeddingCache`] and delegates misses to one
//! of three backends (OpenAI-compatible HTTP, a precomputed JSONL store, or
//! the deterministic [`mock_embed`]).

mod cache;
mod file;
mod http;
mod mock;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

pub use cache::{text_digest, EmbeddingCache};
pub use file::{FileBackend, FileRecord};
pub use http::{parse_embeddings_response, HttpBackend};
pub use mock::mock_embed;

use crate::error::{Error, Result};
use crate::types::EmbeddingVector;

/// Environment variable holding the bearer token for HTTP providers.
pub const API_KEY_ENV: &str = "SEMTK_API_KEY";

/// Anything that turns texts into vectors of one embedding space.
pub trait Embedder: Send + Sync {
    fn provider_id(&self) -> &str;

    fn instruction(&self) -> &str;

    /// One vector per input, in input order.
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>>;

    fn embed_one(&self, text: &str) -> Result<EmbeddingVector> {
        self.embed_batch(&[text])?
            .pop()
            .ok_or_else(|| Error::Protocol("provider returned no vector".into()))
    }
}

impl<T: Embedder + ?Sized> Embedder for &T {
    fn provider_id(&self) -> &str {
        (**self).provider_id()
    }
    fn instruction(&self) -> &str {
        (**self).instruction()
    }
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        (**self).embed_batch(texts)
    }
}

impl<T: Embedder + ?Sized> Embedder for Arc<T> {
    fn provider_id(&self) -> &str {
        (**self).provider_id()
    }
    fn instruction(&self) -> &str {
        (**self).instruction()
    }
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        (**self).embed_batch(texts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Http,
    File,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingProviderConfig {
    pub kind: ProviderKind,
    #[serde(default)]
    pub endpoint_url: Option<String>,
    pub model_id: String,
    #[serde(default)]
    pub instruction: String,
    pub max_in_flight: usize,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
    /// Inputs per HTTP request.
    pub batch_size: usize,
    pub retry_attempts: u32,
    #[serde(with = "duration_secs")]
    pub retry_backoff: Duration,
    /// JSONL store for the file provider.
    #[serde(default)]
    pub file_path: Option<PathBuf>,
    pub mock_dim: usize,
    pub mock_seed: u64,
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
}

impl Default for EmbeddingProviderConfig {
    fn default() -> Self {
        EmbeddingProviderConfig {
            kind: ProviderKind::Mock,
            endpoint_url: None,
            model_id: "mock".into(),
            instruction: String::new(),
            max_in_flight: 4,
            timeout: Duration::from_secs(60),
            batch_size: 64,
            retry_attempts: 3,
            retry_backoff: Duration::from_millis(500),
            file_path: None,
            mock_dim: 64,
            mock_seed: 0,
            cache_path: None,
        }
    }
}

impl EmbeddingProviderConfig {
    pub fn mock(dim: usize, seed: u64) -> Self {
        EmbeddingProviderConfig {
            mock_dim: dim,
            mock_seed: seed,
            ..Default::default()
        }
    }

    pub fn http(endpoint_url: impl Into<String>, model_id: impl Into<String>) -> Self {
        EmbeddingProviderConfig {
            kind: ProviderKind::Http,
            endpoint_url: Some(endpoint_url.into()),
            model_id: model_id.into(),
            ..Default::default()
        }
    }

    pub fn file(path: impl Into<PathBuf>, model_id: impl Into<String>) -> Self {
        EmbeddingProviderConfig {
            kind: ProviderKind::File,
            file_path: Some(path.into()),
            model_id: model_id.into(),
            ..Default::default()
        }
    }

    pub fn with_instruction(mut self, instruction: impl Into<String>) -> Self {
        self.instruction = instruction.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_in_flight == 0 {
            return Err(Error::invalid("max_in_flight must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if self.retry_attempts == 0 {
            return Err(Error::invalid("retry_attempts must be at least 1"));
        }
        match self.kind {
            ProviderKind::Http if self.endpoint_url.as_deref().unwrap_or("").is_empty() => {
                Err(Error::invalid("http provider requires endpoint_url"))
            }
            ProviderKind::File if self.file_path.is_none() => {
                Err(Error::invalid("file provider requires file_path"))
            }
            ProviderKind::Mock if self.mock_dim < 2 => {
                Err(Error::invalid("mock provider requires dim >= 2"))
            }
            _ => Ok(()),
        }
    }

    /// Identifier stamped on every vector this configuration produces.
    pub fn provider_id(&self) -> String {
        match self.kind {
            ProviderKind::Mock => format!("{}-d{}-s{}", self.model_id, self.mock_dim, self.mock_seed),
            _ => self.model_id.clone(),
        }
    }
}

/// `instruction + " " + text`, or `text` alone when the instruction is empty.
pub fn apply_instruction(instruction: &str, text: &str) -> String {
    if instruction.is_empty() {
        text.to_string()
    } else {
        format!("{instruction} {text}")
    }
}

/// Input handed to a backend: the raw text and the instruction-prefixed prompt.
#[derive(Debug, Clone)]
pub struct PreparedInput<'a> {
    pub text: &'a str,
    pub prompt: String,
}

/// Source of raw vectors for cache misses.
pub trait Backend: Send + Sync {
    fn fetch(&self, inputs: &[PreparedInput<'_>]) -> Result<Vec<Vec<f64>>>;
}

struct MockBackend {
    dim: usize,
    seed: u64,
}

impl Backend for MockBackend {
    fn fetch(&self, inputs: &[PreparedInput<'_>]) -> Result<Vec<Vec<f64>>> {
        Ok(inputs
            .iter()
            .map(|i| mock_embed(&i.prompt, self.dim, self.seed).into_values())
            .collect())
    }
}

/// A configured embedding provider with write-through caching.
pub struct Provider {
    provider_id: String,
    instruction: String,
    backend: Box<dyn Backend>,
    cache: Arc<EmbeddingCache>,
    dim: Mutex<Option<usize>>,
}

impl Provider {
    pub fn from_config(cfg: &EmbeddingProviderConfig) -> Result<Self> {
        cfg.validate()?;
        let backend: Box<dyn Backend> = match cfg.kind {
            ProviderKind::Http => Box::new(HttpBackend::new(cfg)?),
            ProviderKind::File => {
                let path = cfg.file_path.as_ref().expect("validated");
                Box::new(FileBackend::load(path, &cfg.model_id, &cfg.instruction)?)
            }
            ProviderKind::Mock => Box::new(MockBackend {
                dim: cfg.mock_dim,
                seed: cfg.mock_seed,
            }),
        };
        let cache = match &cfg.cache_path {
            Some(p) => EmbeddingCache::open(p)?,
            None => EmbeddingCache::in_memory(),
        };
        Ok(Self::with_backend(
            cfg.provider_id(),
            cfg.instruction.clone(),
            backend,
            Arc::new(cache),
        ))
    }

    pub fn with_backend(
        provider_id: impl Into<String>,
        instruction: impl Into<String>,
        backend: Box<dyn Backend>,
        cache: Arc<EmbeddingCache>,
    ) -> Self {
        Provider {
            provider_id: provider_id.into(),
            instruction: instruction.into(),
            backend,
            cache,
            dim: Mutex::new(None),
        }
    }

    pub fn cache(&self) -> &EmbeddingCache {
        &self.cache
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        let mut dim = self.dim.lock();
        match *dim {
            Some(d) if d != got => Err(Error::DimensionMismatch { left: d, right: got }),
            Some(_) => Ok(()),
            None => {
                *dim = Some(got);
                Ok(())
            }
        }
    }
}

impl Embedder for Provider {
    fn provider_id(&self) -> &str {
        &self.provider_id
    }

    fn instruction(&self) -> &str {
        &self.instruction
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        if texts.is_empty() {
            return Err(Error::invalid("embed_batch needs at least one text"));
        }
        if let Some(i) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(Error::invalid(format!("empty text at position {i}")));
        }

        let mut out: Vec<Option<EmbeddingVector>> = texts
            .iter()
            .map(|t| self.cache.get(&self.provider_id, &self.instruction, t))
            .collect();

        // Deduplicate misses so repeated texts cost one lookup.
        let mut miss_texts: Vec<&str> = Vec::new();
        for (slot, t) in out.iter().zip(texts) {
            if slot.is_none() && !miss_texts.contains(t) {
                miss_texts.push(t);
            }
        }

        if !miss_texts.is_empty() {
            let inputs: Vec<PreparedInput<'_>> = miss_texts
                .iter()
                .map(|t| PreparedInput {
                    text: t,
                    prompt: apply_instruction(&self.instruction, t),
                })
                .collect();
            let raw = self.backend.fetch(&inputs)?;
            if raw.len() != inputs.len() {
                return Err(Error::Protocol(format!(
                    "expected {} vectors, got {}",
                    inputs.len(),
                    raw.len()
                )));
            }
            for (text, values) in miss_texts.iter().zip(raw) {
                self.check_dim(values.len())?;
                let v = EmbeddingVector::new(values, self.provider_id.clone(), self.instruction.clone())?;
                self.cache.put(&self.provider_id, &self.instruction, text, &v)?;
            }
            for (slot, t) in out.iter_mut().zip(texts) {
                if slot.is_none() {
                    *slot = self.cache.get(&self.provider_id, &self.instruction, t);
                }
            }
        }

        let out: Vec<EmbeddingVector> = out
            .into_iter()
            .map(|v| v.ok_or_else(|| Error::Protocol("cache write lost a vector".into())))
            .collect::<Result<_>>()?;
        for v in &out {
            self.check_dim(v.dim())?;
        }
        Ok(out)
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64(secs.max(0.0)))
    }
}
