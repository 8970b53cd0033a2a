use std::sync::atomic::{AtomicUsize, Ordering};

use parking_lot::Mutex;
use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::{Backend, EmbeddingProviderConfig, PreparedInput, API_KEY_ENV};
use crate::error::{Error, Result};
use crate::transport::{self, RetryPolicy};

#[derive(Serialize)]
struct EmbeddingsRequest<'a> {
    model: &'a str,
    input: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
    #[serde(default)]
    index: Option<usize>,
}

/// Parse an OpenAI-compatible `/v1/embeddings` response body.
///
/// Items are reordered by their `index` field when present.
pub fn parse_embeddings_response(body: &str, expected: usize) -> Result<Vec<Vec<f64>>> {
    let resp: EmbeddingsResponse =
        serde_json::from_str(body).map_err(|e| Error::Protocol(format!("embeddings body: {e}")))?;
    if resp.data.len() != expected {
        return Err(Error::Protocol(format!(
            "expected {expected} embeddings, got {}",
            resp.data.len()
        )));
    }
    let mut slots: Vec<Option<Vec<f64>>> = vec![None; expected];
    for (pos, d) in resp.data.into_iter().enumerate() {
        let i = d.index.unwrap_or(pos);
        if i >= expected || slots[i].is_some() {
            return Err(Error::Protocol(format!("bad or duplicate index {i}")));
        }
        slots[i] = Some(d.embedding);
    }
    let out: Vec<Vec<f64>> = slots.into_iter().map(|s| s.expect("filled")).collect();
    if let Some(first) = out.first() {
        if let Some(bad) = out.iter().find(|v| v.len() != first.len()) {
            return Err(Error::DimensionMismatch {
                left: first.len(),
                right: bad.len(),
            });
        }
    }
    Ok(out)
}

/// Client for OpenAI-compatible embedding endpoints.
///
/// Inputs are split into chunks of `batch_size`; up to `max_in_flight`
/// chunks are posted concurrently.
pub struct HttpBackend {
    client: Client,
    url: String,
    model: String,
    api_key: Option<String>,
    batch_size: usize,
    max_in_flight: usize,
    retry: RetryPolicy,
}

impl HttpBackend {
    pub fn new(cfg: &EmbeddingProviderConfig) -> Result<Self> {
        let base = cfg
            .endpoint_url
            .as_deref()
            .ok_or_else(|| Error::invalid("http provider requires endpoint_url"))?;
        Ok(HttpBackend {
            client: transport::build_client(cfg.timeout)?,
            url: transport::resolve_endpoint(base, "embeddings"),
            model: cfg.model_id.clone(),
            api_key: transport::api_key_from_env(API_KEY_ENV),
            batch_size: cfg.batch_size.max(1),
            max_in_flight: cfg.max_in_flight.max(1),
            retry: RetryPolicy {
                attempts: cfg.retry_attempts,
                backoff: cfg.retry_backoff,
            },
        })
    }

    fn post_chunk(&self, prompts: Vec<&str>) -> Result<Vec<Vec<f64>>> {
        let n = prompts.len();
        let body = EmbeddingsRequest {
            model: &self.model,
            input: prompts,
        };
        let text = transport::post_json(&self.client, &self.url, self.api_key.as_deref(), &body, self.retry)?;
        parse_embeddings_response(&text, n)
    }
}

impl Backend for HttpBackend {
    fn fetch(&self, inputs: &[PreparedInput<'_>]) -> Result<Vec<Vec<f64>>> {
        let chunks: Vec<&[PreparedInput<'_>]> = inputs.chunks(self.batch_size).collect();
        let results: Vec<Mutex<Option<Result<Vec<Vec<f64>>>>>> =
            chunks.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.max_in_flight.min(chunks.len());

        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= chunks.len() {
                        break;
                    }
                    let prompts = chunks[i].iter().map(|p| p.prompt.as_str()).collect();
                    *results[i].lock() = Some(self.post_chunk(prompts));
                });
            }
        });

        let mut out = Vec::with_capacity(inputs.len());
        for r in results {
            out.extend(r.into_inner().expect("every chunk processed")?);
        }
        Ok(out)
    }
}
