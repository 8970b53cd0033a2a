//! Blocking JSON POST with bounded retries, shared by the HTTP providers.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    /// Delay before the second attempt; doubles after each failure.
    pub backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

/// Append the OpenAI-style route to a base URL unless it is already present.
///
/// `http://host` and `http://host/v1` both resolve to `http://host/v1/<route>`.
pub fn resolve_endpoint(base: &str, route: &str) -> String {
    let base = base.trim_end_matches('/');
    if base.ends_with(route) {
        base.to_string()
    } else if base.ends_with("/v1") {
        format!("{base}/{route}")
    } else {
        format!("{base}/v1/{route}")
    }
}

pub fn build_client(timeout: Duration) -> Result<Client> {
    Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| Error::Transport {
            attempts: 0,
            message: e.to_string(),
        })
}

fn retryable(status: StatusCode) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error()
}

/// POST `body` as JSON and return the response text of the first 2xx reply.
pub fn post_json<B: Serialize>(
    client: &Client,
    url: &str,
    api_key: Option<&str>,
    body: &B,
    policy: RetryPolicy,
) -> Result<String> {
    let attempts = policy.attempts.max(1);
    let mut delay = policy.backoff;
    let mut last_error = String::new();
    for attempt in 1..=attempts {
        let mut req = client.post(url).json(body);
        if let Some(key) = api_key {
            req = req.bearer_auth(key);
        }
        match req.send() {
            Ok(resp) => {
                let status = resp.status();
                let text = resp.text().unwrap_or_default();
                if status.is_success() {
                    return Ok(text);
                }
                last_error = format!("HTTP {status}: {}", truncate(&text, 300));
                if !retryable(status) {
                    return Err(Error::Transport {
                        attempts: attempt,
                        message: last_error,
                    });
                }
            }
            Err(e) => last_error = e.to_string(),
        }
        if attempt < attempts {
            log::warn!("POST {url} failed (attempt {attempt}/{attempts}): {last_error}");
            std::thread::sleep(delay);
            delay *= 2;
        }
    }
    Err(Error::Transport {
        attempts,
        message: last_error,
    })
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

pub fn api_key_from_env(var: &str) -> Option<String> {
    std::env::var(var).ok().filter(|k| !k.trim().is_empty())
}
