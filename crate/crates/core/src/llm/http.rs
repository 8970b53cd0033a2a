use std::time::Duration;

use parking_lot::{Condvar, Mutex};
use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::{ensure_messages, ChatMessage, ChatModel, ChatRequest};
use crate::embed::API_KEY_ENV;
use crate::error::{Error, Result};
use crate::transport::{self, RetryPolicy};

#[derive(Debug, Clone)]
pub struct ChatConfig {
    pub endpoint_url: String,
    pub model_id: String,
    pub timeout: Duration,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
}

impl ChatConfig {
    pub fn new(endpoint_url: impl Into<String>, model_id: impl Into<String>) -> Self {
        ChatConfig {
            endpoint_url: endpoint_url.into(),
            model_id: model_id.into(),
            timeout: Duration::from_secs(120),
            max_in_flight: 4,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Extract the first choice's message content from a
/// `/v1/chat/completions` response body.
pub fn parse_chat_response(body: &str) -> Result<String> {
    let resp: WireResponse =
        serde_json::from_str(body).map_err(|e| Error::Protocol(format!("chat body: {e}")))?;
    resp.choices
        .into_iter()
        .next()
        .map(|c| c.message.content.unwrap_or_default())
        .ok_or_else(|| Error::Protocol("chat response has no choices".into()))
}

/// Counting semaphore bounding concurrent requests.
struct InFlight {
    used: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl InFlight {
    fn acquire(&self) -> InFlightGuard<'_> {
        let mut used = self.used.lock();
        while *used >= self.limit {
            self.freed.wait(&mut used);
        }
        *used += 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.used.lock() -= 1;
        self.0.freed.notify_one();
    }
}

/// OpenAI-compatible chat client.
pub struct HttpChat {
    client: Client,
    url: String,
    model_id: String,
    api_key: Option<String>,
    retry: RetryPolicy,
    in_flight: InFlight,
}

impl HttpChat {
    pub fn new(cfg: &ChatConfig) -> Result<Self> {
        if cfg.endpoint_url.trim().is_empty() {
            return Err(Error::invalid("chat endpoint_url is empty"));
        }
        Ok(HttpChat {
            client: transport::build_client(cfg.timeout)?,
            url: transport::resolve_endpoint(&cfg.endpoint_url, "chat/completions"),
            model_id: cfg.model_id.clone(),
            api_key: transport::api_key_from_env(API_KEY_ENV),
            retry: cfg.retry,
            in_flight: InFlight {
                used: Mutex::new(0),
                freed: Condvar::new(),
                limit: cfg.max_in_flight.max(1),
            },
        })
    }
}

impl ChatModel for HttpChat {
    fn complete(&self, req: &ChatRequest) -> Result<String> {
        ensure_messages(req)?;
        let model = if req.model_id.is_empty() {
            &self.model_id
        } else {
            &req.model_id
        };
        let body = WireRequest {
            model,
            messages: &req.messages,
            temperature: req.temperature,
            max_tokens: req.max_tokens,
        };
        let _slot = self.in_flight.acquire();
        let text = transport::post_json(&self.client, &self.url, self.api_key.as_deref(), &body, self.retry)?;
        parse_chat_response(&text)
    }

    fn default_model(&self) -> &str {
        &self.model_id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_fixture() {
        let body = r#"{
          "id": "chatcmpl-123",
          "object": "chat.completion",
          "created": 1677652288,
          "model": "gpt-4-0613",
          "choices": [{
            "index": 0,
            "message": {"role": "assistant", "content": "\n\nHello there, how may I assist you today?"},
            "finish_reason": "stop"
          }],
          "usage": {"prompt_tokens": 9, "completion_tokens": 12, "total_tokens": 21}
        }"#;
        assert_eq!(
            parse_chat_response(body).unwrap(),
            "\n\nHello there, how may I assist you today?"
        );
    }

    #[test]
    fn no_choices_is_protocol_error() {
        assert!(matches!(
            parse_chat_response(r#"{"choices":[]}"#),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn wire_request_shape() {
        let msgs = vec![ChatMessage::user("hi")];
        let body = WireRequest {
            model: "m",
            messages: &msgs,
            temperature: 0.0,
            max_tokens: 16,
        };
        assert_eq!(
            serde_json::to_string(&body).unwrap(),
            r#"{"model":"m","messages":[{"role":"user","content":"hi"}],"temperature":0.0,"max_tokens":16}"#
        );
    }
}
