//! Chat-completion providers and prompt templates.

mod http;
mod scripted;
mod template;

use serde::{Deserialize, Serialize};

pub use http::{parse_chat_response, ChatConfig, HttpChat};
pub use scripted::{ScriptedChat, WILDCARD};
pub use template::{render, PromptTemplate};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<ChatMessage>,
    #[serde(default)]
    pub temperature: f64,
    pub max_tokens: u32,
    /// Template the messages were rendered from; used for routing scripted
    /// responses and never sent over the wire.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<String>,
}

impl ChatRequest {
    pub fn new(model_id: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        ChatRequest {
            model_id: model_id.into(),
            messages,
            temperature: 0.0,
            max_tokens: 512,
            template_id: None,
        }
    }

    /// Render `template` with `bindings` into a temperature-0 request.
    pub fn from_template(
        model_id: impl Into<String>,
        template: &PromptTemplate,
        bindings: &[(&str, &str)],
    ) -> Result<Self> {
        let mut req = ChatRequest::new(model_id, render(template, bindings)?);
        req.template_id = Some(template.id.clone());
        Ok(req)
    }
}

/// Anything that answers chat requests.
pub trait ChatModel: Send + Sync {
    /// Text of the first completion.
    fn complete(&self, req: &ChatRequest) -> Result<String>;

    /// Model id used when a pipeline does not name one.
    fn default_model(&self) -> &str {
        ""
    }
}

impl<T: ChatModel + ?Sized> ChatModel for &T {
    fn complete(&self, req: &ChatRequest) -> Result<String> {
        (**self).complete(req)
    }
    fn default_model(&self) -> &str {
        (**self).default_model()
    }
}

impl<T: ChatModel + ?Sized> ChatModel for std::sync::Arc<T> {
    fn complete(&self, req: &ChatRequest) -> Result<String> {
        (**self).complete(req)
    }
    fn default_model(&self) -> &str {
        (**self).default_model()
    }
}

pub(crate) fn ensure_messages(req: &ChatRequest) -> Result<()> {
    if req.messages.is_empty() {
        return Err(Error::invalid("chat request has no messages"));
    }
    Ok(())
}

/// Split a generation into items, tolerating numbering, bullets and quotes.
///
/// `"1. foo\n2) \"bar\"\n- baz"` yields `["foo", "bar", "baz"]`.
pub fn split_list(text: &str) -> Vec<String> {
    text.lines().filter_map(clean_item).collect()
}

fn clean_item(line: &str) -> Option<String> {
    let mut s = line.trim();
    // Leading list markers: "1.", "1)", "(1)", "-", "*", "•".
    loop {
        let before = s;
        if let Some(rest) = s.strip_prefix(['-', '*', '•']) {
            s = rest.trim_start();
        }
        let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits > 0 {
            let rest = &s[digits..];
            if let Some(r) = rest.strip_prefix(['.', ')', ':']) {
                s = r.trim_start();
            }
        } else if s.starts_with('(') {
            let inner = s[1..].chars().take_while(|c| c.is_ascii_digit()).count();
            if inner > 0 && s[1 + inner..].starts_with(')') {
                s = s[2 + inner..].trim_start();
            }
        }
        if s == before {
            break;
        }
    }
    let s = strip_quotes(s);
    if s.is_empty() {
        None
    } else {
        Some(s.to_string())
    }
}

pub(crate) fn strip_quotes(s: &str) -> &str {
    let quotes: &[char] = &['"', '\'', '“', '”', '‘', '’', '`'];
    let mut s = s.trim();
    loop {
        let t = s
            .strip_prefix(quotes)
            .and_then(|r| r.strip_suffix(quotes))
            .map(str::trim);
        match t {
            Some(inner) => s = inner,
            None => break,
        }
    }
    s
}
