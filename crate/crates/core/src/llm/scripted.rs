use std::collections::{HashMap, VecDeque};
use std::path::Path;

use parking_lot::Mutex;

use super::{ensure_messages, ChatModel, ChatRequest};
use crate::error::{Error, Result};

/// Queue key consulted when a template has no queue of its own.
pub const WILDCARD: &str = "*";

type Responder = Box<dyn Fn(&ChatRequest) -> Option<String> + Send + Sync>;

/// Replays canned responses for offline runs.
///
/// Each request pops the next response queued under its template id, then
/// under [`WILDCARD`], then asks the responder closure if one is set. In
/// strict mode (the default) any nonzero temperature is rejected.
pub struct ScriptedChat {
    queues: Mutex<HashMap<String, VecDeque<String>>>,
    responder: Option<Responder>,
    strict: bool,
    log: Mutex<Vec<ChatRequest>>,
}

impl Default for ScriptedChat {
    fn default() -> Self {
        ScriptedChat {
            queues: Mutex::new(HashMap::new()),
            responder: None,
            strict: true,
            log: Mutex::new(Vec::new()),
        }
    }
}

impl ScriptedChat {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queue `responses` for requests from any template.
    pub fn with_responses<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let s = Self::new();
        s.push_all(WILDCARD, responses);
        s
    }

    pub fn with_responder<F>(mut self, f: F) -> Self
    where
        F: Fn(&ChatRequest) -> Option<String> + Send + Sync + 'static,
    {
        self.responder = Some(Box::new(f));
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Load a JSON object mapping template ids to response lists.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let map: HashMap<String, Vec<String>> = serde_json::from_str(&text)?;
        let s = Self::new();
        for (k, v) in map {
            s.push_all(&k, v);
        }
        Ok(s)
    }

    pub fn push(&self, template_id: &str, response: impl Into<String>) {
        self.queues
            .lock()
            .entry(template_id.to_string())
            .or_default()
            .push_back(response.into());
    }

    pub fn push_all<I, S>(&self, template_id: &str, responses: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut q = self.queues.lock();
        let entry = q.entry(template_id.to_string()).or_default();
        entry.extend(responses.into_iter().map(Into::into));
    }

    /// Every request answered so far, in order.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.log.lock().clone()
    }

    pub fn remaining(&self) -> usize {
        self.queues.lock().values().map(VecDeque::len).sum()
    }
}

impl ChatModel for ScriptedChat {
    fn complete(&self, req: &ChatRequest) -> Result<String> {
        ensure_messages(req)?;
        if self.strict && req.temperature != 0.0 {
            return Err(Error::NonZeroTemperature(req.temperature));
        }
        let id = req.template_id.as_deref().unwrap_or(WILDCARD);
        let popped = {
            let mut q = self.queues.lock();
            q.get_mut(id)
                .and_then(VecDeque::pop_front)
                .or_else(|| q.get_mut(WILDCARD).and_then(VecDeque::pop_front))
        };
        let answer = popped
            .or_else(|| self.responder.as_ref().and_then(|f| f(req)))
            .ok_or_else(|| Error::ScriptExhausted(id.to_string()))?;
        self.log.lock().push(req.clone());
        Ok(answer)
    }

    fn default_model(&self) -> &str {
        "scripted"
    }
}
