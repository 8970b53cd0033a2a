use serde::{Deserialize, Serialize};

use super::ChatMessage;
use crate::error::{Error, Result};

/// A prompt with `{name}` placeholders and optional in-context pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    pub template: String,
    #[serde(default)]
    pub in_context_examples: Vec<(String, String)>,
}

impl PromptTemplate {
    pub fn new(id: impl Into<String>, template: impl Into<String>) -> Self {
        PromptTemplate {
            id: id.into(),
            template: template.into(),
            in_context_examples: Vec::new(),
        }
    }

    pub fn with_examples(mut self, examples: Vec<(String, String)>) -> Self {
        self.in_context_examples = examples;
        self
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut names = Vec::new();
        for (_, name) in scan(&self.template) {
            if !names.contains(&name) {
                names.push(name);
            }
        }
        names
    }
}

/// Byte offsets and names of `{ident}` spans; other braces are literal.
fn scan(t: &str) -> Vec<((usize, usize), &str)> {
    let bytes = t.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' && bytes.get(i + 1) == Some(&b'{') {
            // `{{` is literal text
            i += 2;
            continue;
        }
        if bytes[i] == b'{' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            if j > start && j < bytes.len() && bytes[j] == b'}' {
                out.push(((i, j + 1), &t[start..j]));
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Render a template into chat messages.
///
/// In-context pairs become alternating user/assistant turns ahead of the
/// final user turn carrying the filled template.
pub fn render(t: &PromptTemplate, bindings: &[(&str, &str)]) -> Result<Vec<ChatMessage>> {
    let mut filled = String::with_capacity(t.template.len());
    let mut last = 0;
    for ((start, end), name) in scan(&t.template) {
        let value = bindings
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::MissingPlaceholder {
                template: t.id.clone(),
                placeholder: name.to_string(),
            })?;
        filled.push_str(&t.template[last..start]);
        filled.push_str(value);
        last = end;
    }
    filled.push_str(&t.template[last..]);

    let mut messages = Vec::with_capacity(t.in_context_examples.len() * 2 + 1);
    for (input, output) in &t.in_context_examples {
        messages.push(ChatMessage::user(input.clone()));
        messages.push(ChatMessage::assistant(output.clone()));
    }
    messages.push(ChatMessage::user(filled));
    Ok(messages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Role;

    #[test]
    fn no_placeholders_single_message() {
        let t = PromptTemplate::new("plain", "say hi");
        let m = render(&t, &[]).unwrap();
        assert_eq!(m, vec![ChatMessage::user("say hi")]);
    }

    #[test]
    fn six_examples_give_thirteen_messages() {
        let ex = (0..6).map(|i| (format!("in {i}"), format!("out {i}"))).collect();
        let t = PromptTemplate::new("t", "x {a}").with_examples(ex);
        let m = render(&t, &[("a", "1")]).unwrap();
        assert_eq!(m.len(), 13);
        for (i, msg) in m.iter().enumerate().take(12) {
            let want = if i % 2 == 0 { Role::User } else { Role::Assistant };
            assert_eq!(msg.role, want);
        }
        assert_eq!(m[12].content, "x 1");
    }

    #[test]
    fn substitution_and_missing() {
        let t = PromptTemplate::new(
            "negation",
            "Rewrite \"{utterance}\" so that it expresses: {negated_intent}. Keep {{literal}}.",
        );
        let m = render(
            &t,
            &[("utterance", "book a flight"), ("negated_intent", "no need to book a flight")],
        )
        .unwrap();
        let last = &m.last().unwrap().content;
        assert!(last.contains("book a flight"));
        assert!(last.contains("no need to book a flight"));
        assert!(last.contains("{{literal}}"));
        let err = render(&t, &[("utterance", "x")]).unwrap_err();
        assert!(matches!(err, Error::MissingPlaceholder { ref placeholder, .. } if placeholder == "negated_intent"));
    }

    #[test]
    fn placeholder_listing() {
        let t = PromptTemplate::new("p", "{b} and {a} then {b} { not } {}");
        assert_eq!(t.placeholders(), vec!["b", "a"]);
    }
}
