use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::embed_unique;
use super::prototype::PrototypeModel;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::llm::{ChatModel, ChatRequest, PromptTemplate};
use crate::types::{IntentId, IntentLabel, Utterance};

pub const UPPER_BOUND_TEMPLATE: &str = "upper-bound";
const TOP_K: usize = 5;

fn template() -> PromptTemplate {
    PromptTemplate::new(
        UPPER_BOUND_TEMPLATE,
        "Classify the user utterance into exactly one of the candidate intents.\n\
         Utterance: {utterance}\n\
         Candidates:\n{candidates}\n\
         Answer with the number of the chosen candidate only.",
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundResult {
    pub accuracy: f64,
    pub n: usize,
    pub unparseable: usize,
}

/// Resolve a free-form answer to one of `candidates` (display names).
///
/// Accepts a 1-based index, an exact name (case-insensitive), or a name
/// that is the only candidate contained in the answer.
pub fn parse_choice(answer: &str, candidates: &[&str]) -> Option<usize> {
    let a = answer.trim().trim_end_matches('.').trim().to_lowercase();
    if a.is_empty() {
        return None;
    }
    let digits: String = a
        .trim_start_matches(|c: char| !c.is_ascii_digit())
        .chars()
        .take_while(char::is_ascii_digit)
        .collect();
    if !digits.is_empty() && a.starts_with(|c: char| c.is_ascii_digit() || c == '(' || c == '[') {
        let i: usize = digits.parse().ok()?;
        return (1..=candidates.len()).contains(&i).then(|| i - 1);
    }
    if let Some(i) = candidates.iter().position(|c| c.to_lowercase() == a) {
        return Some(i);
    }
    let hits: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| a.contains(&c.to_lowercase()))
        .map(|(i, _)| i)
        .collect();
    match hits.as_slice() {
        [one] => Some(*one),
        _ => None,
    }
}

/// Accuracy of a chat model choosing among the top-5 prototypes plus the
/// gold intent, presented in seeded random order. Unparseable answers
/// count as wrong.
pub fn llm_upper_bound(
    test: &[Utterance],
    model: &PrototypeModel,
    labels: &[IntentLabel],
    emb: &dyn Embedder,
    chat: &dyn ChatModel,
    seed: u64,
) -> Result<UpperBoundResult> {
    if test.is_empty() {
        return Err(Error::invalid("upper bound over an empty test set"));
    }
    let names: HashMap<&IntentId, &str> = labels.iter().map(|l| (&l.id, l.name.as_str())).collect();
    let texts: Vec<&str> = test.iter().map(|u| u.text.as_str()).collect();
    let table = embed_unique(emb, &texts)?;
    let tpl = template();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut hits, mut unparseable) = (0usize, 0usize);

    for u in test {
        let mut cands = model.top_k(&table[u.text.as_str()], TOP_K)?;
        if !cands.contains(&u.intent) {
            cands.push(u.intent.clone());
        }
        cands.shuffle(&mut rng);
        let display: Vec<&str> = cands
            .iter()
            .map(|c| names.get(c).copied().unwrap_or(c.as_str()))
            .collect();
        let listing = display
            .iter()
            .enumerate()
            .map(|(i, n)| format!("{}. {n}", i + 1))
            .collect::<Vec<_>>()
            .join("\n");
        let req = ChatRequest::from_template(
            chat.default_model(),
            &tpl,
            &[("utterance", u.text.as_str()), ("candidates", listing.as_str())],
        )?;
        let answer = chat.complete(&req)?;
        match parse_choice(&answer, &display) {
            Some(i) => hits += (cands[i] == u.intent) as usize,
            None => unparseable += 1,
        }
    }
    Ok(UpperBoundResult {
        accuracy: hits as f64 / test.len() as f64,
        n: test.len(),
        unparseable,
    })
}
