//! Intent extraction: goal generation, action/object parsing, and an LLM
//! fallback for missing objects.

use serde::{Deserialize, Serialize};

use crate::assets::{Lexicon, PromptAssets};
use crate::error::Result;
use crate::llm::{strip_quotes, ChatModel, ChatRequest};
use crate::types::{IntentId, Source, Split, Utterance};

/// One complete extraction tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RecordWire", from = "RecordWire")]
pub struct ExtractionRecord {
    pub utterance: Utterance,
    pub goal: String,
    pub action: String,
    pub object: String,
}

#[derive(Serialize, Deserialize)]
struct RecordWire {
    id: String,
    text: String,
    goal: String,
    action: String,
    object: String,
}

impl From<ExtractionRecord> for RecordWire {
    fn from(r: ExtractionRecord) -> Self {
        RecordWire {
            id: r.utterance.id,
            text: r.utterance.text,
            goal: r.goal,
            action: r.action,
            object: r.object,
        }
    }
}

impl From<RecordWire> for ExtractionRecord {
    fn from(w: RecordWire) -> Self {
        ExtractionRecord::new(w.id, w.text, w.goal, w.action, w.object)
    }
}

/// Intent id used for utterances grouped by their action-object pair.
pub fn pair_intent(action: &str, object: &str) -> IntentId {
    IntentId(format!("{action}/{object}"))
}

impl ExtractionRecord {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        goal: impl Into<String>,
        action: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        let (action, object) = (action.into(), object.into());
        ExtractionRecord {
            utterance: Utterance {
                id: id.into(),
                text: text.into(),
                intent: pair_intent(&action, &object),
                split: Split::Train,
                source: Source::Dataset,
            },
            goal: goal.into(),
            action,
            object,
        }
    }

    pub fn pair(&self) -> (&str, &str) {
        (&self.action, &self.object)
    }
}

/// Result of parsing a goal phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedGoal {
    pub action: Option<String>,
    pub object: Option<String>,
}

/// Anything that turns a goal phrase into an action and object, such as a
/// dependency-parser service.
pub trait ActionObjectParser: Send + Sync {
    fn parse(&self, goal: &str) -> ParsedGoal;
}

/// Word-list heuristic standing in for a dependency parse.
pub struct HeuristicParser<'a> {
    lex: &'a Lexicon,
}

impl<'a> HeuristicParser<'a> {
    pub fn new(lex: &'a Lexicon) -> Self {
        HeuristicParser { lex }
    }
}

/// Lowercase, trim, drop surrounding quotes and trailing punctuation,
/// collapse whitespace.
pub fn normalize_goal(raw: &str) -> String {
    let lowered = raw.trim().to_lowercase();
    let mut s = strip_quotes(lowered.trim()).trim();
    loop {
        let t = s
            .trim_end_matches(['.', '!', '?', ',', ';', ':'])
            .trim();
        let t = strip_quotes(t).trim();
        if t == s {
            break;
        }
        s = t;
    }
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn words(goal: &str) -> Vec<String> {
    goal.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
                .to_string()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

impl ActionObjectParser for HeuristicParser<'_> {
    /// After stripping leading filler ("to", "want to", ...), the first
    /// token is the action; an auxiliary ("be", "get") pulls in the next
    /// token, and a following particle ("about", "for") joins the action.
    /// The object is the last content word of the remainder, cut at the
    /// first preposition that follows a content word.
    fn parse(&self, goal: &str) -> ParsedGoal {
        let lex = self.lex;
        let mut toks = words(&normalize_goal(goal));
        'strip: loop {
            for p in &lex.goal_prefixes {
                let pt: Vec<&str> = p.split_whitespace().collect();
                if toks.len() >= pt.len() && toks.iter().zip(&pt).all(|(a, b)| a == b) {
                    toks.drain(..pt.len());
                    continue 'strip;
                }
            }
            break;
        }
        let none = ParsedGoal {
            action: None,
            object: None,
        };
        let Some(first) = toks.first() else {
            return none;
        };
        let mut i = 1;
        let action = if lex.auxiliaries.contains(first) && toks.len() > 1 {
            i = 2;
            format!("{first} {}", toks[1])
        } else if lex.is_stopword(first) || first.chars().all(|c| c.is_ascii_digit()) {
            return none;
        } else {
            let mut a = first.clone();
            if let Some(p) = toks.get(1).filter(|p| lex.particles.contains(*p)) {
                a = format!("{a} {p}");
                i = 2;
            }
            a
        };

        let mut seen_content = false;
        let mut object = None;
        for w in &toks[i..] {
            if seen_content && lex.prepositions.contains(w) {
                break;
            }
            if !lex.is_stopword(w) && !lex.prepositions.contains(w) {
                seen_content = true;
                object = Some(w.clone());
            }
        }
        ParsedGoal {
            action: Some(action),
            object,
        }
    }
}

/// Ask the chat model for the customer's goal. `None` for an empty reply.
pub fn goal_generation(
    u: &Utterance,
    chat: &dyn ChatModel,
    prompts: &PromptAssets,
) -> Result<Option<String>> {
    let req = ChatRequest::from_template(
        chat.default_model(),
        prompts.require("goal")?,
        &[("utterance", u.text.as_str())],
    )?;
    let goal = normalize_goal(chat.complete(&req)?.lines().find(|l| !l.trim().is_empty()).unwrap_or(""));
    Ok((!goal.is_empty()).then_some(goal))
}

/// Outcome of the object fallback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Summary {
    Object(String),
    Empty,
    Refused,
}

/// Ask the chat model to name the object; keep the first content word.
pub fn summarize_object(
    u: &Utterance,
    goal: &str,
    action: &str,
    chat: &dyn ChatModel,
    prompts: &PromptAssets,
    lex: &Lexicon,
) -> Result<Summary> {
    let req = ChatRequest::from_template(
        chat.default_model(),
        prompts.require("summarize-object")?,
        &[("utterance", u.text.as_str()), ("goal", goal), ("action", action)],
    )?;
    let reply = chat.complete(&req)?;
    if lex.is_refusal(&reply) {
        return Ok(Summary::Refused);
    }
    Ok(words(&normalize_goal(&reply))
        .into_iter()
        .find(|w| !lex.is_stopword(w))
        .map_or(Summary::Empty, Summary::Object))
}

/// Per-cause counts of utterances that produced no record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub empty_goal: usize,
    pub no_action: usize,
    pub empty_object: usize,
    pub refused_object: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.empty_goal + self.no_action + self.empty_object + self.refused_object
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOutput {
    pub records: Vec<ExtractionRecord>,
    pub drops: DropCounts,
    /// Records whose object came from the fallback.
    pub summarized: usize,
}

/// Goal generation, parsing and object fallback for every utterance, in
/// input order.
pub fn extract_all(
    utterances: &[Utterance],
    chat: &dyn ChatModel,
    parser: &dyn ActionObjectParser,
    prompts: &PromptAssets,
    lex: &Lexicon,
) -> Result<ExtractionOutput> {
    let mut out = ExtractionOutput::default();
    for u in utterances {
        let Some(goal) = goal_generation(u, chat, prompts)? else {
            out.drops.empty_goal += 1;
            continue;
        };
        let parsed = parser.parse(&goal);
        let Some(action) = parsed.action else {
            out.drops.no_action += 1;
            continue;
        };
        let object = match parsed.object {
            Some(o) => o,
            None => match summarize_object(u, &goal, &action, chat, prompts, lex)? {
                Summary::Object(o) => {
                    out.summarized += 1;
                    o
                }
                Summary::Empty => {
                    out.drops.empty_object += 1;
                    continue;
                }
                Summary::Refused => {
                    out.drops.refused_object += 1;
                    continue;
                }
            },
        };
        out.records
            .push(ExtractionRecord::new(u.id.clone(), u.text.clone(), goal, action, object));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets::{default_lexicon, default_prompts};
    use crate::llm::ScriptedChat;

    fn parse(goal: &str) -> (Option<String>, Option<String>) {
        let p = HeuristicParser::new(default_lexicon()).parse(goal);
        (p.action, p.object)
    }

    fn pair(a: &str, o: Option<&str>) -> (Option<String>, Option<String>) {
        (Some(a.to_string()), o.map(str::to_string))
    }

    #[test]
    fn canonical_goals() {
        assert_eq!(parse("to order a pizza"), pair("order", Some("pizza")));
        assert_eq!(parse("to know about transportation"), pair("know about", Some("transportation")));
        assert_eq!(parse("to be reminded"), pair("be reminded", None));
        assert_eq!(parse("to know the weather"), pair("know", Some("weather")));
        assert_eq!(parse("to be recommended a product"), pair("be recommended", Some("product")));
        assert_eq!(parse("to know the time of the alarm"), pair("know", Some("time")));
        assert_eq!(parse("The customer wants to book a flight to Paris."), pair("book", Some("flight")));
    }

    #[test]
    fn no_verb_candidate() {
        assert_eq!(parse("to"), (None, None));
        assert_eq!(parse("the weather"), (None, None));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_goal("  \"To Order a Pizza.\" "), "to order a pizza");
        assert_eq!(normalize_goal("'to know the weather'."), "to know the weather");
    }

    fn u(id: &str, text: &str) -> Utterance {
        Utterance::new(id, text, "unlabeled", Split::Train, Source::Dataset).unwrap()
    }

    #[test]
    fn fallback_and_drops() {
        let chat = ScriptedChat::new();
        chat.push_all("goal", ["to be reminded", "", "to be reminded", "to be reminded"]);
        chat.push_all("summarize-object", ["The reminder, please.", "As an AI language model I cannot", "  "]);
        let inputs = [u("a", "remind me"), u("b", "hmm"), u("c", "remind"), u("d", "x")];
        let out = extract_all(
            &inputs,
            &chat,
            &HeuristicParser::new(default_lexicon()),
            default_prompts(),
            default_lexicon(),
        )
        .unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].pair(), ("be reminded", "reminder"));
        assert_eq!(out.drops.empty_goal, 1);
        assert_eq!(out.drops.refused_object, 1);
        assert_eq!(out.drops.empty_object, 1);
        assert_eq!(out.records.len() + out.drops.total(), inputs.len());
    }

    #[test]
    fn record_wire_round_trip() {
        let r = ExtractionRecord::new("u1", "order pizza", "to order a pizza", "order", "pizza");
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"id":"u1","text":"order pizza","goal":"to order a pizza","action":"order","object":"pizza"}"#
        );
        assert_eq!(serde_json::from_str::<ExtractionRecord>(&json).unwrap(), r);
    }
}
