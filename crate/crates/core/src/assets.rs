//! Editable prompt templates and word lists, compiled in from `assets/` and
//! optionally overridden from disk.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llm::PromptTemplate;

const PROMPTS_JSON: &str = include_str!("../assets/prompts.json");
const LEXICON_JSON: &str = include_str!("../assets/lexicon.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// A prompt-zoo entry: which template, what it produces, how many items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZooEntry {
    pub id: String,
    pub polarity: Polarity,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptAssets {
    pub templates: Vec<PromptTemplate>,
    pub zoo: Vec<ZooEntry>,
}

impl PromptAssets {
    pub fn from_json(text: &str) -> Result<Self> {
        let assets: PromptAssets = serde_json::from_str(text)?;
        for z in &assets.zoo {
            if assets.get(&z.id).is_none() {
                return Err(Error::invalid(format!("zoo entry `{}` has no template", z.id)));
            }
        }
        Ok(assets)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, id: &str) -> Option<&PromptTemplate> {
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn require(&self, id: &str) -> Result<&PromptTemplate> {
        self.get(id)
            .ok_or_else(|| Error::invalid(format!("no prompt template `{id}`")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversifyPattern {
    pub prefix: String,
    pub alternatives: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lexicon {
    /// Leading phrases stripped from goals, longest first after loading.
    pub goal_prefixes: Vec<String>,
    pub auxiliaries: HashSet<String>,
    pub particles: HashSet<String>,
    pub prepositions: HashSet<String>,
    pub stopwords: HashSet<String>,
    pub refusal_markers: Vec<String>,
    pub forbidden_keywords: Vec<String>,
    pub diversify_patterns: Vec<DiversifyPattern>,
}

impl Lexicon {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut lex: Lexicon = serde_json::from_str(text)?;
        lex.goal_prefixes.sort_by_key(|p| std::cmp::Reverse(p.len()));
        lex.diversify_patterns
            .sort_by_key(|p| std::cmp::Reverse(p.prefix.len()));
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn is_stopword(&self, w: &str) -> bool {
        self.stopwords.contains(w)
    }

    pub fn is_refusal(&self, text: &str) -> bool {
        let t = text.to_lowercase();
        self.refusal_markers.iter().any(|m| t.contains(m.as_str()))
    }
}

pub fn default_prompts() -> &'static PromptAssets {
    static P: OnceLock<PromptAssets> = OnceLock::new();
    P.get_or_init(|| PromptAssets::from_json(PROMPTS_JSON).expect("bundled prompts.json is valid"))
}

pub fn default_lexicon() -> &'static Lexicon {
    static L: OnceLock<Lexicon> = OnceLock::new();
    L.get_or_init(|| Lexicon::from_json(LEXICON_JSON).expect("bundled lexicon.json is valid"))
}

/// Zoo entries keyed by id, for quick lookup.
pub fn zoo_index(assets: &PromptAssets) -> BTreeMap<&str, &ZooEntry> {
    assets.zoo.iter().map(|z| (z.id.as_str(), z)).collect()
}
