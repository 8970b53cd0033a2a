//! Domain types shared across the toolkit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of an intent class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntentId(pub String);

impl IntentId {
    pub fn new(id: impl Into<String>) -> Self {
        IntentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for IntentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for IntentId {
    fn from(s: &str) -> Self {
        IntentId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Original,
    Negation,
    Implicature,
    Train,
}

impl Split {
    pub const ALL: [Split; 4] = [
        Split::Original,
        Split::Negation,
        Split::Implicature,
        Split::Train,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Original => "original",
            Split::Negation => "negation",
            Split::Implicature => "implicature",
            Split::Train => "train",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        Split::ALL.into_iter().find(|sp| sp.as_str() == s)
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "dataset")]
    Dataset,
    #[serde(rename = "llm-generated")]
    LlmGenerated,
    #[serde(rename = "retrieved")]
    Retrieved,
}

/// One text item with its intent label and provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: String,
    pub text: String,
    pub intent: IntentId,
    pub split: Split,
    pub source: Source,
}

impl Utterance {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        intent: impl Into<IntentId>,
        split: Split,
        source: Source,
    ) -> Result<Self> {
        let u = Utterance {
            id: id.into(),
            text: text.into(),
            intent: intent.into(),
            split,
            source,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::invalid(format!("utterance `{}` has empty text", self.id)));
        }
        Ok(())
    }

    /// Id with any `::suffix` removed; negations share the stem of their source.
    pub fn id_stem(&self) -> &str {
        id_stem(&self.id)
    }
}

impl From<String> for IntentId {
    fn from(s: String) -> Self {
        IntentId(s)
    }
}

pub fn id_stem(id: &str) -> &str {
    id.split("::").next().unwrap_or(id)
}

/// An intent with its informative name and manually written negations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentLabel {
    pub id: IntentId,
    pub name: String,
    #[serde(default)]
    pub negated_names: Vec<String>,
}

impl IntentLabel {
    pub fn new(id: impl Into<IntentId>, name: impl Into<String>, negated: &[&str]) -> Self {
        IntentLabel {
            id: id.into(),
            name: name.into(),
            negated_names: negated.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::invalid(format!("intent `{}` has empty name", self.id)));
        }
        Ok(())
    }

    pub fn first_negated(&self) -> Result<&str> {
        self.negated_names
            .first()
            .map(String::as_str)
            .ok_or_else(|| Error::MissingNegatedName(self.id.0.clone()))
    }
}

/// A dense vector produced by one provider under one instruction.
///
/// Values are held in double precision; providers storing `f32` are widened
/// on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    provider_id: String,
    instruction: String,
}

impl EmbeddingVector {
    pub fn new(
        values: Vec<f64>,
        provider_id: impl Into<String>,
        instruction: impl Into<String>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("embedding must have positive dimension"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(EmbeddingVector {
            values,
            provider_id: provider_id.into(),
            instruction: instruction.into(),
        })
    }

    /// Vector outside any provider, for tests and synthetic geometry.
    pub fn raw(values: Vec<f64>) -> Result<Self> {
        Self::new(values, "", "")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn instruction(&self) -> &str {
        &self.instruction
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same provenance, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.provider_id.clone(), self.instruction.clone())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub(crate) fn same_space(&self, other: &Self) -> Result<()> {
        if self.provider_id != other.provider_id || self.instruction != other.instruction {
            return Err(Error::ProviderMismatch {
                left: format!("{}|{}", self.provider_id, self.instruction),
                right: format!("{}|{}", other.provider_id, other.instruction),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TripletVariant {
    #[serde(rename = "ori-ori")]
    OriOri,
    #[serde(rename = "ori-imp")]
    OriImp,
    #[serde(rename = "curated")]
    Curated,
}

impl TripletVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            TripletVariant::OriOri => "ori-ori",
            TripletVariant::OriImp => "ori-imp",
            TripletVariant::Curated => "curated",
        }
    }
}

/// (anchor, positive, negative) utterance triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletExample {
    pub anchor: Utterance,
    pub positive: Utterance,
    pub negative: Utterance,
    pub variant: TripletVariant,
}

impl TripletExample {
    pub fn new(
        anchor: Utterance,
        positive: Utterance,
        negative: Utterance,
        variant: TripletVariant,
    ) -> Result<Self> {
        if anchor.id == positive.id || anchor.id == negative.id || positive.id == negative.id {
            return Err(Error::invalid(format!(
                "triplet ids must be pairwise distinct: {} / {} / {}",
                anchor.id, positive.id, negative.id
            )));
        }
        if variant == TripletVariant::OriOri && anchor.intent != positive.intent {
            return Err(Error::invalid(format!(
                "ori-ori positive `{}` does not share anchor intent `{}`",
                positive.id, anchor.intent
            )));
        }
        Ok(TripletExample {
            anchor,
            positive,
            negative,
            variant,
        })
    }
}
