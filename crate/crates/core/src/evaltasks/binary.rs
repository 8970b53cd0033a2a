use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::embed_unique;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::geometry::cosine_distance;
use crate::types::{EmbeddingVector, IntentId, IntentLabel, Split, Utterance};

/// How the negated-intent embedding `f(¬i)` is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegatedNameMode {
    /// Embedding of the first negated name.
    #[default]
    First,
    /// Mean of the embeddings of all negated names.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRate {
    pub successes: usize,
    pub total: usize,
}

impl SplitRate {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.successes as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryResult {
    pub per_split: BTreeMap<Split, SplitRate>,
}

impl BinaryResult {
    pub fn rate(&self, split: Split) -> Option<f64> {
        self.per_split.get(&split).map(SplitRate::rate)
    }
}

/// Success of one binary decision given `f(u)`, `f(i)` and `f(¬i)`.
///
/// Negation utterances succeed when closer to the negated intent; every
/// other split succeeds when closer to the original intent. Ties fail.
pub fn binary_outcome(
    split: Split,
    utterance: &EmbeddingVector,
    intent: &EmbeddingVector,
    negated: &EmbeddingVector,
) -> Result<bool> {
    let to_intent = cosine_distance(utterance, intent)?;
    let to_negated = cosine_distance(utterance, negated)?;
    Ok(match split {
        Split::Negation => to_negated < to_intent,
        _ => to_intent < to_negated,
    })
}

/// Binary classification between each utterance's intent name and its
/// negated name, reported per split.
pub fn binary_eval(
    utterances: &[Utterance],
    labels: &[IntentLabel],
    emb: &dyn Embedder,
    mode: NegatedNameMode,
) -> Result<BinaryResult> {
    let by_id: HashMap<&IntentId, &IntentLabel> = labels.iter().map(|l| (&l.id, l)).collect();

    let mut texts: Vec<&str> = utterances.iter().map(|u| u.text.as_str()).collect();
    for u in utterances {
        let label = by_id
            .get(&u.intent)
            .ok_or_else(|| Error::invalid(format!("unknown intent `{}`", u.intent)))?;
        if label.negated_names.is_empty() {
            return Err(Error::MissingNegatedName(label.id.0.clone()));
        }
        texts.push(&label.name);
        match mode {
            NegatedNameMode::First => texts.push(&label.negated_names[0]),
            NegatedNameMode::Average => texts.extend(label.negated_names.iter().map(String::as_str)),
        }
    }
    if utterances.is_empty() {
        return Ok(BinaryResult::default());
    }
    let table = embed_unique(emb, &texts)?;

    let mut negated_cache: HashMap<&IntentId, EmbeddingVector> = HashMap::new();
    let mut result = BinaryResult::default();
    for u in utterances {
        let label = by_id[&u.intent];
        if !negated_cache.contains_key(&u.intent) {
            let v = match mode {
                NegatedNameMode::First => table[label.negated_names[0].as_str()].clone(),
                NegatedNameMode::Average => {
                    let vs: Vec<&EmbeddingVector> =
                        label.negated_names.iter().map(|n| &table[n.as_str()]).collect();
                    mean_vector(&vs)?
                }
            };
            negated_cache.insert(&u.intent, v);
        }
        let ok = binary_outcome(
            u.split,
            &table[u.text.as_str()],
            &table[label.name.as_str()],
            &negated_cache[&u.intent],
        )?;
        let entry = result.per_split.entry(u.split).or_insert(SplitRate {
            successes: 0,
            total: 0,
        });
        entry.total += 1;
        entry.successes += ok as usize;
    }
    Ok(result)
}

fn mean_vector(vs: &[&EmbeddingVector]) -> Result<EmbeddingVector> {
    let first = vs.first().ok_or_else(|| Error::invalid("mean of no vectors"))?;
    let mut acc = vec![0.0; first.dim()];
    for v in vs {
        first.same_space(v)?;
        for (a, x) in acc.iter_mut().zip(v.values()) {
            *a += x;
        }
    }
    let n = vs.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    first.with_values(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector::raw(xs.to_vec()).unwrap()
    }

    #[test]
    fn equal_to_label_name_succeeds() {
        let (i, n) = (v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        assert!(binary_outcome(Split::Original, &i, &i, &n).unwrap());
    }

    #[test]
    fn equal_to_negated_name_flips_by_split() {
        let (i, n) = (v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        assert!(!binary_outcome(Split::Original, &n, &i, &n).unwrap());
        assert!(!binary_outcome(Split::Implicature, &n, &i, &n).unwrap());
        assert!(binary_outcome(Split::Negation, &n, &i, &n).unwrap());
    }

    #[test]
    fn ties_fail_both_ways() {
        let (i, n) = (v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        let u = v(&[1.0, 1.0]);
        assert!(!binary_outcome(Split::Original, &u, &i, &n).unwrap());
        assert!(!binary_outcome(Split::Negation, &u, &i, &n).unwrap());
    }
}
