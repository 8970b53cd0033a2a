use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::embed_unique;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::geometry::cosine_distance;
use crate::types::{EmbeddingVector, IntentId, IntentLabel, Utterance};

/// Per-class prototypes `p_c`, keyed in id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeModel {
    pub prototypes: BTreeMap<IntentId, EmbeddingVector>,
    pub shots: usize,
}

/// Build prototypes as the mean of up to `shots` example embeddings per
/// class together with the label-name embedding.
///
/// With `shots == 0` each prototype is the label-name embedding itself.
/// Classes with more than `shots` examples are sampled uniformly with
/// `seed`; classes with fewer use every example they have.
pub fn build_prototypes(
    train: &[(Utterance, IntentId)],
    labels: &[IntentLabel],
    emb: &dyn Embedder,
    shots: usize,
    seed: u64,
) -> Result<PrototypeModel> {
    if labels.is_empty() {
        return Err(Error::invalid("no intent labels"));
    }
    let mut by_class: HashMap<&IntentId, Vec<&Utterance>> = HashMap::new();
    for (u, c) in train {
        by_class.entry(c).or_default().push(u);
    }

    let mut ordered: Vec<&IntentLabel> = labels.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<(&IntentLabel, Vec<&Utterance>)> = Vec::with_capacity(ordered.len());
    for label in ordered {
        let picks = if shots == 0 {
            Vec::new()
        } else {
            let pool = by_class
                .get(&label.id)
                .filter(|p| !p.is_empty())
                .ok_or_else(|| Error::ClassAbsent(label.id.0.clone()))?;
            if pool.len() > shots {
                pool.choose_multiple(&mut rng, shots).copied().collect()
            } else {
                if pool.len() < shots {
                    log::warn!(
                        "class `{}` has {} examples, fewer than {shots} shots",
                        label.id,
                        pool.len()
                    );
                }
                pool.clone()
            }
        };
        chosen.push((label, picks));
    }

    let mut texts: Vec<&str> = Vec::new();
    for (label, picks) in &chosen {
        texts.push(&label.name);
        texts.extend(picks.iter().map(|u| u.text.as_str()));
    }
    let table = embed_unique(emb, &texts)?;

    let mut prototypes = BTreeMap::new();
    for (label, picks) in chosen {
        let name_vec = &table[label.name.as_str()];
        let proto = if picks.is_empty() {
            name_vec.clone()
        } else {
            let mut acc = name_vec.values().to_vec();
            for u in &picks {
                let v = &table[u.text.as_str()];
                name_vec.same_space(v)?;
                for (a, x) in acc.iter_mut().zip(v.values()) {
                    *a += x;
                }
            }
            let n = (picks.len() + 1) as f64;
            acc.iter_mut().for_each(|a| *a /= n);
            name_vec.with_values(acc)?
        };
        prototypes.insert(label.id.clone(), proto);
    }
    Ok(PrototypeModel { prototypes, shots })
}

impl PrototypeModel {
    /// Classes ordered by increasing distance to `v`; equal distances keep
    /// id order.
    pub fn ranking(&self, v: &EmbeddingVector) -> Result<Vec<(IntentId, f64)>> {
        let mut out = Vec::with_capacity(self.prototypes.len());
        for (id, p) in &self.prototypes {
            out.push((id.clone(), cosine_distance(p, v)?));
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    /// Nearest prototype; ties go to the lexicographically smallest id.
    pub fn nearest(&self, v: &EmbeddingVector) -> Result<IntentId> {
        let mut best: Option<(&IntentId, f64)> = None;
        for (id, p) in &self.prototypes {
            let d = cosine_distance(p, v)?;
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((id, d));
            }
        }
        best.map(|(id, _)| id.clone())
            .ok_or_else(|| Error::invalid("prototype model is empty"))
    }

    pub fn top_k(&self, v: &EmbeddingVector, k: usize) -> Result<Vec<IntentId>> {
        Ok(self.ranking(v)?.into_iter().take(k).map(|(id, _)| id).collect())
    }
}

pub fn classify(model: &PrototypeModel, u: &Utterance, emb: &dyn Embedder) -> Result<IntentId> {
    model.nearest(&emb.embed_one(&u.text)?)
}

/// Fraction of `test` utterances whose nearest prototype is their intent.
pub fn accuracy(model: &PrototypeModel, test: &[Utterance], emb: &dyn Embedder) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::invalid("accuracy over an empty test set"));
    }
    let texts: Vec<&str> = test.iter().map(|u| u.text.as_str()).collect();
    let table = embed_unique(emb, &texts)?;
    let mut hits = 0usize;
    for u in test {
        hits += (model.nearest(&table[u.text.as_str()])? == u.intent) as usize;
    }
    Ok(hits as f64 / test.len() as f64)
}
