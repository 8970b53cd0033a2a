use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::embed_unique;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::geometry::cosine_distance;
use crate::types::{EmbeddingVector, IntentId, TripletExample, TripletVariant, Utterance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletResult {
    pub variant: TripletVariant,
    pub t_hard: f64,
    pub t_easy: f64,
    pub n_triplets: usize,
}

/// Outcome of one triplet: `(hard, easy)` success under strict inequality.
///
/// hard: `D(a, p) < D(a, n)`; easy: `D(p, a) < D(p, n)`. Ties fail.
pub fn triplet_outcome(
    anchor: &EmbeddingVector,
    positive: &EmbeddingVector,
    negative: &EmbeddingVector,
) -> Result<(bool, bool)> {
    let hard = cosine_distance(anchor, positive)? < cosine_distance(anchor, negative)?;
    let easy = cosine_distance(positive, anchor)? < cosine_distance(positive, negative)?;
    Ok((hard, easy))
}

/// Success rates over precomputed `(anchor, positive, negative)` vectors.
pub fn triplet_rates(
    variant: TripletVariant,
    vectors: &[(EmbeddingVector, EmbeddingVector, EmbeddingVector)],
) -> Result<TripletResult> {
    if vectors.is_empty() {
        return Err(Error::invalid("triplet evaluation needs at least one triplet"));
    }
    let mut hard = 0usize;
    let mut easy = 0usize;
    for (a, p, n) in vectors {
        let (h, e) = triplet_outcome(a, p, n)?;
        hard += h as usize;
        easy += e as usize;
    }
    let n = vectors.len();
    Ok(TripletResult {
        variant,
        t_hard: hard as f64 / n as f64,
        t_easy: easy as f64 / n as f64,
        n_triplets: n,
    })
}

/// Embed every triplet and compute `T_hard` / `T_easy`.
pub fn triplet_eval(triplets: &[TripletExample], emb: &dyn Embedder) -> Result<TripletResult> {
    let first = triplets
        .first()
        .ok_or_else(|| Error::invalid("triplet evaluation needs at least one triplet"))?;
    let texts: Vec<&str> = triplets
        .iter()
        .flat_map(|t| [t.anchor.text.as_str(), t.positive.text.as_str(), t.negative.text.as_str()])
        .collect();
    let table = embed_unique(emb, &texts)?;
    let vectors: Vec<_> = triplets
        .iter()
        .map(|t| {
            (
                table[t.anchor.text.as_str()].clone(),
                table[t.positive.text.as_str()].clone(),
                table[t.negative.text.as_str()].clone(),
            )
        })
        .collect();
    triplet_rates(first.variant, &vectors)
}

/// Triplets plus the number of anchors that could not be used.
#[derive(Debug, Clone, Default)]
pub struct TripletBuild {
    pub triplets: Vec<TripletExample>,
    /// Anchors whose intent has no other original utterance (or no implicature).
    pub skipped_no_positive: usize,
    /// Anchors without an aligned negation.
    pub skipped_no_negation: usize,
}

fn negation_index(negations: &[Utterance]) -> HashMap<&str, &Utterance> {
    negations.iter().map(|n| (n.id_stem(), n)).collect()
}

fn group_by_intent(utts: &[Utterance]) -> BTreeMap<&IntentId, Vec<&Utterance>> {
    let mut groups: BTreeMap<&IntentId, Vec<&Utterance>> = BTreeMap::new();
    for u in utts {
        groups.entry(&u.intent).or_default().push(u);
    }
    groups
}

/// Ori-Ori triplets: anchor original, positive another original of the same
/// intent drawn uniformly with `seed`, negative the anchor's aligned negation.
pub fn make_ori_ori_triplets(
    originals: &[Utterance],
    negations: &[Utterance],
    seed: u64,
) -> Result<TripletBuild> {
    let neg = negation_index(negations);
    let groups = group_by_intent(originals);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TripletBuild::default();
    for anchor in originals {
        let Some(negative) = neg.get(anchor.id.as_str()) else {
            out.skipped_no_negation += 1;
            continue;
        };
        let others: Vec<&Utterance> = groups[&anchor.intent]
            .iter()
            .copied()
            .filter(|u| u.id != anchor.id)
            .collect();
        if others.is_empty() {
            out.skipped_no_positive += 1;
            continue;
        }
        let positive = others[rng.gen_range(0..others.len())];
        out.triplets.push(TripletExample::new(
            anchor.clone(),
            positive.clone(),
            (*negative).clone(),
            TripletVariant::OriOri,
        )?);
    }
    if out.skipped_no_positive + out.skipped_no_negation > 0 {
        log::warn!(
            "ori-ori: skipped {} anchors without positive, {} without negation",
            out.skipped_no_positive,
            out.skipped_no_negation
        );
    }
    Ok(out)
}

/// Ori-Imp triplets: positive drawn uniformly among implicatures of the
/// anchor's intent.
pub fn make_ori_imp_triplets(
    originals: &[Utterance],
    implicatures: &[Utterance],
    negations: &[Utterance],
    seed: u64,
) -> Result<TripletBuild> {
    let neg = negation_index(negations);
    let groups = group_by_intent(implicatures);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TripletBuild::default();
    for anchor in originals {
        let Some(negative) = neg.get(anchor.id.as_str()) else {
            out.skipped_no_negation += 1;
            continue;
        };
        let Some(pool) = groups.get(&anchor.intent) else {
            out.skipped_no_positive += 1;
            continue;
        };
        let positive = pool[rng.gen_range(0..pool.len())];
        out.triplets.push(TripletExample::new(
            anchor.clone(),
            positive.clone(),
            (*negative).clone(),
            TripletVariant::OriImp,
        )?);
    }
    Ok(out)
}
