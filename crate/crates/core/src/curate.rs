//! Fine-tuning triplet curation: LLM hard positives/negatives from the
//! prompt zoo, retrieved positives/negatives, and diversification.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assets::{Lexicon, Polarity, PromptAssets, ZooEntry};
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::evaltasks::embed_unique;
use crate::extract::{pair_intent, ExtractionRecord};
use crate::geometry::cosine_distance;
use crate::llm::{split_list, ChatModel, ChatRequest};
use crate::types::{EmbeddingVector, IntentId, Source, Split, Utterance};

/// Prompt zoo with ablation switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptZoo {
    pub entries: Vec<ZooEntry>,
    pub disabled: BTreeSet<String>,
    /// When set, no LLM generation happens at all.
    pub llm_disabled: bool,
}

fn ascii_digits(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '⁰' => '0',
            '¹' => '1',
            '²' => '2',
            '³' => '3',
            '⁴' => '4',
            '⁵' => '5',
            '⁶' => '6',
            '⁷' => '7',
            '⁸' => '8',
            '⁹' => '9',
            other => other,
        })
        .collect()
}

impl PromptZoo {
    pub fn new(entries: Vec<ZooEntry>) -> Self {
        PromptZoo {
            entries,
            disabled: BTreeSet::new(),
            llm_disabled: false,
        }
    }

    pub fn from_assets(assets: &PromptAssets) -> Self {
        Self::new(assets.zoo.clone())
    }

    /// Apply an ablation string such as `P4,N1,N3`, `-P⁴,N¹,³`, `P*`, `N*`
    /// or `LLM`. A bare number reuses the previous letter.
    pub fn disable(&mut self, spec: &str) -> Result<()> {
        let mut last_letter: Option<char> = None;
        for raw in spec.split(',') {
            let tok = ascii_digits(raw.trim().trim_start_matches(['-', '−']).trim());
            if tok.is_empty() {
                continue;
            }
            if tok.eq_ignore_ascii_case("llm") {
                self.llm_disabled = true;
                continue;
            }
            let tok = if tok.chars().all(|c| c.is_ascii_digit()) {
                let l = last_letter
                    .ok_or_else(|| Error::invalid(format!("ablation `{raw}` lacks a template letter")))?;
                format!("{l}{tok}")
            } else {
                tok.to_ascii_uppercase()
            };
            let letter = tok.chars().next().expect("non-empty token");
            last_letter = Some(letter);
            if tok.len() == 2 && tok.ends_with('*') {
                let polarity = match letter {
                    'P' => Polarity::Positive,
                    'N' => Polarity::Negative,
                    _ => return Err(Error::invalid(format!("unknown ablation `{raw}`"))),
                };
                let ids: Vec<String> = self
                    .entries
                    .iter()
                    .filter(|e| e.polarity == polarity)
                    .map(|e| e.id.clone())
                    .collect();
                self.disabled.extend(ids);
            } else if self.entries.iter().any(|e| e.id == tok) {
                self.disabled.insert(tok);
            } else {
                return Err(Error::invalid(format!("unknown prompt template `{raw}`")));
            }
        }
        Ok(())
    }

    pub fn enabled(&self, polarity: Polarity) -> Vec<&ZooEntry> {
        if self.llm_disabled {
            return Vec::new();
        }
        self.entries
            .iter()
            .filter(|e| e.polarity == polarity && !self.disabled.contains(&e.id))
            .collect()
    }

    /// Canonical description of the ablation, for manifests.
    pub fn flags(&self) -> Vec<String> {
        let mut f: Vec<String> = self.disabled.iter().cloned().collect();
        if self.llm_disabled {
            f.push("LLM".into());
        }
        f
    }

    /// One positive and one negative template, uniform among enabled ones.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (Option<&ZooEntry>, Option<&ZooEntry>) {
        let pos = self.enabled(Polarity::Positive).choose(rng).copied();
        let neg = self.enabled(Polarity::Negative).choose(rng).copied();
        (pos, neg)
    }
}

/// Generations for one anchor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HardPairs {
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
    pub positive_prompt: Option<String>,
    pub negative_prompt: Option<String>,
    /// Template calls whose response yielded no items.
    pub skipped: usize,
}

fn run_template(
    entry: &ZooEntry,
    rec: &ExtractionRecord,
    chat: &dyn ChatModel,
    prompts: &PromptAssets,
) -> Result<Vec<String>> {
    let req = ChatRequest::from_template(
        chat.default_model(),
        prompts.require(&entry.id)?,
        &[
            ("utterance", rec.utterance.text.as_str()),
            ("action", rec.action.as_str()),
            ("object", rec.object.as_str()),
        ],
    )?;
    let mut items: Vec<String> = split_list(&chat.complete(&req)?)
        .into_iter()
        .map(|s| s.to_lowercase())
        .collect();
    items.truncate(entry.count);
    Ok(items)
}

/// Sample one positive and one negative template and split each response
/// into at most the template's declared number of utterances.
pub fn generate_hard_pairs<R: Rng>(
    rec: &ExtractionRecord,
    zoo: &PromptZoo,
    chat: &dyn ChatModel,
    prompts: &PromptAssets,
    rng: &mut R,
) -> Result<HardPairs> {
    let (pos, neg) = zoo.sample(rng);
    let mut out = HardPairs::default();
    if let Some(p) = pos {
        out.positives = run_template(p, rec, chat, prompts)?;
        out.positive_prompt = Some(p.id.clone());
        out.skipped += out.positives.is_empty() as usize;
    }
    if let Some(n) = neg {
        out.negatives = run_template(n, rec, chat, prompts)?;
        out.negative_prompt = Some(n.id.clone());
        out.skipped += out.negatives.is_empty() as usize;
    }
    Ok(out)
}

type PairKey = (String, String);

/// Pool records grouped by `(action, object)`.
pub struct PairIndex<'a> {
    pool: &'a [ExtractionRecord],
    groups: HashMap<PairKey, Vec<usize>>,
}

impl<'a> PairIndex<'a> {
    pub fn new(pool: &'a [ExtractionRecord]) -> Self {
        let mut groups: HashMap<PairKey, Vec<usize>> = HashMap::new();
        for (i, r) in pool.iter().enumerate() {
            groups
                .entry((r.action.clone(), r.object.clone()))
                .or_default()
                .push(i);
        }
        PairIndex { pool, groups }
    }

    pub fn group_size(&self, rec: &ExtractionRecord) -> usize {
        self.groups
            .get(&(rec.action.clone(), rec.object.clone()))
            .map_or(0, Vec::len)
    }
}

/// A uniformly chosen other member of the anchor's action-object group.
pub fn retrieve_positive<'a, R: Rng>(
    anchor: &ExtractionRecord,
    index: &PairIndex<'a>,
    rng: &mut R,
) -> Option<&'a ExtractionRecord> {
    let group = index.groups.get(&(anchor.action.clone(), anchor.object.clone()))?;
    let others: Vec<usize> = group
        .iter()
        .copied()
        .filter(|&i| index.pool[i].utterance.id != anchor.utterance.id)
        .collect();
    others.choose(rng).map(|&i| &index.pool[i])
}

/// Median-distance pick: candidates sorted by ascending distance (ties by
/// id), element at `(len - 1) / 2`.
pub fn median_by_distance<'a, T>(
    mut candidates: Vec<(f64, &'a str, T)>,
) -> Option<(f64, &'a str, T)> {
    if candidates.is_empty() {
        return None;
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mid = (candidates.len() - 1) / 2;
    Some(candidates.swap_remove(mid))
}

/// The different-pair pool record at the median cosine distance from the
/// anchor. `vectors` maps utterance text to its embedding.
pub fn retrieve_negative_with<'a>(
    anchor: &ExtractionRecord,
    pool: &'a [ExtractionRecord],
    vectors: &HashMap<&str, EmbeddingVector>,
) -> Result<&'a ExtractionRecord> {
    let a = vectors
        .get(anchor.utterance.text.as_str())
        .ok_or_else(|| Error::UnknownText(anchor.utterance.text.clone()))?;
    let mut cands = Vec::new();
    for r in pool.iter().filter(|r| r.pair() != anchor.pair()) {
        let v = vectors
            .get(r.utterance.text.as_str())
            .ok_or_else(|| Error::UnknownText(r.utterance.text.clone()))?;
        cands.push((cosine_distance(a, v)?, r.utterance.id.as_str(), r));
    }
    median_by_distance(cands)
        .map(|(_, _, r)| r)
        .ok_or_else(|| {
            Error::invalid(format!(
                "no negative candidate for `{}`: every pool record shares its pair",
                anchor.utterance.id
            ))
        })
}

pub fn retrieve_negative<'a>(
    anchor: &ExtractionRecord,
    pool: &'a [ExtractionRecord],
    emb: &dyn Embedder,
) -> Result<&'a ExtractionRecord> {
    let mut texts: Vec<&str> = vec![anchor.utterance.text.as_str()];
    texts.extend(pool.iter().map(|r| r.utterance.text.as_str()));
    let vectors = embed_unique(emb, &texts)?;
    retrieve_negative_with(anchor, pool, &vectors)
}

/// Reject refusals; otherwise rewrite a known leading phrase with a seeded
/// alternative. Text without a known phrase is returned unchanged.
pub fn diversify<R: Rng>(text: &str, lex: &Lexicon, rng: &mut R) -> Option<String> {
    let lower = text.to_lowercase();
    if lex
        .forbidden_keywords
        .iter()
        .any(|k| lower.contains(&k.to_lowercase()))
    {
        return None;
    }
    for p in &lex.diversify_patterns {
        let prefix = p.prefix.to_lowercase();
        let Some(rest) = lower.strip_prefix(&prefix) else {
            continue;
        };
        if !(rest.is_empty() || rest.starts_with(' ')) {
            continue;
        }
        let alt = p.alternatives.choose(rng)?;
        return Some(format!("{alt}{}", &text[prefix.len()..]));
    }
    Some(text.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Llm,
    Retrieved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationRecord {
    pub anchor: Utterance,
    pub positive: Utterance,
    pub negative: Utterance,
    pub pos_source: Origin,
    pub neg_source: Origin,
    /// Zoo templates behind the LLM-generated members, positive first.
    pub prompt_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurationStats {
    pub anchors: usize,
    pub dropped_no_positive: usize,
    pub dropped_no_negative: usize,
    pub rejected: usize,
    pub skipped_generations: usize,
    pub triplets: usize,
}

#[derive(Debug, Clone, Default)]
pub struct CurationOutput {
    pub records: Vec<CurationRecord>,
    pub stats: CurationStats,
}

struct Candidate {
    utt: Utterance,
    origin: Origin,
    prompt: Option<String>,
}

fn negated_intent(rec: &ExtractionRecord) -> IntentId {
    IntentId(format!("not:{}/{}", rec.action, rec.object))
}

/// Build triplets for every anchor from the cross product of its positives
/// (LLM, retrieved) and negatives (LLM, retrieved).
///
/// Candidates are deduplicated by lowercased text, so no triplet repeats a
/// text and no anchor repeats a (positive, negative) pair. Anchors left
/// without a positive or a negative are dropped.
#[allow(clippy::too_many_arguments)]
pub fn assemble_triplets(
    records: &[ExtractionRecord],
    zoo: &PromptZoo,
    chat: &dyn ChatModel,
    emb: &dyn Embedder,
    prompts: &PromptAssets,
    lex: &Lexicon,
    seed: u64,
) -> Result<CurationOutput> {
    let index = PairIndex::new(records);
    let texts: Vec<&str> = records.iter().map(|r| r.utterance.text.as_str()).collect();
    let vectors = embed_unique(emb, &texts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CurationOutput::default();

    for rec in records {
        out.stats.anchors += 1;
        let anchor = &rec.utterance;
        let mut seen: HashSet<String> = HashSet::from([anchor.text.to_lowercase()]);
        let mut positives: Vec<Candidate> = Vec::new();
        let mut negatives: Vec<Candidate> = Vec::new();

        let hard = generate_hard_pairs(rec, zoo, chat, prompts, &mut rng)?;
        out.stats.skipped_generations += hard.skipped;
        for (k, text) in hard.positives.iter().enumerate() {
            let Some(text) = diversify(text, lex, &mut rng) else {
                out.stats.rejected += 1;
                continue;
            };
            if seen.insert(text.to_lowercase()) {
                positives.push(Candidate {
                    utt: Utterance::new(
                        format!("{}::pos{k}", anchor.id),
                        text,
                        anchor.intent.clone(),
                        Split::Train,
                        Source::LlmGenerated,
                    )?,
                    origin: Origin::Llm,
                    prompt: hard.positive_prompt.clone(),
                });
            }
        }
        if let Some(p) = retrieve_positive(rec, &index, &mut rng) {
            if seen.insert(p.utterance.text.to_lowercase()) {
                let mut u = p.utterance.clone();
                u.source = Source::Retrieved;
                positives.push(Candidate {
                    utt: u,
                    origin: Origin::Retrieved,
                    prompt: None,
                });
            }
        }
        for (k, text) in hard.negatives.iter().enumerate() {
            let Some(text) = diversify(text, lex, &mut rng) else {
                out.stats.rejected += 1;
                continue;
            };
            if seen.insert(text.to_lowercase()) {
                negatives.push(Candidate {
                    utt: Utterance::new(
                        format!("{}::neg{k}", anchor.id),
                        text,
                        negated_intent(rec),
                        Split::Train,
                        Source::LlmGenerated,
                    )?,
                    origin: Origin::Llm,
                    prompt: hard.negative_prompt.clone(),
                });
            }
        }
        if index.pool.iter().any(|r| r.pair() != rec.pair()) {
            let n = retrieve_negative_with(rec, records, &vectors)?;
            if seen.insert(n.utterance.text.to_lowercase()) {
                let mut u = n.utterance.clone();
                u.source = Source::Retrieved;
                u.intent = pair_intent(&n.action, &n.object);
                negatives.push(Candidate {
                    utt: u,
                    origin: Origin::Retrieved,
                    prompt: None,
                });
            }
        }

        if positives.is_empty() {
            out.stats.dropped_no_positive += 1;
            continue;
        }
        if negatives.is_empty() {
            out.stats.dropped_no_negative += 1;
            continue;
        }
        for p in &positives {
            for n in &negatives {
                let prompt_ids = [&p.prompt, &n.prompt].into_iter().flatten().cloned().collect();
                out.records.push(CurationRecord {
                    anchor: anchor.clone(),
                    positive: p.utt.clone(),
                    negative: n.utt.clone(),
                    pos_source: p.origin,
                    neg_source: n.origin,
                    prompt_ids,
                });
            }
        }
    }
    out.stats.triplets = out.records.len();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets::{default_lexicon, default_prompts};

    fn zoo() -> PromptZoo {
        PromptZoo::from_assets(default_prompts())
    }

    #[test]
    fn ablation_parsing() {
        let mut z = zoo();
        z.disable("-P⁴,N¹,³").unwrap();
        assert_eq!(z.flags(), vec!["N1", "N3", "P4"]);
        let mut z2 = zoo();
        z2.disable("P4,N1,N3").unwrap();
        assert_eq!(z.disabled, z2.disabled);

        let mut all_p = zoo();
        all_p.disable("P*").unwrap();
        assert!(all_p.enabled(Polarity::Positive).is_empty());
        assert_eq!(all_p.enabled(Polarity::Negative).len(), 3);

        let mut llm = zoo();
        llm.disable("LLM").unwrap();
        assert_eq!(llm.sample(&mut ChaCha8Rng::seed_from_u64(0)), (None, None));

        assert!(zoo().disable("P9").is_err());
        assert!(zoo().disable("3").is_err());
    }

    #[test]
    fn disabled_templates_never_sampled() {
        let mut z = zoo();
        z.disable("P4,N1,N3").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut seen = BTreeSet::new();
        for _ in 0..1000 {
            let (p, n) = z.sample(&mut rng);
            seen.insert(p.unwrap().id.clone());
            seen.insert(n.unwrap().id.clone());
        }
        assert_eq!(
            seen.into_iter().collect::<Vec<_>>(),
            vec!["N2", "P1", "P2", "P3"]
        );
    }

    #[test]
    fn diversify_rules() {
        let lex = default_lexicon();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(diversify("As an AI language model I cannot help", lex, &mut rng), None);
        assert_eq!(diversify("book a table", lex, &mut rng).as_deref(), Some("book a table"));
        let alts = &lex
            .diversify_patterns
            .iter()
            .find(|p| p.prefix == "i do not want to")
            .unwrap()
            .alternatives;
        let out = diversify("i do not want to order pizza", lex, &mut rng).unwrap();
        let head = out.strip_suffix(" order pizza").unwrap();
        assert!(alts.iter().any(|a| a == head), "{out}");
        // a longer word sharing the prefix is not rewritten
        assert_eq!(
            diversify("i want tomatoes", lex, &mut rng).as_deref(),
            Some("i want tomatoes")
        );
    }

    fn rec(id: &str, a: &str, o: &str) -> ExtractionRecord {
        ExtractionRecord::new(id, format!("utterance {id}"), format!("to {a} {o}"), a, o)
    }

    #[test]
    fn positive_retrieval() {
        let pool = vec![rec("a", "order", "pizza"), rec("b", "order", "pizza"), rec("c", "know", "weather")];
        let idx = PairIndex::new(&pool);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(retrieve_positive(&pool[0], &idx, &mut rng).unwrap().utterance.id, "b");
        }
        assert!(retrieve_positive(&pool[2], &idx, &mut rng).is_none());
    }

    #[test]
    fn median_index() {
        let c: Vec<(f64, &str, usize)> = [0.5, 0.1, 0.4, 0.2, 0.3]
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, ["e", "a", "d", "b", "c"][i], i))
            .collect();
        assert_eq!(median_by_distance(c).unwrap().0, 0.3);
        assert_eq!(median_by_distance(vec![(0.9, "x", 0)]).unwrap().1, "x");
        // even length takes the lower middle
        let c = vec![(0.1, "a", 0), (0.2, "b", 1), (0.3, "c", 2), (0.4, "d", 3)];
        assert_eq!(median_by_distance(c).unwrap().0, 0.2);
    }
}
