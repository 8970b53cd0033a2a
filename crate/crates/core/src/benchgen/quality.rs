//! Surface-similarity metrics against reference utterances.

use std::collections::{BTreeMap, HashMap};

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{IntentId, Split, Utterance};

const BLEU_MAX_N: usize = 4;
const BLEU_EPSILON: f64 = 1e-9;

/// Lowercased word tokens; apostrophes inside words are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Sentence-level BLEU against several references.
///
/// Clipped n-gram precision up to order `min(4, |candidate|)`, zero match
/// counts replaced by 1e-9, uniform weights, brevity penalty against the
/// reference length closest to the candidate (shorter wins ties).
pub fn bleu(candidate: &[String], references: &[Vec<String>]) -> f64 {
    if candidate.is_empty() || references.is_empty() {
        return 0.0;
    }
    let order = BLEU_MAX_N.min(candidate.len());
    let mut log_sum = 0.0;
    for n in 1..=order {
        let cand = ngram_counts(candidate, n);
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for r in references {
            for (g, c) in ngram_counts(r, n) {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(c);
            }
        }
        let total: usize = cand.values().sum();
        let matched: usize = cand
            .iter()
            .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if matched == 0 {
            BLEU_EPSILON / total as f64
        } else {
            matched as f64 / total as f64
        };
        log_sum += p.ln();
    }
    let c = candidate.len() as f64;
    let r = references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| ((len as i64 - candidate.len() as i64).abs(), len))
        .unwrap() as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    bp * (log_sum / order as f64).exp()
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        prev = cur;
    }
    prev[b.len()]
}

/// ROUGE-L F1, best over references.
pub fn rouge_l(candidate: &[String], references: &[Vec<String>]) -> f64 {
    references
        .iter()
        .map(|r| {
            let l = lcs_len(candidate, r) as f64;
            if l == 0.0 {
                return 0.0;
            }
            let p = l / candidate.len() as f64;
            let rc = l / r.len() as f64;
            2.0 * p * rc / (p + rc)
        })
        .fold(0.0, f64::max)
}

fn stemmer() -> Stemmer {
    Stemmer::create(Algorithm::English)
}

/// Unigram alignment: exact matches first, then stem matches, each
/// candidate token taking the leftmost free reference token.
fn align(candidate: &[String], reference: &[String], stem: &Stemmer) -> Vec<(usize, usize)> {
    let mut used = vec![false; reference.len()];
    let mut pairs: Vec<Option<usize>> = vec![None; candidate.len()];
    for (i, c) in candidate.iter().enumerate() {
        if let Some(j) = (0..reference.len()).find(|&j| !used[j] && &reference[j] == c) {
            used[j] = true;
            pairs[i] = Some(j);
        }
    }
    let cs: Vec<String> = candidate.iter().map(|t| stem.stem(t).into_owned()).collect();
    let rs: Vec<String> = reference.iter().map(|t| stem.stem(t).into_owned()).collect();
    for i in 0..candidate.len() {
        if pairs[i].is_some() {
            continue;
        }
        if let Some(j) = (0..reference.len()).find(|&j| !used[j] && rs[j] == cs[i]) {
            used[j] = true;
            pairs[i] = Some(j);
        }
    }
    pairs
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect()
}

fn meteor_single(candidate: &[String], reference: &[String], stem: &Stemmer) -> f64 {
    let pairs = align(candidate, reference, stem);
    let m = pairs.len();
    if m == 0 {
        return 0.0;
    }
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    let mut chunks = 1;
    for w in pairs.windows(2) {
        if !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1) {
            chunks += 1;
        }
    }
    let penalty = if chunks > 1 {
        0.5 * (chunks as f64 / m as f64).powi(3)
    } else {
        0.0
    };
    fmean * (1.0 - penalty)
}

/// Simplified METEOR (exact and stem stages only), best over references.
///
/// The fragmentation penalty applies only when the alignment breaks into
/// more than one chunk.
pub fn meteor(candidate: &[String], references: &[Vec<String>]) -> f64 {
    let stem = stemmer();
    references
        .iter()
        .map(|r| meteor_single(candidate, r, &stem))
        .fold(0.0, f64::max)
}

/// Which reference utterances each candidate is scored against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefScope {
    #[default]
    PerIntent,
    Global,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub bleu: f64,
    pub rouge_l: f64,
    pub meteor: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub per_split: BTreeMap<Split, QualityScores>,
    /// Generated utterances whose intent has no reference.
    pub excluded: usize,
}

/// Average BLEU / ROUGE-L / METEOR per split of `generated` against
/// `reference`.
pub fn quality_metrics(
    generated: &[Utterance],
    reference: &[Utterance],
    scope: RefScope,
) -> Result<QualityReport> {
    if reference.is_empty() {
        return Err(Error::invalid("quality metrics need a non-empty reference set"));
    }
    let mut by_intent: HashMap<&IntentId, Vec<Vec<String>>> = HashMap::new();
    let all: Vec<Vec<String>> = reference.iter().map(|u| tokenize(&u.text)).collect();
    for (u, toks) in reference.iter().zip(&all) {
        by_intent.entry(&u.intent).or_default().push(toks.clone());
    }
    let stem = stemmer();
    let mut report = QualityReport::default();
    for u in generated {
        let refs = match scope {
            RefScope::Global => &all,
            RefScope::PerIntent => match by_intent.get(&u.intent) {
                Some(r) => r,
                None => {
                    report.excluded += 1;
                    continue;
                }
            },
        };
        let cand = tokenize(&u.text);
        let s = report.per_split.entry(u.split).or_default();
        s.bleu += bleu(&cand, refs);
        s.rouge_l += rouge_l(&cand, refs);
        s.meteor += refs
            .iter()
            .map(|r| meteor_single(&cand, r, &stem))
            .fold(0.0, f64::max);
        s.n += 1;
    }
    for s in report.per_split.values_mut() {
        let n = s.n as f64;
        s.bleu /= n;
        s.rouge_l /= n;
        s.meteor /= n;
    }
    Ok(report)
}
