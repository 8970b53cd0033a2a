use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::binary::{binary_eval, NegatedNameMode};
use super::cluster::{agglomerative, kmeans};
use super::embed_unique;
use super::prototype::{accuracy, build_prototypes};
use super::report::{EvalReport, MetricKey};
use super::triplet::{make_ori_imp_triplets, make_ori_ori_triplets, triplet_eval};
use crate::dataset::DatasetBundle;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::types::{IntentId, Split, Utterance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Triplet,
    Binary,
    Clustering,
    Multiclass,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Triplet, Task::Binary, Task::Clustering, Task::Multiclass];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Triplet => "triplet",
            Task::Binary => "binary",
            Task::Clustering => "clustering",
            Task::Multiclass => "multiclass",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSet(pub BTreeSet<Task>);

impl Default for TaskSet {
    fn default() -> Self {
        TaskSet(Task::ALL.into_iter().collect())
    }
}

impl TaskSet {
    /// Parse a comma-separated selector such as `triplet,binary` or `all`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut set = BTreeSet::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                return Ok(TaskSet::default());
            }
            let task = Task::ALL
                .into_iter()
                .find(|t| t.as_str().eq_ignore_ascii_case(part))
                .ok_or_else(|| Error::invalid(format!("unknown task `{part}`")))?;
            set.insert(task);
        }
        if set.is_empty() {
            return Err(Error::invalid("empty task selector"));
        }
        Ok(TaskSet(set))
    }

    pub fn contains(&self, t: Task) -> bool {
        self.0.contains(&t)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalOptions {
    pub tasks: TaskSet,
    pub seed: u64,
    pub shots: usize,
    pub negated_mode: NegatedNameMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            tasks: TaskSet::default(),
            seed: 0,
            shots: 10,
            negated_mode: NegatedNameMode::First,
        }
    }
}

fn gold_indices(utts: &[Utterance]) -> (Vec<usize>, usize) {
    let mut ids: BTreeMap<&IntentId, usize> = BTreeMap::new();
    for u in utts {
        let next = ids.len();
        ids.entry(&u.intent).or_insert(next);
    }
    (utts.iter().map(|u| ids[&u.intent]).collect(), ids.len())
}

/// Run the selected tasks over `bundle` and collect the registry metrics.
///
/// Clustering uses `k` = number of gold intents in the split. Multi-class
/// prototypes for the 10-shot setting are drawn from the `train` split;
/// without one, the 10-shot metrics are skipped.
pub fn run_eval(
    bundle: &DatasetBundle,
    emb: &dyn Embedder,
    model_id: &str,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let mut report = EvalReport::new(model_id);
    let originals = bundle.split(Split::Original);
    let negations = bundle.split(Split::Negation);
    let implicatures = bundle.split(Split::Implicature);

    if opts.tasks.contains(Task::Triplet) {
        let oo = make_ori_ori_triplets(originals, negations, opts.seed)?;
        report.details.insert("triplet.ori-ori.skipped".into(), (oo.skipped_no_negation + oo.skipped_no_positive) as f64);
        if !oo.triplets.is_empty() {
            let r = triplet_eval(&oo.triplets, emb)?;
            report.set(MetricKey::OriOriHard, r.t_hard);
            report.set(MetricKey::OriOriEasy, r.t_easy);
            report.details.insert("triplet.ori-ori.n".into(), r.n_triplets as f64);
        }
        let oi = make_ori_imp_triplets(originals, implicatures, negations, opts.seed)?;
        if !oi.triplets.is_empty() {
            let r = triplet_eval(&oi.triplets, emb)?;
            report.set(MetricKey::OriImpHard, r.t_hard);
            report.set(MetricKey::OriImpEasy, r.t_easy);
            report.details.insert("triplet.ori-imp.n".into(), r.n_triplets as f64);
        }
    }

    if opts.tasks.contains(Task::Binary) {
        let all: Vec<Utterance> = [originals, implicatures, negations].concat();
        let r = binary_eval(&all, &bundle.intents, emb, opts.negated_mode)?;
        for (split, key) in [
            (Split::Original, MetricKey::BinaryOri),
            (Split::Implicature, MetricKey::BinaryImp),
            (Split::Negation, MetricKey::BinaryNeg),
        ] {
            if let Some(v) = r.rate(split) {
                report.set(key, v);
            }
        }
    }

    if opts.tasks.contains(Task::Clustering) {
        for (utts, km, agg) in [
            (originals, MetricKey::OrigKMeans, MetricKey::OrigAgg),
            (implicatures, MetricKey::ImpKMeans, MetricKey::ImpAgg),
        ] {
            if utts.is_empty() {
                continue;
            }
            let (gold, k) = gold_indices(utts);
            let texts: Vec<&str> = utts.iter().map(|u| u.text.as_str()).collect();
            let table = embed_unique(emb, &texts)?;
            let vectors: Vec<_> = texts.iter().map(|t| table[t].clone()).collect();
            let r = kmeans(&vectors, k, opts.seed)?.with_nmi(&gold)?;
            report.set(km, r.nmi.unwrap_or_default());
            let r = agglomerative(&vectors, k)?.with_nmi(&gold)?;
            report.set(agg, r.nmi.unwrap_or_default());
        }
    }

    if opts.tasks.contains(Task::Multiclass) {
        let zero = build_prototypes(&[], &bundle.intents, emb, 0, opts.seed)?;
        let train: Vec<(Utterance, IntentId)> = bundle
            .split(Split::Train)
            .iter()
            .map(|u| (u.clone(), u.intent.clone()))
            .collect();
        let few = if train.is_empty() {
            log::warn!("no train split; skipping {}-shot classification", opts.shots);
            None
        } else {
            // Only classes with training data can form few-shot prototypes.
            let present: BTreeSet<&IntentId> = train.iter().map(|(_, c)| c).collect();
            let labels: Vec<_> = bundle
                .intents
                .iter()
                .filter(|l| present.contains(&l.id))
                .cloned()
                .collect();
            Some(build_prototypes(&train, &labels, emb, opts.shots, opts.seed)?)
        };
        for (utts, k0, k10) in [
            (originals, MetricKey::OrigZeroShot, MetricKey::OrigTenShot),
            (implicatures, MetricKey::ImpZeroShot, MetricKey::ImpTenShot),
        ] {
            if utts.is_empty() {
                continue;
            }
            report.set(k0, accuracy(&zero, utts, emb)?);
            if let Some(few) = &few {
                report.set(k10, accuracy(few, utts, emb)?);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_selector() {
        assert_eq!(TaskSet::parse("all").unwrap(), TaskSet::default());
        let t = TaskSet::parse("triplet, Binary").unwrap();
        assert!(t.contains(Task::Triplet) && t.contains(Task::Binary));
        assert!(!t.contains(Task::Clustering));
        assert!(TaskSet::parse("bogus").is_err());
        assert!(TaskSet::parse("").is_err());
    }
}
