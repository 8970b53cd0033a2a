//! Human-annotation sampling and vote aggregation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{IntentId, IntentLabel, Split, Utterance};

pub const QUESTION_1: &str = "Can the utterance imply the intent?";
pub const QUESTION_2: &str = "If yes, is it conveyed explicitly?";
const REQUIRED_VOTES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unsure,
}

impl Answer {
    pub fn parse(s: &str) -> Option<Answer> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" | "y" => Some(Answer::Yes),
            "no" | "n" => Some(Answer::No),
            "unsure" | "u" | "?" | "" => Some(Answer::Unsure),
            _ => None,
        }
    }
}

/// One sheet row; `q1`/`q2` are left blank for annotators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub item_id: String,
    pub text: String,
    pub intent_name: String,
    #[serde(skip)]
    pub split: Option<Split>,
}

/// Draw `per_pool` items from each pool without replacement and shuffle
/// the combined sheet.
pub fn sample_for_annotation(
    pools: &[&[Utterance]],
    labels: &[IntentLabel],
    per_pool: usize,
    seed: u64,
) -> Result<Vec<AnnotationRow>> {
    let names: HashMap<&IntentId, &str> = labels.iter().map(|l| (&l.id, l.name.as_str())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(per_pool * pools.len());
    for (p, pool) in pools.iter().enumerate() {
        if pool.len() < per_pool {
            return Err(Error::invalid(format!(
                "pool {p} has {} utterances, fewer than {per_pool}",
                pool.len()
            )));
        }
        for u in pool.choose_multiple(&mut rng, per_pool) {
            rows.push(AnnotationRow {
                item_id: u.id.clone(),
                text: u.text.clone(),
                intent_name: names.get(&u.intent).copied().unwrap_or(u.intent.as_str()).to_string(),
                split: Some(u.split),
            });
        }
    }
    rows.shuffle(&mut rng);
    Ok(rows)
}

/// Write the sheet as CSV with columns `item_id,text,intent_name,q1,q2`;
/// the question columns carry empty answer slots.
pub fn write_sheet(path: &Path, rows: &[AnnotationRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["item_id", "text", "intent_name", "q1", "q2"])?;
    for r in rows {
        w.write_record([r.item_id.as_str(), &r.text, &r.intent_name, "", ""])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub item_id: String,
    pub annotator_id: String,
    pub q1: Answer,
    pub q2: Answer,
}

/// Read responses from CSV with columns `item_id,annotator_id,q1,q2`.
pub fn read_responses(path: &Path) -> Result<Vec<Annotation>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let parse = |k: usize| {
            Answer::parse(field(k)).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("bad answer `{}`", field(k)),
            })
        };
        out.push(Annotation {
            item_id: field(0).to_string(),
            annotator_id: field(1).to_string(),
            q1: parse(2)?,
            q2: parse(3)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PoolStats {
    /// Items with at least three annotations.
    pub retained: usize,
    pub filtered: usize,
    /// Retained items whose Q1 majority is yes.
    pub q1_yes: usize,
    /// Among Q1-yes items, those whose Q2 majority is yes.
    pub q2_yes: usize,
    /// Among Q1-yes items, those with a yes or no Q2 majority.
    pub q2_decided: usize,
    pub q1_unanimous: usize,
    pub q2_unanimous: usize,
}

impl PoolStats {
    pub fn q1_rate(&self) -> Option<f64> {
        (self.retained > 0).then(|| self.q1_yes as f64 / self.retained as f64)
    }

    pub fn q2_rate(&self) -> Option<f64> {
        (self.q2_decided > 0).then(|| self.q2_yes as f64 / self.q2_decided as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationStats {
    pub per_split: BTreeMap<Split, PoolStats>,
    /// Majority per retained item; `None` when no answer has two votes.
    pub majority: BTreeMap<String, (Option<Answer>, Option<Answer>)>,
    pub q1_agreement: f64,
    pub q2_agreement: f64,
}

fn majority(votes: &[Answer]) -> Option<Answer> {
    [Answer::Yes, Answer::No, Answer::Unsure]
        .into_iter()
        .find(|a| votes.iter().filter(|v| *v == a).count() * 2 > votes.len())
}

fn unanimous(votes: &[Answer]) -> bool {
    votes.windows(2).all(|w| w[0] == w[1])
}

/// Aggregate votes: items with fewer than three annotations are filtered;
/// the majority of three decides; agreement is the fraction of retained
/// items whose three answers are identical.
pub fn annotation_stats(
    responses: &[Annotation],
    item_split: &HashMap<String, Split>,
) -> Result<AnnotationStats> {
    let mut by_item: BTreeMap<&str, Vec<&Annotation>> = BTreeMap::new();
    for r in responses {
        by_item.entry(&r.item_id).or_default().push(r);
    }
    let mut stats = AnnotationStats::default();
    let (mut retained, mut q1_same, mut q2_same) = (0usize, 0usize, 0usize);
    for (item, votes) in by_item {
        let split = *item_split
            .get(item)
            .ok_or_else(|| Error::invalid(format!("annotated item `{item}` is not on the sheet")))?;
        let pool = stats.per_split.entry(split).or_default();
        if votes.len() < REQUIRED_VOTES {
            pool.filtered += 1;
            continue;
        }
        pool.retained += 1;
        retained += 1;
        let q1: Vec<Answer> = votes.iter().map(|v| v.q1).collect();
        let q2: Vec<Answer> = votes.iter().map(|v| v.q2).collect();
        let (m1, m2) = (majority(&q1), majority(&q2));
        if unanimous(&q1) {
            pool.q1_unanimous += 1;
            q1_same += 1;
        }
        if unanimous(&q2) {
            pool.q2_unanimous += 1;
            q2_same += 1;
        }
        if m1 == Some(Answer::Yes) {
            pool.q1_yes += 1;
            match m2 {
                Some(Answer::Yes) => {
                    pool.q2_yes += 1;
                    pool.q2_decided += 1;
                }
                Some(Answer::No) => pool.q2_decided += 1,
                _ => {}
            }
        }
        stats.majority.insert(item.to_string(), (m1, m2));
    }
    // Sheet items nobody annotated are also filtered.
    let annotated: HashSet<&str> = responses.iter().map(|r| r.item_id.as_str()).collect();
    for (item, split) in item_split {
        if !annotated.contains(item.as_str()) {
            stats.per_split.entry(*split).or_default().filtered += 1;
        }
    }
    if retained > 0 {
        stats.q1_agreement = q1_same as f64 / retained as f64;
        stats.q2_agreement = q2_same as f64 / retained as f64;
    }
    Ok(stats)
}

/// `"k / n (p%)"`, with whole percentages printed without decimals.
pub fn format_count(k: usize, n: usize) -> String {
    if n == 0 {
        return "-".into();
    }
    let p = 100.0 * k as f64 / n as f64;
    let pct = format!("{p:.2}");
    let pct = pct.strip_suffix(".00").unwrap_or(&pct).to_string();
    format!("{k} / {n} ({pct}%)")
}

/// Two-row markdown summary (Q1 conveys intent, Q2 explicit) over the
/// original, negation and implicature pools. Q2 is not reported for
/// negations, which by construction should not convey the intent.
pub fn render_table(stats: &AnnotationStats) -> String {
    let cols = [Split::Original, Split::Negation, Split::Implicature];
    let get = |s: Split| stats.per_split.get(&s).copied().unwrap_or_default();
    let mut out = String::from("| question | original | negation | implicature |\n|---|---|---|---|\n");
    out.push_str("| Q1: convey intent? |");
    for s in cols {
        let p = get(s);
        out.push_str(&format!(" {} |", format_count(p.q1_yes, p.retained)));
    }
    out.push_str("\n| Q2: explicitly conveyed? |");
    for s in cols {
        let p = get(s);
        let cell = if s == Split::Negation {
            "-".to_string()
        } else {
            format_count(p.q2_yes, p.q2_decided)
        };
        out.push_str(&format!(" {cell} |"));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Source;

    fn vote(item: &str, who: &str, q1: Answer, q2: Answer) -> Annotation {
        Annotation {
            item_id: item.into(),
            annotator_id: who.into(),
            q1,
            q2,
        }
    }

    #[test]
    fn majority_and_filtering() {
        use Answer::*;
        let rs = vec![
            vote("a", "1", Yes, Yes),
            vote("a", "2", Yes, No),
            vote("a", "3", No, Yes),
            vote("b", "1", Yes, Yes),
            vote("b", "2", Yes, Yes),
        ];
        let splits: HashMap<String, Split> =
            [("a".to_string(), Split::Original), ("b".to_string(), Split::Original)].into();
        let s = annotation_stats(&rs, &splits).unwrap();
        let p = s.per_split[&Split::Original];
        assert_eq!((p.retained, p.filtered, p.q1_yes), (1, 1, 1));
        assert_eq!(s.majority["a"], (Some(Yes), Some(Yes)));
        assert_eq!(p.q1_unanimous, 0);
        assert_eq!(s.q1_agreement, 0.0);
    }

    #[test]
    fn three_way_split_has_no_majority() {
        use Answer::*;
        assert_eq!(majority(&[Yes, No, Unsure]), None);
        assert_eq!(majority(&[Unsure, Unsure, No]), Some(Unsure));
    }

    #[test]
    fn format_counts() {
        assert_eq!(format_count(59, 59), "59 / 59 (100%)");
        assert_eq!(format_count(9, 59), "9 / 59 (15.25%)");
        assert_eq!(format_count(15, 40), "15 / 40 (37.50%)");
    }

    fn pool(prefix: &str, n: usize, split: Split) -> Vec<Utterance> {
        (0..n)
            .map(|i| Utterance::new(format!("{prefix}{i}"), format!("text {i}"), "x", split, Source::Dataset).unwrap())
            .collect()
    }

    #[test]
    fn sampling_counts_and_determinism() {
        let (a, b, c) = (
            pool("o", 70, Split::Original),
            pool("n", 65, Split::Negation),
            pool("i", 80, Split::Implicature),
        );
        let labels = vec![IntentLabel::new("x", "do x", &["not x"])];
        let s1 = sample_for_annotation(&[&a, &b, &c], &labels, 60, 5).unwrap();
        let s2 = sample_for_annotation(&[&a, &b, &c], &labels, 60, 5).unwrap();
        assert_eq!(s1.len(), 180);
        assert_eq!(s1, s2);
        assert_eq!(s1[0].intent_name, "do x");
        assert!(sample_for_annotation(&[&a, &b, &c], &labels, 0, 5).unwrap().is_empty());
        assert!(sample_for_annotation(&[&a, &b, &c], &labels, 66, 5).is_err());
    }

    #[test]
    fn sheet_csv_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sheet.csv");
        let rows = vec![AnnotationRow {
            item_id: "u1".into(),
            text: "hello, there".into(),
            intent_name: "greet".into(),
            split: None,
        }];
        write_sheet(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "item_id,text,intent_name,q1,q2\nu1,\"hello, there\",greet,,\n");
    }
}
