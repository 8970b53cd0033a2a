//! On-disk dataset bundles: a directory holding `intents.jsonl` plus one
//! `<split>.jsonl` per split.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_jsonl, write_jsonl};
use crate::types::{IntentId, IntentLabel, Split, Utterance};

pub const INTENTS_FILE: &str = "intents.jsonl";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetBundle {
    pub intents: Vec<IntentLabel>,
    pub splits: BTreeMap<Split, Vec<Utterance>>,
}

impl DatasetBundle {
    pub fn new(intents: Vec<IntentLabel>) -> Self {
        DatasetBundle {
            intents,
            splits: BTreeMap::new(),
        }
    }

    pub fn split(&self, split: Split) -> &[Utterance] {
        self.splits.get(&split).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn push(&mut self, u: Utterance) {
        self.splits.entry(u.split).or_default().push(u);
    }

    pub fn label(&self, id: &IntentId) -> Option<&IntentLabel> {
        self.intents.iter().find(|l| &l.id == id)
    }

    /// Every utterance resolves to a known intent, sits in the split file
    /// matching its own `split`, and ids are unique.
    pub fn validate(&self) -> Result<()> {
        let mut known = HashSet::new();
        for l in &self.intents {
            l.validate()?;
            if !known.insert(&l.id) {
                return Err(Error::invalid(format!("duplicate intent id `{}`", l.id)));
            }
        }
        let mut ids = HashSet::new();
        for (split, utts) in &self.splits {
            for u in utts {
                u.validate()?;
                if u.split != *split {
                    return Err(Error::invalid(format!(
                        "utterance `{}` has split `{}` but is stored under `{split}`",
                        u.id, u.split
                    )));
                }
                if !known.contains(&u.intent) {
                    return Err(Error::invalid(format!(
                        "utterance `{}` references unknown intent `{}`",
                        u.id, u.intent
                    )));
                }
                if !ids.insert(u.id.as_str()) {
                    return Err(Error::invalid(format!("duplicate utterance id `{}`", u.id)));
                }
            }
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let intents_path = dir.join(INTENTS_FILE);
        if !intents_path.exists() {
            return Err(Error::invalid(format!(
                "dataset bundle {} has no {INTENTS_FILE}",
                dir.display()
            )));
        }
        let mut bundle = DatasetBundle::new(read_jsonl(&intents_path)?);
        for split in Split::ALL {
            let path = dir.join(format!("{}.jsonl", split.as_str()));
            if path.exists() {
                bundle.splits.insert(split, read_jsonl(&path)?);
            }
        }
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_jsonl(&dir.join(INTENTS_FILE), &self.intents)?;
        for (split, utts) in &self.splits {
            write_jsonl(&dir.join(format!("{}.jsonl", split.as_str())), utts)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Source;

    fn bundle() -> DatasetBundle {
        let mut b = DatasetBundle::new(vec![IntentLabel::new("pay", "pay bill", &["not pay bill"])]);
        b.push(Utterance::new("u1", "pay my bill", "pay", Split::Original, Source::Dataset).unwrap());
        b.push(
            Utterance::new("u1::neg", "i don't want to pay", "pay", Split::Negation, Source::LlmGenerated)
                .unwrap(),
        );
        b
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = bundle();
        b.save(dir.path()).unwrap();
        assert_eq!(DatasetBundle::load(dir.path()).unwrap(), b);
    }

    #[test]
    fn unknown_intent_rejected() {
        let mut b = bundle();
        b.push(Utterance::new("u2", "hello", "greet", Split::Original, Source::Dataset).unwrap());
        assert!(b.validate().is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut b = bundle();
        b.push(Utterance::new("u1", "pay it", "pay", Split::Original, Source::Dataset).unwrap());
        assert!(b.validate().is_err());
    }
}
