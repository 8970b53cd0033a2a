use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Backend, PreparedInput};
use crate::error::{Error, Result};
use crate::io::read_jsonl;

/// One line of a precomputed embedding store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub text: String,
    pub vector: Vec<f64>,
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub instruction: String,
}

/// Lookup table of precomputed vectors keyed by raw text.
pub struct FileBackend {
    vectors: HashMap<String, Vec<f64>>,
}

impl FileBackend {
    /// Load records matching `model` (any model when empty) and `instruction`.
    pub fn load(path: &Path, model: &str, instruction: &str) -> Result<Self> {
        let records: Vec<FileRecord> = read_jsonl(path)?;
        Ok(Self::from_records(records, model, instruction))
    }

    pub fn from_records(records: Vec<FileRecord>, model: &str, instruction: &str) -> Self {
        let vectors = records
            .into_iter()
            .filter(|r| (model.is_empty() || r.model == model) && r.instruction == instruction)
            .map(|r| (r.text, r.vector))
            .collect();
        FileBackend { vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl Backend for FileBackend {
    fn fetch(&self, inputs: &[PreparedInput<'_>]) -> Result<Vec<Vec<f64>>> {
        inputs
            .iter()
            .map(|i| {
                self.vectors
                    .get(i.text)
                    .cloned()
                    .ok_or_else(|| Error::UnknownText(i.text.to_string()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{Embedder, EmbeddingProviderConfig, Provider};
    use std::io::Write;

    #[test]
    fn file_provider_lookup_and_unknown_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.jsonl");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, r#"{{"text":"hi","vector":[1.0,0.0],"model":"m","instruction":""}}"#).unwrap();
        writeln!(f, r#"{{"text":"yo","vector":[0.0,1.0],"model":"other","instruction":""}}"#).unwrap();
        drop(f);
        let p = Provider::from_config(&EmbeddingProviderConfig::file(&path, "m")).unwrap();
        assert_eq!(p.embed_one("hi").unwrap().values(), &[1.0, 0.0]);
        let err = p.embed_one("yo").unwrap_err();
        assert!(matches!(err, Error::UnknownText(_)));
        assert!(err.to_string().contains("unknown text"));
    }
}
