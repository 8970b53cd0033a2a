use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::types::EmbeddingVector;

pub fn text_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    provider_id: String,
    instruction: String,
    digest: String,
}

#[derive(Serialize, Deserialize)]
struct Line {
    provider_id: String,
    instruction: String,
    digest: String,
    vector: Vec<f64>,
}

/// Association from (provider, instruction, text digest) to a vector.
///
/// Reads are concurrent; writes are serialized and appended to the backing
/// JSONL file when one is attached.
pub struct EmbeddingCache {
    entries: RwLock<HashMap<Key, EmbeddingVector>>,
    sink: Mutex<Option<File>>,
    path: Option<PathBuf>,
}

impl EmbeddingCache {
    pub fn in_memory() -> Self {
        EmbeddingCache {
            entries: RwLock::new(HashMap::new()),
            sink: Mutex::new(None),
            path: None,
        }
    }

    /// Open (or create) a cache file and load its entries.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: Line = serde_json::from_str(&line).map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
                let v = EmbeddingVector::new(rec.vector, rec.provider_id.clone(), rec.instruction.clone())?;
                entries.insert(
                    Key {
                        provider_id: rec.provider_id,
                        instruction: rec.instruction,
                        digest: rec.digest,
                    },
                    v,
                );
            }
        } else if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(EmbeddingCache {
            entries: RwLock::new(entries),
            sink: Mutex::new(Some(file)),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, provider_id: &str, instruction: &str, text: &str) -> Option<EmbeddingVector> {
        let key = Key {
            provider_id: provider_id.to_string(),
            instruction: instruction.to_string(),
            digest: text_digest(text),
        };
        self.entries.read().get(&key).cloned()
    }

    pub fn put(
        &self,
        provider_id: &str,
        instruction: &str,
        text: &str,
        vector: &EmbeddingVector,
    ) -> Result<()> {
        let key = Key {
            provider_id: provider_id.to_string(),
            instruction: instruction.to_string(),
            digest: text_digest(text),
        };
        let mut sink = self.sink.lock();
        if let Some(file) = sink.as_mut() {
            let line = Line {
                provider_id: key.provider_id.clone(),
                instruction: key.instruction.clone(),
                digest: key.digest.clone(),
                vector: vector.values().to_vec(),
            };
            serde_json::to_writer(&mut *file, &line)?;
            file.write_all(b"\n")?;
        }
        self.entries.write().insert(key, vector.clone());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::mock_embed;

    #[test]
    fn persistent_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let v = mock_embed("some text", 32, 7).with_values(
            mock_embed("some text", 32, 7).values().iter().map(|x| x / 3.0).collect(),
        )
        .unwrap();
        {
            let c = EmbeddingCache::open(&path).unwrap();
            c.put("p", "instr", "some text", &v).unwrap();
        }
        let c = EmbeddingCache::open(&path).unwrap();
        let back = c.get("p", "instr", "some text").unwrap();
        for (a, b) in back.values().iter().zip(v.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(c.get("p", "other", "some text").is_none());
        assert!(c.get("q", "instr", "some text").is_none());
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            text_digest("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
