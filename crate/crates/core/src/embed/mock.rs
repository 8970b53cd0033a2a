use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::types::EmbeddingVector;

/// Deterministic unit vector derived from `(text, dim, seed)`.
///
/// The text and seed are hashed into a ChaCha stream from which `dim`
/// standard normals are drawn, so distinct texts land on effectively
/// independent directions.
pub fn mock_embed(text: &str, dim: usize, seed: u64) -> EmbeddingVector {
    let dim = dim.max(2);
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((dim as u64).to_le_bytes());
    hasher.update(text.as_bytes());
    let mut rng = ChaCha8Rng::from_seed(hasher.finalize().into());

    let mut values: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        values[0] = 1.0;
    } else {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    EmbeddingVector::new(values, format!("mock-d{dim}-s{seed}"), "").expect("finite by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn deterministic_and_seed_sensitive() {
        assert_eq!(mock_embed("abc", 16, 1), mock_embed("abc", 16, 1));
        assert_ne!(mock_embed("abc", 16, 1).values(), mock_embed("abc", 16, 2).values());
        assert_ne!(mock_embed("abc", 16, 1).values(), mock_embed("abd", 16, 1).values());
    }

    #[test]
    fn unit_norm() {
        let v = mock_embed("hello", 64, 0);
        assert_eq!(v.dim(), 64);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_collisions_over_a_thousand_texts() {
        let mut seen = HashSet::new();
        for i in 0..1000 {
            let v = mock_embed(&format!("random text {i} {}", i * 7919), 64, 0);
            let key: Vec<u64> = v.values().iter().map(|x| x.to_bits()).collect();
            assert!(seen.insert(key));
        }
    }
}
