#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use semtk_core::embed::Embedder;
use semtk_core::{EmbeddingVector, Error, Result};

/// Embedder backed by a fixed text → vector table.
pub struct TableEmbedder {
    id: String,
    map: HashMap<String, Vec<f64>>,
}

impl TableEmbedder {
    pub fn new(id: &str) -> Self {
        TableEmbedder {
            id: id.to_string(),
            map: HashMap::new(),
        }
    }

    pub fn insert(&mut self, text: impl Into<String>, v: Vec<f64>) {
        self.map.insert(text.into(), v);
    }

    pub fn get(&self, text: &str) -> &[f64] {
        &self.map[text]
    }
}

impl Embedder for TableEmbedder {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn instruction(&self) -> &str {
        ""
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        texts
            .iter()
            .map(|t| {
                let v = self.map.get(*t).ok_or_else(|| Error::UnknownText(t.to_string()))?;
                EmbeddingVector::new(v.clone(), self.id.clone(), "")
            })
            .collect()
    }
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Cosine distance as half the squared distance between unit vectors.
pub fn oracle_distance(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (unit(a), unit(b));
    0.5 * a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

pub fn oracle_triplet(a: &[f64], p: &[f64], n: &[f64]) -> (bool, bool) {
    (
        oracle_distance(a, p) < oracle_distance(a, n),
        oracle_distance(p, a) < oracle_distance(p, n),
    )
}

/// NMI from an explicit contingency table.
pub fn oracle_nmi(x: &[usize], y: &[usize]) -> f64 {
    let kx = x.iter().max().unwrap() + 1;
    let ky = y.iter().max().unwrap() + 1;
    let n = x.len() as f64;
    let mut table = vec![vec![0.0f64; ky]; kx];
    for (&i, &j) in x.iter().zip(y) {
        table[i][j] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..ky).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let h = |m: &[f64]| -> f64 { m.iter().filter(|&&c| c > 0.0).map(|&c| -(c / n) * (c / n).ln()).sum() };
    let (hx, hy) = (h(&rows), h(&cols));
    if hx == 0.0 && hy == 0.0 {
        return 1.0;
    }
    let mut mi = 0.0;
    for i in 0..kx {
        for j in 0..ky {
            let c = table[i][j];
            if c > 0.0 {
                mi += c / n * (n * c / (rows[i] * cols[j])).ln();
            }
        }
    }
    (2.0 * mi / (hx + hy)).clamp(0.0, 1.0)
}

/// Single-pass raw-sum form of Pearson's r.
pub fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    Some((n * sxy - sx * sy) / den)
}

/// The candidate whose rank under (distance, id) ordering is `(len-1)/2`,
/// found by counting rather than sorting.
pub fn oracle_median<'a>(cands: &[(f64, &'a str)]) -> &'a str {
    let target = (cands.len() - 1) / 2;
    for (i, &(d, id)) in cands.iter().enumerate() {
        let rank = cands
            .iter()
            .enumerate()
            .filter(|&(j, &(dj, idj))| j != i && (dj < d || (dj == d && idj < id)))
            .count();
        if rank == target {
            return id;
        }
    }
    unreachable!("ranks are a permutation")
}

/// Synthetic intent geometry: intent directions live in the first half of
/// the space, topic directions in the second half.
pub struct Synthetic {
    pub dim: usize,
    pub intents: Vec<Vec<f64>>,
    pub weight: f64,
    pub noise: f64,
}

impl Synthetic {
    pub fn new(rng: &mut ChaCha8Rng, dim: usize, n_intents: usize) -> Self {
        let half = dim / 2;
        let intents = (0..n_intents)
            .map(|_| {
                let mut v = vec![0.0; dim];
                let g = unit(&gaussian(rng, half));
                v[..half].copy_from_slice(&g);
                v
            })
            .collect();
        Synthetic {
            dim,
            intents,
            weight: 0.6,
            noise: 0.05,
        }
    }

    pub fn topic(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let half = self.dim / 2;
        let mut v = vec![0.0; self.dim];
        v[half..].copy_from_slice(&unit(&gaussian(rng, self.dim - half)));
        v
    }

    /// `normalize(topic + sign * weight * intent + noise)`.
    pub fn utterance(&self, rng: &mut ChaCha8Rng, intent: usize, topic: &[f64], sign: f64) -> Vec<f64> {
        let mu = &self.intents[intent];
        let v: Vec<f64> = (0..self.dim)
            .map(|d| {
                let e: f64 = StandardNormal.sample(&mut *rng);
                topic[d] + sign * self.weight * mu[d] + self.noise * e
            })
            .collect();
        unit(&v)
    }
}

pub fn pick<T: Clone>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.gen_range(0..xs.len())].clone()
}
