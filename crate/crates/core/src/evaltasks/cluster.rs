//! k-means and Ward agglomerative clustering over L2-normalized embeddings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::l2_normalize_slice;
use crate::types::EmbeddingVector;

pub const KMEANS_MAX_ITER: usize = 300;
pub const KMEANS_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterAlgorithm {
    KMeans,
    Agglomerative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub algorithm: ClusterAlgorithm,
    pub k: usize,
    pub assignments: Vec<usize>,
    /// Filled once gold labels are compared.
    pub nmi: Option<f64>,
    /// Inertia after each k-means assignment step; empty for agglomerative.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inertia_history: Vec<f64>,
}

impl ClusterResult {
    pub fn with_nmi(mut self, gold: &[usize]) -> Result<Self> {
        self.nmi = Some(super::nmi(gold, &self.assignments)?);
        Ok(self)
    }

    pub fn inertia(&self) -> Option<f64> {
        self.inertia_history.last().copied()
    }
}

fn normalized_rows(vectors: &[EmbeddingVector]) -> Result<Vec<Vec<f64>>> {
    if let Some(first) = vectors.first() {
        for v in &vectors[1..] {
            first.same_space(v)?;
        }
    }
    vectors.iter().map(|v| l2_normalize_slice(v.values())).collect()
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm from a k-means++ start on L2-normalized vectors.
pub fn kmeans(vectors: &[EmbeddingVector], k: usize, seed: u64) -> Result<ClusterResult> {
    let rows = normalized_rows(vectors)?;
    kmeans_rows(&rows, k, seed)
}

/// k-means on rows used as given.
///
/// Stops when the relative inertia decrease drops below 1e-6, when the
/// assignment stops changing, or after 300 iterations. A cluster left empty
/// by an update is re-seeded at the point farthest from its own centroid.
pub fn kmeans_rows(rows: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterResult> {
    let n = rows.len();
    check_k(n, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(rows, k, &mut rng);

    let mut assignments = vec![usize::MAX; n];
    let mut history: Vec<f64> = Vec::new();
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let (best, d) = nearest(row, &centroids);
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
            inertia += d;
        }
        let prev = history.last().copied();
        history.push(inertia);
        if !changed || inertia == 0.0 {
            break;
        }
        if let Some(prev) = prev {
            if prev > 0.0 && (prev - inertia) / prev < KMEANS_REL_TOL {
                break;
            }
        }
        centroids = update_centroids(rows, &assignments, k);
    }

    Ok(ClusterResult {
        algorithm: ClusterAlgorithm::KMeans,
        k,
        assignments,
        nmi: None,
        inertia_history: history,
    })
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![rows[first].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &rows[first])).collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total implies a candidate")
        } else {
            // All remaining points coincide with a centroid.
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[pick] = true;
        let c = rows[pick].clone();
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn update_centroids(rows: &[Vec<f64>], assignments: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = rows[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (row, &c) in rows.iter().zip(assignments) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(row) {
            *s += x;
        }
    }
    for (s, &cnt) in sums.iter_mut().zip(&counts) {
        if cnt > 0 {
            s.iter_mut().for_each(|x| *x /= cnt as f64);
        }
    }

    let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
    if !empty.is_empty() {
        let mut spread: Vec<f64> = rows
            .iter()
            .zip(assignments)
            .map(|(r, &c)| sq_dist(r, &sums[c]))
            .collect();
        for c in empty {
            let far = spread
                .iter()
                .enumerate()
                .fold(0usize, |best, (i, &d)| if d > spread[best] { i } else { best });
            sums[c] = rows[far].clone();
            spread[far] = f64::NEG_INFINITY;
        }
    }
    sums
}

/// One merge of the agglomerative dendrogram.
///
/// Clusters are named by their smallest member index; `left < right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    /// Ward merge cost, `2 * |A||B| / (|A|+|B|) * ||c_A - c_B||^2`.
    pub cost: f64,
}

/// Ward-linkage agglomerative clustering on L2-normalized vectors, merged
/// bottom-up until `k` clusters remain.
pub fn agglomerative(vectors: &[EmbeddingVector], k: usize) -> Result<ClusterResult> {
    let rows = normalized_rows(vectors)?;
    agglomerative_rows(&rows, k)
}

pub fn agglomerative_rows(rows: &[Vec<f64>], k: usize) -> Result<ClusterResult> {
    let n = rows.len();
    check_k(n, k)?;
    let merges = ward_merges(rows, n - k);
    Ok(ClusterResult {
        algorithm: ClusterAlgorithm::Agglomerative,
        k,
        assignments: cut(n, &merges),
        nmi: None,
        inertia_history: Vec::new(),
    })
}

/// Labels after applying `merges`, numbered by smallest member.
pub(crate) fn cut(n: usize, merges: &[Merge]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in merges {
        let (a, b) = (find(&mut parent, m.left), find(&mut parent, m.right));
        let (lo, hi) = (a.min(b), a.max(b));
        parent[hi] = lo;
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            label_of_root[r]
        })
        .collect()
}

/// The first `steps` Ward merges.
///
/// Uses the Lance-Williams recurrence on squared Euclidean distances with a
/// per-cluster nearest-neighbour cache. Among equal costs the
/// lexicographically smallest `(left, right)` pair merges first.
pub fn ward_merges(rows: &[Vec<f64>], steps: usize) -> Vec<Merge> {
    let n = rows.len();
    if n < 2 {
        return Vec::new();
    }
    let idx = |i: usize, j: usize| -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * n - i * (i + 1) / 2 + (j - i - 1)
    };
    let mut dist = vec![0.0f64; n * (n - 1) / 2];
    for i in 0..n {
        for j in i + 1..n {
            dist[idx(i, j)] = sq_dist(&rows[i], &rows[j]);
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut nn = vec![usize::MAX; n];
    let mut nn_d = vec![f64::INFINITY; n];

    let rescan = |i: usize, active: &[bool], dist: &[f64], nn: &mut [usize], nn_d: &mut [f64]| {
        nn[i] = usize::MAX;
        nn_d[i] = f64::INFINITY;
        for j in 0..n {
            if j != i && active[j] {
                let d = dist[idx(i, j)];
                if d < nn_d[i] {
                    nn_d[i] = d;
                    nn[i] = j;
                }
            }
        }
    };
    for i in 0..n {
        rescan(i, &active, &dist, &mut nn, &mut nn_d);
    }

    let mut merges = Vec::with_capacity(steps);
    for _ in 0..steps.min(n - 1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            let (a, b) = (i.min(nn[i]), i.max(nn[i]));
            let cand = (nn_d[i], a, b);
            best = match best {
                None => Some(cand),
                Some(cur) if (cand.0, cand.1, cand.2) < (cur.0, cur.1, cur.2) => Some(cand),
                keep => keep,
            };
        }
        let (cost, a, b) = best.expect("at least two active clusters");
        merges.push(Merge {
            left: a,
            right: b,
            cost,
        });

        let (na, nb) = (size[a] as f64, size[b] as f64);
        let dab = dist[idx(a, b)];
        active[b] = false;
        for k in (0..n).filter(|&k| active[k] && k != a) {
            let nk = size[k] as f64;
            let d = ((na + nk) * dist[idx(a, k)] + (nb + nk) * dist[idx(b, k)] - nk * dab)
                / (na + nb + nk);
            dist[idx(a, k)] = d;
        }
        size[a] += size[b];

        rescan(a, &active, &dist, &mut nn, &mut nn_d);
        for k in (0..n).filter(|&k| active[k] && k != a) {
            if nn[k] == a || nn[k] == b {
                rescan(k, &active, &dist, &mut nn, &mut nn_d);
            } else {
                let d = dist[idx(a, k)];
                if d < nn_d[k] || (d == nn_d[k] && a < nn[k]) {
                    nn_d[k] = d;
                    nn[k] = a;
                }
            }
        }
    }
    merges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> Vec<Vec<f64>> {
        vec![
            vec![1.0, 0.01],
            vec![0.99, -0.02],
            vec![1.0, 0.03],
            vec![-1.0, 0.02],
            vec![-0.98, -0.01],
            vec![-1.0, 0.0],
        ]
    }

    #[test]
    fn kmeans_k_equals_n_has_zero_inertia() {
        let rows = blobs();
        let r = kmeans_rows(&rows, rows.len(), 3).unwrap();
        assert_eq!(r.inertia(), Some(0.0));
        let mut labels = r.assignments.clone();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), rows.len());
    }

    #[test]
    fn kmeans_separates_blobs() {
        let r = kmeans_rows(&blobs(), 2, 11).unwrap();
        let a = &r.assignments;
        assert!(a[0] == a[1] && a[1] == a[2]);
        assert!(a[3] == a[4] && a[4] == a[5]);
        assert_ne!(a[0], a[3]);
    }

    #[test]
    fn kmeans_rejects_bad_k() {
        assert!(kmeans_rows(&blobs(), 0, 0).is_err());
        assert!(kmeans_rows(&blobs(), 7, 0).is_err());
    }

    #[test]
    fn kmeans_duplicate_points() {
        let rows = vec![vec![1.0, 0.0]; 5];
        let r = kmeans_rows(&rows, 3, 0).unwrap();
        assert_eq!(r.inertia(), Some(0.0));
        assert!(r.assignments.iter().all(|&c| c < 3));
    }

    #[test]
    fn agglomerative_extremes() {
        let rows = blobs();
        let all = agglomerative_rows(&rows, rows.len()).unwrap();
        assert_eq!(all.assignments, vec![0, 1, 2, 3, 4, 5]);
        let one = agglomerative_rows(&rows, 1).unwrap();
        assert!(one.assignments.iter().all(|&c| c == 0));
        let two = agglomerative_rows(&rows, 2).unwrap();
        assert_eq!(two.assignments, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn ward_tie_break_prefers_smallest_pair() {
        // Square: every side has equal length, so (0,1) must merge first.
        let rows = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let m = ward_merges(&rows, 1);
        assert_eq!((m[0].left, m[0].right), (0, 1));
    }
}
