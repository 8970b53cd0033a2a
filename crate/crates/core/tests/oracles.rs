mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use semtk_core::evaltasks::{build_prototypes, classify, kmeans_rows, make_ori_ori_triplets, nmi, ward_merges};
use semtk_core::geometry::{cosine_distance_slices, pca_project_rows};
use semtk_core::{IntentId, IntentLabel, Source, Split, Utterance};

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Recompute every pairwise Ward cost from centroids at each step.
fn brute_ward(rows: &[Vec<f64>], steps: usize) -> Vec<(usize, usize, f64)> {
    let mut clusters: Vec<Vec<usize>> = (0..rows.len()).map(|i| vec![i]).collect();
    let centroid = |c: &[usize]| -> Vec<f64> {
        let mut m = vec![0.0; rows[0].len()];
        for &i in c {
            for (a, x) in m.iter_mut().zip(&rows[i]) {
                *a += x;
            }
        }
        m.iter().map(|a| a / c.len() as f64).collect()
    };
    let mut out = Vec::new();
    for _ in 0..steps {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
                let cost = 2.0 * na * nb / (na + nb) * sq(&centroid(&clusters[a]), &centroid(&clusters[b]));
                let (la, lb) = (clusters[a][0], clusters[b][0]);
                let key = (la.min(lb), la.max(lb));
                let better = match best {
                    None => true,
                    Some((c, l, r, _, _)) => cost < c - 1e-12 || ((cost - c).abs() <= 1e-12 && key < (l, r)),
                };
                if better {
                    best = Some((cost, key.0, key.1, a, b));
                }
            }
        }
        let (cost, l, r, a, b) = best.unwrap();
        out.push((l, r, cost));
        let mut merged = clusters.remove(b);
        merged.extend(clusters[a].iter().copied());
        merged.sort();
        clusters[a] = merged;
    }
    out
}

#[test]
fn ward_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..40 {
        let rows: Vec<Vec<f64>> = (0..8).map(|_| gaussian(&mut rng, 3)).collect();
        let got = ward_merges(&rows, 7);
        let want = brute_ward(&rows, 7);
        assert_eq!(got.len(), 7);
        for (g, (l, r, c)) in got.iter().zip(want) {
            assert_eq!((g.left, g.right), (l, r));
            assert!((g.cost - c).abs() < 1e-9 * c.max(1.0), "{} vs {c}", g.cost);
        }
    }
}

#[test]
fn ward_ties_prefer_smallest_pair() {
    // Unit square: four equal nearest-neighbour distances.
    let rows = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
    let got = ward_merges(&rows, 3);
    let want = brute_ward(&rows, 3);
    assert_eq!((got[0].left, got[0].right), (0, 1));
    for (g, (l, r, _)) in got.iter().zip(want) {
        assert_eq!((g.left, g.right), (l, r));
    }
}

#[test]
fn classify_matches_nearest_prototype() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut emb = TableEmbedder::new("t");
    let mut labels = Vec::new();
    for k in 0..6 {
        emb.insert(format!("label {k}"), gaussian(&mut rng, 10));
        labels.push(IntentLabel::new(format!("c{k}"), format!("label {k}"), &[]));
    }
    let mut train = Vec::new();
    for j in 0..30 {
        let c = format!("c{}", j % 6);
        let t = format!("train {j}");
        emb.insert(&t, gaussian(&mut rng, 10));
        train.push((Utterance::new(&t, &t, c.as_str(), Split::Train, Source::Dataset).unwrap(), IntentId::new(&c)));
    }
    let model = build_prototypes(&train, &labels, &emb, 3, 4).unwrap();
    for j in 0..100 {
        let t = format!("test {j}");
        let v = gaussian(&mut rng, 10);
        emb.insert(&t, v.clone());
        let u = Utterance::new(&t, &t, "c0", Split::Original, Source::Dataset).unwrap();
        let want = model
            .prototypes
            .iter()
            .map(|(id, p)| (oracle_distance(&v, p.values()), id))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)))
            .unwrap()
            .1
            .clone();
        assert_eq!(classify(&model, &u, &emb).unwrap(), want);
    }
}

/// Top principal axis by power iteration on the sample covariance.
fn power_axis(rows: &[Vec<f64>], deflate: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n - 1.0);
            }
        }
    }
    let mut v = vec![1.0; d];
    let mut lambda = 0.0;
    for _ in 0..5000 {
        for u in deflate {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let w: Vec<f64> = (0..d).map(|i| (0..d).map(|j| cov[i][j] * v[j]).sum()).collect();
        lambda = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = unit(&w);
    }
    let pivot = v.iter().copied().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    (v, lambda)
}

#[test]
fn pca_matches_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let scales = [5.0, 2.0, 0.5, 0.1];
    let rows: Vec<Vec<f64>> = (0..60)
        .map(|_| gaussian(&mut rng, 4).iter().zip(scales).map(|(x, s)| x * s).collect())
        .collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let p = pca_project_rows(&refs, 2).unwrap();
    let (a1, l1) = power_axis(&rows, &[]);
    let (a2, l2) = power_axis(&rows, &[a1.clone()]);
    for (got, want) in p.components.iter().zip([&a1, &a2]) {
        for (x, y) in got.iter().zip(want.iter()) {
            assert!((x - y).abs() < 1e-6, "{got:?} vs {want:?}");
        }
    }
    assert!((p.explained_variance[0] - l1).abs() < 1e-6 * l1);
    assert!((p.explained_variance[1] - l2).abs() < 1e-6 * l1);
    for (r, c) in rows.iter().zip(&p.coords) {
        let centered: Vec<f64> = r.iter().zip(&p.mean).map(|(x, m)| x - m).collect();
        for (axis, coord) in [&a1, &a2].iter().zip(c) {
            let proj: f64 = centered.iter().zip(axis.iter()).map(|(a, b)| a * b).sum();
            assert!((proj - coord).abs() < 1e-6);
        }
    }
}

#[test]
fn ori_ori_triplets_are_exhaustively_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut originals = Vec::new();
    let mut negations = Vec::new();
    for j in 0..80 {
        let intent = format!("i{}", rng.gen_range(0..12));
        let id = format!("o{j}");
        originals.push(Utterance::new(&id, format!("text {j}"), intent.as_str(), Split::Original, Source::Dataset).unwrap());
        if rng.gen_bool(0.9) {
            negations.push(
                Utterance::new(format!("{id}::neg"), format!("not text {j}"), intent.as_str(), Split::Negation, Source::Dataset)
                    .unwrap(),
            );
        }
    }
    let build = make_ori_ori_triplets(&originals, &negations, 9).unwrap();

    let by_id: HashMap<&str, &Utterance> = originals.iter().map(|u| (u.id.as_str(), u)).collect();
    let mut intent_count: HashMap<&IntentId, usize> = HashMap::new();
    for u in &originals {
        *intent_count.entry(&u.intent).or_default() += 1;
    }
    let has_neg = |id: &str| negations.iter().any(|n| n.id_stem() == id);
    let expect_no_neg = originals.iter().filter(|u| !has_neg(&u.id)).count();
    let expect_no_pos = originals.iter().filter(|u| has_neg(&u.id) && intent_count[&u.intent] == 1).count();
    assert_eq!(build.skipped_no_negation, expect_no_neg);
    assert_eq!(build.skipped_no_positive, expect_no_pos);
    assert_eq!(build.triplets.len(), originals.len() - expect_no_neg - expect_no_pos);
    for t in &build.triplets {
        assert!(by_id.contains_key(t.anchor.id.as_str()));
        assert_eq!(t.positive.intent, t.anchor.intent);
        assert_ne!(t.positive.id, t.anchor.id);
        assert_eq!(t.positive.split, Split::Original);
        assert_eq!(t.negative.id_stem(), t.anchor.id);
    }
    let again = make_ori_ori_triplets(&originals, &negations, 9).unwrap();
    assert_eq!(again.triplets, build.triplets);
}

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #[test]
    fn cosine_distance_is_bounded_and_symmetric(a in vec_strategy(6), b in vec_strategy(6)) {
        let d = cosine_distance_slices(&a, &b).unwrap();
        prop_assert!((0.0..=2.0).contains(&d));
        prop_assert!((d - cosine_distance_slices(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((d - oracle_distance(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn nmi_is_symmetric_and_bounded(
        pairs in prop::collection::vec((0usize..5, 0usize..5), 2..60)
    ) {
        let (a, b): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let v = nmi(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v - nmi(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((nmi(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_labels_every_row(seed in any::<u64>(), n in 4usize..40, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| gaussian(&mut rng, 3)).collect();
        let r = kmeans_rows(&rows, k, seed).unwrap();
        prop_assert_eq!(r.assignments.len(), n);
        prop_assert!(r.assignments.iter().all(|&c| c < k));
    }
}
