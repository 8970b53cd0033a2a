//! Vector geometry: cosine distance, L2 normalization and PCA projection.
//!
//! Everything here works in `f64`. Comparisons downstream are strict
//! inequalities, so precision artifacts would flip outcomes.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::types::EmbeddingVector;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `1 - cos(a, b)` on raw slices.
pub fn cosine_distance_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let cos = (dot(a, b) / (na * nb)).clamp(-1.0, 1.0);
    Ok(1.0 - cos)
}

/// Cosine distance between two embeddings of the same provider and instruction.
///
/// The result lies in `[0, 2]` and is symmetric in its arguments.
pub fn cosine_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    a.same_space(b)?;
    cosine_distance_slices(a.values(), b.values())
}

pub fn l2_normalize_slice(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

pub fn l2_normalize(v: &EmbeddingVector) -> Result<EmbeddingVector> {
    v.with_values(l2_normalize_slice(v.values())?)
}

/// Result of a principal-component projection.
#[derive(Debug, Clone)]
pub struct PcaProjection {
    /// One `out_dim` row per input vector.
    pub coords: Vec<Vec<f64>>,
    /// Unit principal axes, largest variance first.
    pub components: Vec<Vec<f64>>,
    /// Variance captured along each axis.
    pub explained_variance: Vec<f64>,
    /// Per-feature mean removed before projecting.
    pub mean: Vec<f64>,
}

/// Mean-center `vectors` and project onto the top `out_dim` principal axes.
///
/// Each axis is oriented so that its largest-magnitude coordinate is
/// positive. Identical inputs project to all zeros.
pub fn pca_project(vectors: &[EmbeddingVector], out_dim: usize) -> Result<PcaProjection> {
    if vectors.len() < 2 {
        return Err(Error::invalid("PCA needs at least two vectors"));
    }
    for v in &vectors[1..] {
        vectors[0].same_space(v)?;
    }
    let rows: Vec<&[f64]> = vectors.iter().map(|v| v.values()).collect();
    pca_project_rows(&rows, out_dim)
}

pub fn pca_project_rows(rows: &[&[f64]], out_dim: usize) -> Result<PcaProjection> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two vectors"));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid("PCA rows differ in dimension"));
    }
    if out_dim == 0 || out_dim > dim {
        return Err(Error::invalid(format!(
            "out_dim must be in 1..={dim}, got {out_dim}"
        )));
    }

    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, dim, |i, j| rows[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(out_dim);
    let mut explained_variance = Vec::with_capacity(out_dim);
    for &idx in order.iter().take(out_dim) {
        let mut axis: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let pivot = axis
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (i, &x)| {
                if x.abs() > best.1.abs() {
                    (i, x)
                } else {
                    best
                }
            });
        if pivot.1 < 0.0 {
            axis.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(axis);
        explained_variance.push(eig.eigenvalues[idx].max(0.0));
    }

    let coords = (0..n)
        .map(|i| {
            let row: Vec<f64> = centered.row(i).iter().copied().collect();
            components.iter().map(|c| dot(&row, c)).collect()
        })
        .collect();

    Ok(PcaProjection {
        coords,
        components,
        explained_variance,
        mean,
    })
}
