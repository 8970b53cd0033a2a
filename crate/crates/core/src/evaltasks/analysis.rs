use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::{EvalReport, MetricKey};
use crate::error::{Error, Result};

/// Pearson correlation coefficient; `None` when either input has zero
/// variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub keys: Vec<MetricKey>,
    /// `values[i][j]` correlates `keys[i]` with `keys[j]`.
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: MetricKey, b: MetricKey) -> Option<f64> {
        let i = self.keys.iter().position(|&k| k == a)?;
        let j = self.keys.iter().position(|&k| k == b)?;
        self.values[i][j]
    }
}

/// Pairwise Pearson correlation between metrics, using each metric's values
/// across `reports` as its feature vector.
///
/// The metric set is taken from the first report; every other report must
/// carry the same metrics. The diagonal is 1.0 unless the metric is
/// constant across reports.
pub fn task_correlation(reports: &[EvalReport]) -> Result<CorrelationMatrix> {
    if reports.len() < 3 {
        return Err(Error::invalid(format!(
            "correlation needs at least 3 reports, got {}",
            reports.len()
        )));
    }
    let keys: Vec<MetricKey> = reports[0].metrics.keys().copied().collect();
    let mut features: Vec<Vec<f64>> = Vec::with_capacity(keys.len());
    for &k in &keys {
        let col = reports.iter().map(|r| r.require(k)).collect::<Result<Vec<_>>>()?;
        features.push(col);
    }
    for r in &reports[1..] {
        if r.metrics.len() != keys.len() {
            return Err(Error::invalid(format!(
                "report `{}` has a different metric set",
                r.model_id
            )));
        }
    }
    let values = (0..keys.len())
        .map(|i| {
            (0..keys.len())
                .map(|j| {
                    let r = pearson(&features[i], &features[j]);
                    if i == j {
                        r.map(|_| 1.0)
                    } else {
                        r
                    }
                })
                .collect()
        })
        .collect();
    Ok(CorrelationMatrix { keys, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRank {
    pub model_id: String,
    pub mean_rank: f64,
}

/// Mean rank across metrics, rank 1 being the highest value; tied values
/// share the average of their ranks. Sorted best first, ties by model id.
///
/// Every report must carry every metric of the first report.
pub fn rank_models(reports: &[EvalReport]) -> Result<Vec<ModelRank>> {
    if reports.len() < 2 {
        return Err(Error::invalid(format!(
            "ranking needs at least 2 reports, got {}",
            reports.len()
        )));
    }
    let keys: Vec<MetricKey> = reports[0].metrics.keys().copied().collect();
    if keys.is_empty() {
        return Err(Error::invalid("reports carry no metrics"));
    }
    let mut totals = vec![0.0; reports.len()];
    for &k in &keys {
        let col = reports.iter().map(|r| r.require(k)).collect::<Result<Vec<_>>>()?;
        let mut order: Vec<usize> = (0..col.len()).collect();
        order.sort_by(|&a, &b| col[b].total_cmp(&col[a]));
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && col[order[j + 1]] == col[order[i]] {
                j += 1;
            }
            // positions i..=j hold ranks i+1..=j+1
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &m in &order[i..=j] {
                totals[m] += avg;
            }
            i = j + 1;
        }
    }
    let mut out: Vec<ModelRank> = reports
        .iter()
        .zip(totals)
        .map(|(r, t)| ModelRank {
            model_id: r.model_id.clone(),
            mean_rank: t / keys.len() as f64,
        })
        .collect();
    out.sort_by(|a, b| {
        a.mean_rank
            .total_cmp(&b.mean_rank)
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    Ok(out)
}

/// `model_id → mean rank`, for annotating tables.
pub fn rank_map(ranks: &[ModelRank]) -> BTreeMap<String, f64> {
    ranks.iter().map(|r| (r.model_id.clone(), r.mean_rank)).collect()
}
