use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Normalized mutual information with arithmetic-mean normalization.
///
/// `MI / ((H(labels) + H(preds)) / 2)` in nats. When both partitions are a
/// single cluster the value is defined as 1.0.
pub fn nmi(labels: &[usize], preds: &[usize]) -> Result<f64> {
    if labels.len() != preds.len() {
        return Err(Error::invalid(format!(
            "nmi length mismatch: {} labels vs {} predictions",
            labels.len(),
            preds.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("nmi of empty partitions"));
    }
    let n = labels.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut a: BTreeMap<usize, usize> = BTreeMap::new();
    let mut b: BTreeMap<usize, usize> = BTreeMap::new();
    for (&l, &p) in labels.iter().zip(preds) {
        *joint.entry((l, p)).or_default() += 1;
        *a.entry(l).or_default() += 1;
        *b.entry(p).or_default() += 1;
    }
    let entropy = |m: &BTreeMap<usize, usize>| -> f64 {
        m.values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let (ha, hb) = (entropy(&a), entropy(&b));
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (&(l, p), &c) in &joint {
        let pij = c as f64 / n;
        let pi = a[&l] as f64 / n;
        let pj = b[&p] as f64 / n;
        mi += pij * (pij / (pi * pj)).ln();
    }
    let denom = (ha + hb) / 2.0;
    Ok((mi / denom).clamp(0.0, 1.0))
}
