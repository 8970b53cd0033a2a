//! Contrastive adapter training over frozen embeddings.
//!
//! The adapter is a square matrix `W` applied as `normalize(W x)` (or
//! `normalize(W x + x)` in residual mode). The loss pulls each anchor toward
//! its positive against all negatives in the batch, in both directions.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curate::CurationRecord;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::evaltasks::embed_unique;
use crate::geometry::{dot, norm};
use crate::types::EmbeddingVector;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdapterMode {
    #[default]
    Linear,
    Residual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adapter {
    pub dim: usize,
    pub mode: AdapterMode,
    /// Row-major `dim × dim`.
    pub weights: Vec<f64>,
}

impl Adapter {
    pub fn identity(dim: usize, mode: AdapterMode) -> Self {
        let mut weights = vec![0.0; dim * dim];
        for i in 0..dim {
            weights[i * dim + i] = 1.0;
        }
        Adapter { dim, mode, weights }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.weights.len() != self.dim * self.dim {
            return Err(Error::invalid(format!(
                "adapter of dim {} has {} weights",
                self.dim,
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.dim + col]
    }

    /// Unnormalized output `W x` (plus `x` in residual mode).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: x.len(),
            });
        }
        let mut z: Vec<f64> = self.weights.chunks_exact(self.dim).map(|row| dot(row, x)).collect();
        if self.mode == AdapterMode::Residual {
            for (zi, xi) in z.iter_mut().zip(x) {
                *zi += xi;
            }
        }
        Ok(z)
    }

    /// Adapted, unit-norm embedding.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::geometry::l2_normalize_slice(&self.forward(x)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let a: Adapter = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        a.validate()?;
        Ok(a)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorMode {
    /// Negatives only.
    #[default]
    PaperLiteral,
    /// Negatives plus the positive pair (standard InfoNCE).
    IncludePositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub gamma: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub denominator_mode: DenominatorMode,
    pub seed: u64,
    /// Heavy-ball momentum; 0 for plain gradient descent.
    pub momentum: f64,
    pub mode: AdapterMode,
    /// Finite-difference check at every 10th step.
    pub grad_check: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.05,
            batch_size: 8,
            learning_rate: 1e-2,
            epochs: 1,
            denominator_mode: DenominatorMode::PaperLiteral,
            seed: 0,
            momentum: 0.0,
            mode: AdapterMode::Linear,
            grad_check: cfg!(debug_assertions),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("bad learning rate {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        Ok(())
    }
}

/// Raw (pre-adapter) vectors of one training triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTriplet {
    pub id: String,
    pub anchor: Vec<f64>,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

/// Embed every distinct text once and pair the vectors up.
pub fn prepare(data: &[CurationRecord], emb: &dyn Embedder) -> Result<Vec<TrainTriplet>> {
    let mut texts = Vec::with_capacity(data.len() * 3);
    for r in data {
        texts.extend([r.anchor.text.as_str(), r.positive.text.as_str(), r.negative.text.as_str()]);
    }
    let vecs = embed_unique(emb, &texts)?;
    let get = |t: &str| -> Result<Vec<f64>> {
        vecs.get(t)
            .map(|v| v.values().to_vec())
            .ok_or_else(|| Error::UnknownText(t.to_string()))
    };
    data.iter()
        .map(|r| {
            Ok(TrainTriplet {
                id: format!("{}|{}|{}", r.anchor.id, r.positive.id, r.negative.id),
                anchor: get(&r.anchor.text)?,
                positive: get(&r.positive.text)?,
                negative: get(&r.negative.text)?,
            })
        })
        .collect()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// One direction of the per-example loss, from cosine similarities:
/// `-s_pos/γ + log Σ exp(s/γ)` over the negatives (and the positive in
/// include-positive mode).
pub fn info_nce_term(s_pos: f64, s_negs: &[f64], gamma: f64, mode: DenominatorMode) -> f64 {
    let mut logits: Vec<f64> = s_negs.iter().map(|s| s / gamma).collect();
    if mode == DenominatorMode::IncludePositive {
        logits.push(s_pos / gamma);
    }
    -s_pos / gamma + log_sum_exp(&logits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub loss: f64,
    /// Per-example loss, both directions summed.
    pub terms: Vec<f64>,
}

struct Adapted {
    z_norm: f64,
    e: Vec<f64>,
}

fn adapt(adapter: &Adapter, x: &[f64], id: &str) -> Result<Adapted> {
    let z = adapter.forward(x)?;
    let n = norm(&z);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::NonFiniteLoss(id.to_string()));
    }
    Ok(Adapted {
        z_norm: n,
        e: z.into_iter().map(|v| v / n).collect(),
    })
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Loss of one batch and, if asked, its gradient with respect to the
/// adapter weights (row-major, same layout as [`Adapter::weights`]).
pub fn batch_loss(
    batch: &[TrainTriplet],
    adapter: &Adapter,
    cfg: &TrainConfig,
    with_grad: bool,
) -> Result<(LossValue, Option<Vec<f64>>)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let g = cfg.gamma;
    let b = batch.len();
    let a: Vec<Adapted> = batch.iter().map(|t| adapt(adapter, &t.anchor, &t.id)).collect::<Result<_>>()?;
    let p: Vec<Adapted> = batch.iter().map(|t| adapt(adapter, &t.positive, &t.id)).collect::<Result<_>>()?;
    let n: Vec<Adapted> = batch.iter().map(|t| adapt(adapter, &t.negative, &t.id)).collect::<Result<_>>()?;

    let dim = adapter.dim;
    let mut ga = vec![vec![0.0; dim]; b];
    let mut gp = vec![vec![0.0; dim]; b];
    let mut gn = vec![vec![0.0; dim]; b];
    let mut terms = Vec::with_capacity(b);
    let scale = 1.0 / b as f64;

    for i in 0..b {
        let mut total = 0.0;
        // Direction 1: anchor as query; direction 2: positive as query.
        for dir in 0..2 {
            let (q, k) = if dir == 0 { (&a[i], &p[i]) } else { (&p[i], &a[i]) };
            let s_pos = dot(&q.e, &k.e);
            let s_negs: Vec<f64> = n.iter().map(|nj| dot(&q.e, &nj.e)).collect();
            let term = info_nce_term(s_pos, &s_negs, g, cfg.denominator_mode);
            if !term.is_finite() {
                return Err(Error::NonFiniteLoss(batch[i].id.clone()));
            }
            total += term;
            if !with_grad {
                continue;
            }
            // Softmax weights over the denominator logits.
            let mut logits: Vec<f64> = s_negs.iter().map(|s| s / g).collect();
            if cfg.denominator_mode == DenominatorMode::IncludePositive {
                logits.push(s_pos / g);
            }
            let lse = log_sum_exp(&logits);
            let w: Vec<f64> = logits.iter().map(|l| (l - lse).exp()).collect();
            let w_pos = if cfg.denominator_mode == DenominatorMode::IncludePositive { w[b] } else { 0.0 };
            // d/ds_pos = (w_pos - 1)/γ ; d/ds_neg_j = w_j/γ
            let c_pos = (w_pos - 1.0) / g * scale;
            let (gq, gk) = if dir == 0 { (&mut ga, &mut gp) } else { (&mut gp, &mut ga) };
            axpy(&mut gq[i], c_pos, &k.e);
            axpy(&mut gk[i], c_pos, &q.e);
            for (j, nj) in n.iter().enumerate() {
                let c = w[j] / g * scale;
                axpy(&mut gq[i], c, &nj.e);
                axpy(&mut gn[j], c, &q.e);
            }
        }
        terms.push(total);
    }
    let loss = terms.iter().sum::<f64>() * scale;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss(batch[0].id.clone()));
    }
    let value = LossValue { loss, terms };
    if !with_grad {
        return Ok((value, None));
    }

    // Through the normalization: dL/dz = (I - e eᵀ) g / |z|, then dW += dz xᵀ.
    let mut grad = vec![0.0; dim * dim];
    let mut push = |ad: &Adapted, ge: &[f64], x: &[f64]| {
        let proj = dot(&ad.e, ge);
        for r in 0..dim {
            let dz = (ge[r] - proj * ad.e[r]) / ad.z_norm;
            if dz != 0.0 {
                axpy(&mut grad[r * dim..(r + 1) * dim], dz, x);
            }
        }
    };
    for i in 0..b {
        push(&a[i], &ga[i], &batch[i].anchor);
        push(&p[i], &gp[i], &batch[i].positive);
        push(&n[i], &gn[i], &batch[i].negative);
    }
    Ok((value, Some(grad)))
}

pub fn contrastive_loss(
    batch: &[CurationRecord],
    adapter: &Adapter,
    cfg: &TrainConfig,
    emb: &dyn Embedder,
) -> Result<LossValue> {
    cfg.validate()?;
    Ok(batch_loss(&prepare(batch, emb)?, adapter, cfg, false)?.0)
}

pub fn loss_gradient(
    batch: &[CurationRecord],
    adapter: &Adapter,
    cfg: &TrainConfig,
    emb: &dyn Embedder,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok(batch_loss(&prepare(batch, emb)?, adapter, cfg, true)?
        .1
        .expect("gradient requested"))
}

/// Largest relative error between the analytic gradient and central
/// differences over `entries` random weights.
pub fn gradient_check<R: Rng>(
    batch: &[TrainTriplet],
    adapter: &Adapter,
    cfg: &TrainConfig,
    entries: usize,
    eps: f64,
    rng: &mut R,
) -> Result<f64> {
    let (_, grad) = batch_loss(batch, adapter, cfg, true)?;
    let grad = grad.expect("gradient requested");
    let mut probe = adapter.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..entries {
        let k = rng.gen_range(0..adapter.weights.len());
        let w0 = adapter.weights[k];
        probe.weights[k] = w0 + eps;
        let up = batch_loss(batch, &probe, cfg, false)?.0.loss;
        probe.weights[k] = w0 - eps;
        let down = batch_loss(batch, &probe, cfg, false)?.0.loss;
        probe.weights[k] = w0;
        let numeric = (up - down) / (2.0 * eps);
        let denom = grad[k].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((grad[k] - numeric).abs() / denom);
    }
    Ok(worst)
}

const GRAD_CHECK_EVERY: usize = 10;
const GRAD_CHECK_ENTRIES: usize = 20;
const GRAD_CHECK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub adapter: Adapter,
    /// Loss of each batch before its update.
    pub losses: Vec<f64>,
    /// Set when training stopped early on a non-finite loss; the adapter is
    /// the last one that produced a finite loss.
    pub diverged: Option<String>,
}

impl TrainOutcome {
    pub fn write_loss_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["step", "loss"])?;
        for (i, l) in self.losses.iter().enumerate() {
            w.write_record([i.to_string(), format!("{l}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mini-batch gradient descent on prepared triplets.
pub fn train_triplets(data: &[TrainTriplet], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let dim = data
        .first()
        .ok_or_else(|| Error::invalid("no training data"))?
        .anchor
        .len();
    let mut adapter = Adapter::identity(dim, cfg.mode);
    let mut velocity = vec![0.0; dim * dim];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut check_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::new();
    let mut step = 0usize;

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<TrainTriplet> = chunk.iter().map(|&i| data[i].clone()).collect();
            let (value, grad) = match batch_loss(&batch, &adapter, cfg, true) {
                Ok(r) => r,
                Err(Error::NonFiniteLoss(id)) => {
                    log::warn!("training diverged at step {step} (example {id})");
                    return Ok(TrainOutcome {
                        adapter,
                        losses,
                        diverged: Some(id),
                    });
                }
                Err(e) => return Err(e),
            };
            if cfg.grad_check && step % GRAD_CHECK_EVERY == 0 {
                let rel_err = gradient_check(&batch, &adapter, cfg, GRAD_CHECK_ENTRIES, 1e-5, &mut check_rng)?;
                if rel_err >= GRAD_CHECK_TOL {
                    return Err(Error::GradientCheck { step, rel_err });
                }
            }
            losses.push(value.loss);
            let grad = grad.expect("gradient requested");
            let mut next = adapter.clone();
            for ((w, v), g) in next.weights.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = cfg.momentum * *v + g;
                *w -= cfg.learning_rate * *v;
            }
            if next.weights.iter().any(|w| !w.is_finite()) {
                log::warn!("training diverged at step {step}: non-finite weights");
                return Ok(TrainOutcome {
                    adapter,
                    losses,
                    diverged: Some(batch[0].id.clone()),
                });
            }
            adapter = next;
            step += 1;
        }
    }
    Ok(TrainOutcome {
        adapter,
        losses,
        diverged: None,
    })
}

pub fn train_adapter(data: &[CurationRecord], cfg: &TrainConfig, emb: &dyn Embedder) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(Error::invalid("no training data"));
    }
    train_triplets(&prepare(data, emb)?, cfg)
}

/// Base embedder followed by a trained adapter. Vectors carry a distinct
/// provider id so they never mix with the base model's.
pub struct AdaptedEmbedder<E> {
    inner: E,
    adapter: Adapter,
    provider_id: String,
}

impl<E: Embedder> AdaptedEmbedder<E> {
    pub fn new(inner: E, adapter: Adapter) -> Result<Self> {
        adapter.validate()?;
        let provider_id = format!("{}+adapter", inner.provider_id());
        Ok(AdaptedEmbedder {
            inner,
            adapter,
            provider_id,
        })
    }
}

impl<E: Embedder> Embedder for AdaptedEmbedder<E> {
    fn provider_id(&self) -> &str {
        &self.provider_id
    }

    fn instruction(&self) -> &str {
        self.inner.instruction()
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        self.inner
            .embed_batch(texts)?
            .into_iter()
            .map(|v| {
                EmbeddingVector::new(
                    self.adapter.apply(v.values())?,
                    self.provider_id.clone(),
                    self.inner.instruction(),
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn random_batch(rng: &mut ChaCha8Rng, b: usize, dim: usize) -> Vec<TrainTriplet> {
        let mut v = || (0..dim).map(|_| StandardNormal.sample(rng)).collect::<Vec<f64>>();
        (0..b)
            .map(|i| TrainTriplet {
                id: format!("t{i}"),
                anchor: v(),
                positive: v(),
                negative: v(),
            })
            .collect()
    }

    fn cfg(mode: DenominatorMode, gamma: f64) -> TrainConfig {
        TrainConfig {
            gamma,
            denominator_mode: mode,
            grad_check: false,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn equal_similarities() {
        let s = 0.3;
        assert!(info_nce_term(s, &[s], 1.0, DenominatorMode::PaperLiteral).abs() < 1e-15);
        let ip = info_nce_term(s, &[s], 1.0, DenominatorMode::IncludePositive);
        assert!((ip - 2f64.ln()).abs() < 1e-15);

        // A symmetric case where both directions have s_pos == s_neg.
        let t = TrainTriplet {
            id: "y".into(),
            anchor: vec![1.0, 0.0, 0.0],
            positive: vec![0.0, 1.0, 0.0],
            negative: vec![0.0, 0.0, 1.0],
        };
        let id3 = Adapter::identity(3, AdapterMode::Linear);
        let lit = batch_loss(std::slice::from_ref(&t), &id3, &cfg(DenominatorMode::PaperLiteral, 1.0), false).unwrap().0;
        assert!(lit.loss.abs() < 1e-15);
        let inc = batch_loss(&[t], &id3, &cfg(DenominatorMode::IncludePositive, 1.0), false).unwrap().0;
        assert!((inc.loss - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn paper_literal_can_be_negative() {
        let t = TrainTriplet {
            id: "z".into(),
            anchor: vec![1.0, 0.0],
            positive: vec![1.0, 0.1],
            negative: vec![-1.0, 0.0],
        };
        let id = Adapter::identity(2, AdapterMode::Linear);
        let lit = batch_loss(std::slice::from_ref(&t), &id, &cfg(DenominatorMode::PaperLiteral, 0.1), false).unwrap().0;
        assert!(lit.loss < 0.0);
        let inc = batch_loss(&[t], &id, &cfg(DenominatorMode::IncludePositive, 0.1), false).unwrap().0;
        assert!(inc.loss >= 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (mode, adapter_mode) in [
            (DenominatorMode::PaperLiteral, AdapterMode::Linear),
            (DenominatorMode::IncludePositive, AdapterMode::Residual),
        ] {
            let batch = random_batch(&mut rng, 4, 6);
            let mut adapter = Adapter::identity(6, adapter_mode);
            for w in &mut adapter.weights {
                *w += 0.1 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
            }
            let c = cfg(mode, 0.5);
            let err = gradient_check(&batch, &adapter, &c, 20, 1e-5, &mut rng).unwrap();
            assert!(err < 1e-4, "{mode:?}: {err}");
        }
    }

    #[test]
    fn small_gamma_stays_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let batch = random_batch(&mut rng, 5, 4);
        let (v, g) = batch_loss(&batch, &Adapter::identity(4, AdapterMode::Linear), &cfg(DenominatorMode::PaperLiteral, 1e-3), true).unwrap();
        assert!(v.loss.is_finite());
        assert!(g.unwrap().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn reorder_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let batch = random_batch(&mut rng, 5, 4);
        let mut rev = batch.clone();
        rev.reverse();
        let a = Adapter::identity(4, AdapterMode::Linear);
        let c = cfg(DenominatorMode::PaperLiteral, 0.2);
        let l1 = batch_loss(&batch, &a, &c, false).unwrap().0.loss;
        let l2 = batch_loss(&rev, &a, &c, false).unwrap().0.loss;
        assert!((l1 - l2).abs() < 1e-12);
    }

    #[test]
    fn zero_learning_rate_is_noop_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = random_batch(&mut rng, 20, 4);
        let c = TrainConfig {
            learning_rate: 0.0,
            batch_size: 20,
            epochs: 3,
            ..cfg(DenominatorMode::PaperLiteral, 0.1)
        };
        let out = train_triplets(&data, &c).unwrap();
        assert_eq!(out.adapter, Adapter::identity(4, AdapterMode::Linear));
        // reshuffling changes only summation order
        assert!(out.losses.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12));

        let c = TrainConfig {
            learning_rate: 0.05,
            batch_size: 3,
            momentum: 0.9,
            grad_check: true,
            ..cfg(DenominatorMode::PaperLiteral, 0.1)
        };
        let a = train_triplets(&data, &c).unwrap();
        let b = train_triplets(&data, &c).unwrap();
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.adapter, b.adapter);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        let mut a = Adapter::identity(3, AdapterMode::Residual);
        a.weights[1] = 0.25;
        a.save(&path).unwrap();
        assert_eq!(Adapter::load(&path).unwrap(), a);
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(json["dim"], 3);
        assert_eq!(json["mode"], "residual");
        assert_eq!(json["weights"].as_array().unwrap().len(), 9);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig { gamma: 0.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }
}
