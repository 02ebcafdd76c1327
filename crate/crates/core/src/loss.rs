//! Training-objective formulas: cosine similarity, the patient-contrastive
//! loss, summed binary cross-entropy and their weighted mix.
//!
//! Nothing here trains a network. These are scalar reference
//! implementations usable from tests and from whatever training loop
//! produces the embeddings and predictions.

use crate::error::{Error, Result};

/// Feature vector of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("embedding must have at least one dimension"));
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for Embedding {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Ground-truth multi-label targets and predicted probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVector {
    pub truth: Vec<bool>,
    pub predicted: Vec<f64>,
}

impl LabelVector {
    pub fn new(truth: Vec<bool>, predicted: Vec<f64>) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::param(format!(
                "label vector lengths differ: {} targets, {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        Ok(Self { truth, predicted })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub tau: f64,
    pub lambda: f64,
    pub k: usize,
    pub epsilon: f64,
}

impl LossParams {
    pub const DEFAULT_TAU: f64 = 0.07;
    pub const DEFAULT_LAMBDA: f64 = 0.80;
    pub const DEFAULT_K: usize = 4;
    pub const DEFAULT_EPSILON: f64 = 1e-12;

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::param(format!("tau must be positive, got {}", self.tau)));
        }
        crate::map::check_unit("lambda", self.lambda)?;
        if self.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::param(format!(
                "epsilon must lie in (0, 0.5), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

impl Default for LossParams {
    fn default() -> Self {
        Self {
            tau: Self::DEFAULT_TAU,
            lambda: Self::DEFAULT_LAMBDA,
            k: Self::DEFAULT_K,
            epsilon: Self::DEFAULT_EPSILON,
        }
    }
}

pub fn cosine_sim(a: &Embedding, b: &Embedding) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::param(format!(
            "embedding dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::param("cosine similarity of a zero-norm embedding"));
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Negative log-probability of the positive among the positive and all
/// negatives, with logits `sim / tau`.
///
/// The positive term is part of the normalizer, so the loss is never
/// negative and equals `ln(1 + k)` when every similarity is the same.
pub fn contrastive_loss(
    query: &Embedding,
    positive: &Embedding,
    negatives: &[Embedding],
    tau: f64,
) -> Result<f64> {
    if negatives.is_empty() {
        return Err(Error::param("contrastive loss needs at least one negative"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param(format!("tau must be positive, got {tau}")));
    }
    let pos_logit = cosine_sim(query, positive)? / tau;
    let mut logits = Vec::with_capacity(negatives.len() + 1);
    logits.push(pos_logit);
    for neg in negatives {
        logits.push(cosine_sim(query, neg)? / tau);
    }
    // log-sum-exp, shifted by the largest logit
    let peak = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = peak + logits.iter().map(|l| (l - peak).exp()).sum::<f64>().ln();
    Ok((lse - pos_logit).max(0.0))
}

/// Sum over classes of per-class binary cross-entropy; predictions are
/// clamped into `[epsilon, 1 - epsilon]` first.
pub fn bce_loss(labels: &LabelVector, epsilon: f64) -> Result<f64> {
    if labels.truth.len() != labels.predicted.len() {
        return Err(Error::param(format!(
            "label vector lengths differ: {} targets, {} predictions",
            labels.truth.len(),
            labels.predicted.len()
        )));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::param(format!("epsilon must lie in (0, 0.5), got {epsilon}")));
    }
    let mut total = 0.0;
    for (&y, &p) in labels.truth.iter().zip(&labels.predicted) {
        if p.is_nan() {
            return Err(Error::param("NaN prediction"));
        }
        let p = p.clamp(epsilon, 1.0 - epsilon);
        total += if y { -p.ln() } else { -(1.0 - p).ln() };
    }
    Ok(total)
}

/// `lambda * ce + (1 - lambda) * con`.
pub fn total_loss(ce: f64, con: f64, lambda: f64) -> f64 {
    lambda * ce + (1.0 - lambda) * con
}
