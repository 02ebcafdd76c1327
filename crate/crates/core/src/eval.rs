//! IoU scoring and per-label detection accuracy across IoU cutoffs.

use std::collections::HashMap;

use crate::boxgen::BoundingBox;
use crate::error::{Error, Result};

/// IoU cutoffs 0.1 through 0.7.
pub const DEFAULT_THRESHOLDS: [f64; 7] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];

/// Radiologist box, in original-image pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord {
    pub image_id: String,
    pub label: String,
    pub bbox: BoundingBox,
    /// `(width, height)` of the original image.
    pub image_dims: (usize, usize),
}

/// Generated box, in the pixels of the map it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub image_id: String,
    pub label: String,
    pub bbox: BoundingBox,
    /// `(width, height)` of the saliency map.
    pub map_dims: (usize, usize),
}

pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection(b).map_or(0, |i| i.area()) as u64;
    let union = a.area() as u64 + b.area() as u64 - inter;
    if union == 0 {
        return 0.0;
    }
    inter as f64 / union as f64
}

/// Maps a box between resolutions. Top-left corners round down and
/// bottom-right corners round up, so the result never loses coverage.
pub fn scale_box(bbox: &BoundingBox, from_dims: (usize, usize), to_dims: (usize, usize)) -> Result<BoundingBox> {
    let ((fw, fh), (tw, th)) = (from_dims, to_dims);
    if fw == 0 || fh == 0 || tw == 0 || th == 0 {
        return Err(Error::param(format!(
            "box scaling needs positive dimensions, got {fw}x{fh} -> {tw}x{th}"
        )));
    }
    if !bbox.fits_within(fw, fh) {
        return Err(Error::param(format!("box {bbox} lies outside {fw}x{fh}")));
    }
    let down = |v: usize, to: usize, from: usize| v * to / from;
    let up = |v: usize, to: usize, from: usize| (v * to).div_ceil(from);
    Ok(BoundingBox {
        x1: down(bbox.x1, tw, fw),
        y1: down(bbox.y1, th, fh),
        x2: up(bbox.x2, tw, fw),
        y2: up(bbox.y2, th, fh),
    })
}

/// IoU of one annotated `(image, label)` pair; `None` when nothing was predicted.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub image_id: String,
    pub label: String,
    pub iou: Option<f64>,
}

/// Matches predictions to annotations by `(image_id, label)` and scores
/// each annotation after rescaling the prediction to image resolution.
///
/// Predictions without an annotation are ignored.
pub fn pair_scores(preds: &[PredictionRecord], truth: &[GroundTruthRecord]) -> Result<Vec<PairScore>> {
    let mut by_key: HashMap<(&str, &str), &PredictionRecord> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_key.insert((&p.image_id, &p.label), p).is_some() {
            return Err(Error::InvalidRecord(format!(
                "more than one prediction for ({}, {})",
                p.image_id, p.label
            )));
        }
    }
    let mut seen = HashMap::with_capacity(truth.len());
    let mut scores = Vec::with_capacity(truth.len());
    for gt in truth {
        if seen.insert((gt.image_id.as_str(), gt.label.as_str()), ()).is_some() {
            return Err(Error::InvalidRecord(format!(
                "more than one annotation for ({}, {})",
                gt.image_id, gt.label
            )));
        }
        let iou = match by_key.get(&(gt.image_id.as_str(), gt.label.as_str())) {
            Some(p) => Some(iou(&scale_box(&p.bbox, p.map_dims, gt.image_dims)?, &gt.bbox)),
            None => None,
        };
        scores.push(PairScore {
            image_id: gt.image_id.clone(),
            label: gt.label.clone(),
            iou,
        });
    }
    Ok(scores)
}

/// Detection accuracy per `(threshold, label)`; `None` marks labels
/// without any annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTable {
    pub thresholds: Vec<f64>,
    pub labels: Vec<String>,
    /// Indexed `[threshold][label]`.
    pub accuracy: Vec<Vec<Option<f64>>>,
    /// Unweighted mean over the labels that have annotations.
    pub mean: Vec<Option<f64>>,
    /// Annotation count per label.
    pub support: Vec<usize>,
}

impl EvalTable {
    pub fn cell(&self, threshold_idx: usize, label: &str) -> Option<f64> {
        let li = self.labels.iter().position(|l| l == label)?;
        self.accuracy[threshold_idx][li]
    }

    /// Mean of the per-threshold means, skipping unavailable rows.
    pub fn overall_mean(&self) -> Option<f64> {
        let vals: Vec<f64> = self.mean.iter().flatten().copied().collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

pub fn validate_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::param("threshold list is empty"));
    }
    if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::param(format!("IoU threshold {t} outside (0, 1)")));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("IoU thresholds must be strictly increasing"));
    }
    Ok(())
}

/// Builds the accuracy table: a pair counts as detected at cutoff `T`
/// when its IoU is at least `T`. Undetected annotations count against
/// their label.
pub fn accuracy_table(
    preds: &[PredictionRecord],
    truth: &[GroundTruthRecord],
    thresholds: &[f64],
    labels: &[String],
) -> Result<EvalTable> {
    validate_thresholds(thresholds)?;
    let scores = pair_scores(preds, truth)?;

    let mut per_label: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for s in &scores {
        if let Some(li) = labels.iter().position(|l| *l == s.label) {
            per_label[li].push(s.iou.unwrap_or(f64::NEG_INFINITY));
        }
    }

    let accuracy: Vec<Vec<Option<f64>>> = thresholds
        .iter()
        .map(|&t| {
            per_label
                .iter()
                .map(|ious| {
                    (!ious.is_empty())
                        .then(|| ious.iter().filter(|&&v| v >= t).count() as f64 / ious.len() as f64)
                })
                .collect()
        })
        .collect();
    let mean = accuracy
        .iter()
        .map(|row| {
            let avail: Vec<f64> = row.iter().flatten().copied().collect();
            (!avail.is_empty()).then(|| avail.iter().sum::<f64>() / avail.len() as f64)
        })
        .collect();

    Ok(EvalTable {
        thresholds: thresholds.to_vec(),
        labels: labels.to_vec(),
        accuracy,
        mean,
        support: per_label.iter().map(Vec::len).collect(),
    })
}
