//! Saliency-map fusion and bounding-box generation for weakly supervised
//! localization on chest X-rays.
//!
//! A class-discriminative heatmap and a high-resolution gradient map are
//! scaled to `[0, 255]`, blended, thresholded and searched for maximal
//! all-foreground rectangles. Candidates are grown ring by ring while the
//! added cells stay mostly foreground, and the brightest one wins. The
//! [`eval`] module scores boxes against radiologist annotations across IoU
//! cutoffs.

pub mod boxgen;
pub mod error;
pub mod eval;
pub mod io;
pub mod loss;
pub mod map;
pub mod pipeline;
pub mod sampling;

pub use boxgen::{
    expand_box, generate_bbox, max_rectangles, select_box, BoundingBox, BoxGeneration,
};
pub use error::{Error, Result};
pub use eval::{accuracy_table, iou, scale_box, EvalTable, GroundTruthRecord, PredictionRecord};
pub use loss::{bce_loss, contrastive_loss, cosine_sim, total_loss, Embedding, LabelVector, LossParams};
pub use map::{fuse, threshold_mask, scale_to_255, BinaryMask, FusionParams, SaliencyMap};
pub use sampling::{sample_pairs, MetadataRecord, SampledPairs};
