//! CSV schemas for annotations, predictions and batch failures.
//!
//! Annotations: `image_id,label,x,y,w,h,img_w,img_h` with `(x, y)` the
//! top-left corner and `(w, h)` the extent, in original-image pixels.
//! Fractional coordinates are widened outward to whole pixels.
//!
//! Predictions: `image_id,label,x1,y1,x2,y2,map_w,map_h` with half-open
//! corners in saliency-map pixels.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boxgen::BoundingBox;
use crate::error::{Error, Result};
use crate::eval::{GroundTruthRecord, PredictionRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub image_id: String,
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub img_w: usize,
    pub img_h: usize,
}

impl AnnotationRow {
    pub fn from_record(r: &GroundTruthRecord) -> Self {
        Self {
            image_id: r.image_id.clone(),
            label: r.label.clone(),
            x: r.bbox.x1 as f64,
            y: r.bbox.y1 as f64,
            w: r.bbox.width() as f64,
            h: r.bbox.height() as f64,
            img_w: r.image_dims.0,
            img_h: r.image_dims.1,
        }
    }

    pub fn to_record(&self) -> Result<GroundTruthRecord> {
        let fail = |why: &str| {
            Error::InvalidRecord(format!(
                "annotation ({}, {}): {why}",
                self.image_id, self.label
            ))
        };
        let nums = [self.x, self.y, self.w, self.h];
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(fail("non-finite coordinate"));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(fail("box extent must be positive"));
        }
        if self.x < 0.0 || self.y < 0.0 {
            return Err(fail("box corner is negative"));
        }
        if self.img_w == 0 || self.img_h == 0 {
            return Err(fail("image dimensions must be positive"));
        }
        if self.x + self.w > self.img_w as f64 || self.y + self.h > self.img_h as f64 {
            return Err(fail("box extends past the image"));
        }
        let bbox = BoundingBox {
            x1: self.x.floor() as usize,
            y1: self.y.floor() as usize,
            x2: ((self.x + self.w).ceil() as usize).min(self.img_w),
            y2: ((self.y + self.h).ceil() as usize).min(self.img_h),
        };
        Ok(GroundTruthRecord {
            image_id: self.image_id.clone(),
            label: self.label.clone(),
            bbox,
            image_dims: (self.img_w, self.img_h),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub image_id: String,
    pub label: String,
    pub x1: usize,
    pub y1: usize,
    pub x2: usize,
    pub y2: usize,
    pub map_w: usize,
    pub map_h: usize,
}

impl PredictionRow {
    pub fn from_record(r: &PredictionRecord) -> Self {
        Self {
            image_id: r.image_id.clone(),
            label: r.label.clone(),
            x1: r.bbox.x1,
            y1: r.bbox.y1,
            x2: r.bbox.x2,
            y2: r.bbox.y2,
            map_w: r.map_dims.0,
            map_h: r.map_dims.1,
        }
    }

    pub fn to_record(&self) -> Result<PredictionRecord> {
        let bbox = BoundingBox {
            x1: self.x1,
            y1: self.y1,
            x2: self.x2,
            y2: self.y2,
        };
        if !bbox.fits_within(self.map_w, self.map_h) {
            return Err(Error::InvalidRecord(format!(
                "prediction ({}, {}): box {bbox} does not fit a {}x{} map",
                self.image_id, self.label, self.map_w, self.map_h
            )));
        }
        Ok(PredictionRecord {
            image_id: self.image_id.clone(),
            label: self.label.clone(),
            bbox,
            map_dims: (self.map_w, self.map_h),
        })
    }
}

/// One input that could not be turned into a prediction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FailureRow {
    pub image_id: String,
    pub label: String,
    pub error: String,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    reader.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    // serde only emits a header once a row is written
    let mut writer = csv::WriterBuilder::new()
        .has_headers(!rows.is_empty())
        .from_path(path)
        .map_err(csv_err)?;
    if rows.is_empty() {
        writer.write_record(header).map_err(csv_err)?;
    }
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub const ANNOTATION_HEADER: [&str; 8] = ["image_id", "label", "x", "y", "w", "h", "img_w", "img_h"];
pub const PREDICTION_HEADER: [&str; 8] = ["image_id", "label", "x1", "y1", "x2", "y2", "map_w", "map_h"];
pub const FAILURE_HEADER: [&str; 3] = ["image_id", "label", "error"];

pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<GroundTruthRecord>> {
    read_rows::<AnnotationRow>(path.as_ref())?
        .iter()
        .map(AnnotationRow::to_record)
        .collect()
}

pub fn write_annotations(path: impl AsRef<Path>, records: &[GroundTruthRecord]) -> Result<()> {
    let rows: Vec<_> = records.iter().map(AnnotationRow::from_record).collect();
    write_rows(path.as_ref(), &rows, &ANNOTATION_HEADER)
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    read_rows::<PredictionRow>(path.as_ref())?
        .iter()
        .map(PredictionRow::to_record)
        .collect()
}

pub fn write_predictions(path: impl AsRef<Path>, records: &[PredictionRecord]) -> Result<()> {
    let rows: Vec<_> = records.iter().map(PredictionRow::from_record).collect();
    write_rows(path.as_ref(), &rows, &PREDICTION_HEADER)
}

pub fn write_failures(path: impl AsRef<Path>, rows: &[FailureRow]) -> Result<()> {
    write_rows(path.as_ref(), rows, &FAILURE_HEADER)
}
