//! Saliency maps, intensity scaling, weighted fusion and threshold masking.

use crate::error::{Error, Result};

/// Single-channel intensity grid stored row-major.
///
/// Raw heatmaps and gradient maps arrive in arbitrary units; after
/// [`scale_to_255`] every value lies in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "map dimensions must be positive, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::param(format!(
                "{width}x{height} map needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "non-finite intensity at ({}, {})",
                idx % width,
                idx / width
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Builds a map by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Applies `f` to every intensity. Panics if `f` produces a non-finite value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        assert!(values.iter().all(|v| v.is_finite()), "non-finite intensity");
        Self {
            width: self.width,
            height: self.height,
            values,
        }
    }

    /// Zeroes every pixel whose mask bit is 0.
    pub fn masked(&self, mask: &BinaryMask) -> Result<Self> {
        check_dims(self.dims(), mask.dims())?;
        let values = self
            .values
            .iter()
            .zip(mask.bits())
            .map(|(&v, &b)| if b { v } else { 0.0 })
            .collect();
        Ok(Self {
            width: self.width,
            height: self.height,
            values,
        })
    }
}

/// Row-major grid of foreground/background bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(Error::param(format!(
                "{width}x{height} mask needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Convenience constructor from rows of 0/1 integers.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::param("mask rows have unequal lengths"));
        }
        let bits = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().map(|&b| b != 0))
            .collect();
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub(crate) fn set(&mut self, x: usize, y: usize, bit: bool) {
        self.bits[y * self.width + x] = bit;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// True if every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

/// Knobs for fusion, masking and candidate generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    /// Heatmap weight; the gradient map gets `1 - t`.
    pub t: f64,
    /// Mask cutoff as a fraction of the fused map's maximum.
    pub threshold_frac: f64,
    pub top_k: usize,
    pub expand: bool,
}

impl FusionParams {
    pub const DEFAULT_T: f64 = 0.30;
    pub const DEFAULT_THRESHOLD_FRAC: f64 = 0.35;
    pub const DEFAULT_TOP_K: usize = 5;

    pub fn validate(&self) -> Result<()> {
        check_unit("t", self.t)?;
        check_unit("threshold_frac", self.threshold_frac)?;
        if self.top_k == 0 {
            return Err(Error::param("top_k must be at least 1"));
        }
        Ok(())
    }
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            t: Self::DEFAULT_T,
            threshold_frac: Self::DEFAULT_THRESHOLD_FRAC,
            top_k: Self::DEFAULT_TOP_K,
            expand: true,
        }
    }
}

pub(crate) fn check_unit(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in [0, 1], got {value}")))
    }
}

pub(crate) fn check_dims(left: (usize, usize), right: (usize, usize)) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left_w: left.0,
            left_h: left.1,
            right_w: right.0,
            right_h: right.1,
        })
    }
}

/// Min-max rescales intensities onto `[0, 255]`.
///
/// A constant map carries no contrast and becomes all zeros.
pub fn scale_to_255(map: &SaliencyMap) -> SaliencyMap {
    let (lo, hi) = (map.min(), map.max());
    let range = hi - lo;
    if range <= 0.0 {
        return map.map_values(|_| 0.0);
    }
    map.map_values(|v| (v - lo) / range * 255.0)
}

/// Convex blend `t * heat + (1 - t) * grad`, pixel by pixel.
///
/// Both inputs are expected to be scaled already.
pub fn fuse(heat: &SaliencyMap, grad: &SaliencyMap, t: f64) -> Result<SaliencyMap> {
    check_dims(heat.dims(), grad.dims())?;
    check_unit("t", t)?;
    let values = heat
        .values
        .iter()
        .zip(&grad.values)
        .map(|(&h, &g)| t * h + (1.0 - t) * g)
        .collect();
    SaliencyMap::new(heat.width, heat.height, values)
}

/// Sets a bit wherever intensity strictly exceeds `threshold_frac * max(map)`.
pub fn threshold_mask(map: &SaliencyMap, threshold_frac: f64) -> BinaryMask {
    let cutoff = threshold_frac * map.max();
    BinaryMask {
        width: map.width,
        height: map.height,
        bits: map.values.iter().map(|&v| v > cutoff).collect(),
    }
}
