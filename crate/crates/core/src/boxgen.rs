//! Candidate rectangles, ring expansion and selection on the fused map.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{check_dims, fuse, scale_to_255, threshold_mask, BinaryMask, FusionParams, SaliencyMap};

/// Pixel rectangle with inclusive top-left `(x1, y1)` and exclusive
/// bottom-right `(x2, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x1: usize,
    pub y1: usize,
    pub x2: usize,
    pub y2: usize,
}

impl BoundingBox {
    pub fn new(x1: usize, y1: usize, x2: usize, y2: usize) -> Result<Self> {
        if x1 >= x2 || y1 >= y2 {
            return Err(Error::param(format!(
                "degenerate box ({x1}, {y1}, {x2}, {y2})"
            )));
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            x1: 0,
            y1: 0,
            x2: width,
            y2: height,
        }
    }

    pub fn width(&self) -> usize {
        self.x2 - self.x1
    }

    pub fn height(&self) -> usize {
        self.y2 - self.y1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn fits_within(&self, width: usize, height: usize) -> bool {
        self.x1 < self.x2 && self.y1 < self.y2 && self.x2 <= width && self.y2 <= height
    }

    pub fn contains(&self, other: &BoundingBox) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }

    pub fn contains_point(&self, x: usize, y: usize) -> bool {
        (self.x1..self.x2).contains(&x) && (self.y1..self.y2).contains(&y)
    }

    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x1 = self.x1.max(other.x1);
        let y1 = self.y1.max(other.y1);
        let x2 = self.x2.min(other.x2);
        let y2 = self.y2.min(other.y2);
        (x1 < x2 && y1 < y2).then_some(BoundingBox { x1, y1, x2, y2 })
    }

    pub fn overlaps(&self, other: &BoundingBox) -> bool {
        self.intersection(other).is_some()
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.y1, self.x2, self.y2)
    }
}

/// Orders rectangles by area (larger first), then top-left, then bottom-right.
fn rank(a: &BoundingBox, b: &BoundingBox) -> Ordering {
    b.area()
        .cmp(&a.area())
        .then((a.y1, a.x1, a.y2, a.x2).cmp(&(b.y1, b.x1, b.y2, b.x2)))
}

/// Largest all-ones rectangle via the row-by-row histogram stack.
fn largest_rectangle(mask: &BinaryMask) -> Option<BoundingBox> {
    let (width, height) = mask.dims();
    let mut heights = vec![0usize; width];
    let mut stack: Vec<usize> = Vec::with_capacity(width);
    let mut best: Option<BoundingBox> = None;

    for y in 0..height {
        for (x, h) in heights.iter_mut().enumerate() {
            *h = if mask.get(x, y) { *h + 1 } else { 0 };
        }
        stack.clear();
        for i in 0..=width {
            let cur = if i < width { heights[i] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] < cur {
                    break;
                }
                stack.pop();
                let h = heights[top];
                if h == 0 {
                    continue;
                }
                let left = stack.last().map_or(0, |&s| s + 1);
                let rect = BoundingBox {
                    x1: left,
                    y1: y + 1 - h,
                    x2: i,
                    y2: y + 1,
                };
                if best.is_none_or(|b| rank(&rect, &b) == Ordering::Less) {
                    best = Some(rect);
                }
            }
            stack.push(i);
        }
    }
    best
}

/// Greedily extracts up to `top_k` disjoint maximal all-ones rectangles.
///
/// Each round takes the largest rectangle left in a working copy of the
/// mask and clears its cells. Equal areas resolve to the smaller top-left
/// corner (row first). Returns an empty list for an all-zero mask.
pub fn max_rectangles(mask: &BinaryMask, top_k: usize) -> Vec<BoundingBox> {
    let mut work = mask.clone();
    let mut out = Vec::with_capacity(top_k.min(16));
    while out.len() < top_k {
        let Some(rect) = largest_rectangle(&work) else {
            break;
        };
        for y in rect.y1..rect.y2 {
            for x in rect.x1..rect.x2 {
                work.set(x, y, false);
            }
        }
        out.push(rect);
    }
    out
}

/// Summed-area table of mask ones.
struct OnesTable {
    stride: usize,
    sums: Vec<usize>,
}

impl OnesTable {
    fn new(mask: &BinaryMask) -> Self {
        let (w, h) = mask.dims();
        let stride = w + 1;
        let mut sums = vec![0usize; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0;
            for x in 0..w {
                row += usize::from(mask.get(x, y));
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { stride, sums }
    }

    fn count(&self, b: &BoundingBox) -> usize {
        let s = self.stride;
        self.sums[b.y2 * s + b.x2] + self.sums[b.y1 * s + b.x1]
            - self.sums[b.y1 * s + b.x2]
            - self.sums[b.y2 * s + b.x1]
    }
}

/// Same as [`expand_box`], also reporting how many growth steps were applied.
pub fn expand_box_counted(bbox: BoundingBox, mask: &BinaryMask) -> (BoundingBox, usize) {
    let table = OnesTable::new(mask);
    expand_with(&table, bbox, mask.dims())
}

fn expand_with(table: &OnesTable, bbox: BoundingBox, (width, height): (usize, usize)) -> (BoundingBox, usize) {
    let mut cur = bbox;
    let mut steps = 0;
    loop {
        let grown = BoundingBox {
            x1: cur.x1.saturating_sub(1),
            y1: cur.y1.saturating_sub(1),
            x2: (cur.x2 + 1).min(width),
            y2: (cur.y2 + 1).min(height),
        };
        if grown == cur {
            return (cur, steps);
        }
        let ring_cells = grown.area() - cur.area();
        let ring_ones = table.count(&grown) - table.count(&cur);
        let ring_zeros = ring_cells - ring_ones;
        // zeros/ones > 1, with ones == 0 counting as infinite
        if ring_ones == 0 || ring_zeros > ring_ones {
            return (cur, steps);
        }
        cur = grown;
        steps += 1;
    }
}

/// Grows `bbox` one pixel per side while each new ring holds at least as
/// many ones as zeros. Sides at the image border stay put.
///
/// The ring that breaks the rule is not absorbed, so the result is a
/// fixpoint: expanding it again returns it unchanged.
pub fn expand_box(bbox: BoundingBox, mask: &BinaryMask) -> BoundingBox {
    expand_box_counted(bbox, mask).0
}

fn mean_intensity(map: &SaliencyMap, b: &BoundingBox) -> f64 {
    let mut sum = 0.0;
    for y in b.y1..b.y2 {
        for x in b.x1..b.x2 {
            sum += map.get(x, y);
        }
    }
    sum / b.area() as f64
}

/// Picks the candidate with the highest mean intensity on the masked map.
///
/// Ties go to the larger box, then to the smaller `(y1, x1)`.
pub fn select_box(candidates: &[BoundingBox], masked_map: &SaliencyMap) -> Result<BoundingBox> {
    let (w, h) = masked_map.dims();
    if let Some(bad) = candidates.iter().find(|c| !c.fits_within(w, h)) {
        return Err(Error::param(format!(
            "candidate {bad} lies outside the {w}x{h} map"
        )));
    }
    candidates
        .iter()
        .map(|c| (c, mean_intensity(masked_map, c)))
        .max_by(|(a, ma), (b, mb)| {
            ma.total_cmp(mb)
                .then(a.area().cmp(&b.area()))
                .then((b.y1, b.x1).cmp(&(a.y1, a.x1)))
        })
        .map(|(c, _)| *c)
        .ok_or(Error::NoLocalizableRegion)
}

/// Every intermediate of one box-generation run.
#[derive(Debug, Clone)]
pub struct BoxGeneration {
    pub fused: SaliencyMap,
    pub mask: BinaryMask,
    /// Rectangles as extracted, before expansion.
    pub candidates: Vec<BoundingBox>,
    /// Rectangles handed to selection (expanded when enabled).
    pub expanded: Vec<BoundingBox>,
    pub selected: BoundingBox,
}

impl BoxGeneration {
    pub fn run(heat: &SaliencyMap, grad: &SaliencyMap, params: &FusionParams) -> Result<Self> {
        params.validate()?;
        check_dims(heat.dims(), grad.dims())?;
        let fused = fuse(&scale_to_255(heat), &scale_to_255(grad), params.t)?;
        let mask = threshold_mask(&fused, params.threshold_frac);
        let masked = fused.masked(&mask)?;

        let candidates = max_rectangles(&mask, params.top_k);
        if candidates.is_empty() {
            return Err(Error::NoLocalizableRegion);
        }
        let expanded = if params.expand {
            let table = OnesTable::new(&mask);
            candidates
                .iter()
                .map(|&c| expand_with(&table, c, mask.dims()).0)
                .collect()
        } else {
            candidates.clone()
        };
        let selected = select_box(&expanded, &masked)?;
        Ok(Self {
            fused,
            mask,
            candidates,
            expanded,
            selected,
        })
    }
}

/// Runs the full chain: scale both maps, blend, threshold, extract
/// candidates, optionally expand them, and select the brightest.
pub fn generate_bbox(heat: &SaliencyMap, grad: &SaliencyMap, params: &FusionParams) -> Result<BoundingBox> {
    BoxGeneration::run(heat, grad, params).map(|g| g.selected)
}
