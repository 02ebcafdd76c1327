//! PNG overlays: the fused map in grayscale with the generated box in red
//! and, when known, the annotated box in yellow.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::boxgen::BoundingBox;
use crate::error::{Error, Result};
use crate::map::{scale_to_255, SaliencyMap};

pub const GENERATED_COLOR: Rgb<u8> = Rgb([255, 0, 0]);
pub const GROUND_TRUTH_COLOR: Rgb<u8> = Rgb([255, 255, 0]);

fn outline(img: &mut RgbImage, b: &BoundingBox, color: Rgb<u8>) {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let x2 = b.x2.min(w);
    let y2 = b.y2.min(h);
    if b.x1 >= x2 || b.y1 >= y2 {
        return;
    }
    for x in b.x1..x2 {
        img.put_pixel(x as u32, b.y1 as u32, color);
        img.put_pixel(x as u32, (y2 - 1) as u32, color);
    }
    for y in b.y1..y2 {
        img.put_pixel(b.x1 as u32, y as u32, color);
        img.put_pixel((x2 - 1) as u32, y as u32, color);
    }
}

pub fn render(map: &SaliencyMap, generated: Option<&BoundingBox>, truth: Option<&BoundingBox>) -> RgbImage {
    let scaled = scale_to_255(map);
    let mut img = RgbImage::from_fn(map.width() as u32, map.height() as u32, |x, y| {
        let v = scaled.get(x as usize, y as usize).round() as u8;
        Rgb([v, v, v])
    });
    if let Some(t) = truth {
        outline(&mut img, t, GROUND_TRUTH_COLOR);
    }
    if let Some(g) = generated {
        outline(&mut img, g, GENERATED_COLOR);
    }
    img
}

pub fn save_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}
