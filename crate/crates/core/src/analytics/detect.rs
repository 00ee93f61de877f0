//! Deterministic bright-blob detector standing in for a learned model.

use super::{Analytic, Context, Transform};
use crate::aerodata::{AeroData, BoundingBox};
use crate::drone::Frame;

pub const DEFAULT_THRESHOLD: u8 = 200;
pub const DEFAULT_MIN_PIXELS: usize = 9;

/// Bounding box of the largest 4-connected region with intensity at or above
/// `threshold`. Confidence is the share of above-threshold pixels inside the
/// box. Regions smaller than `min_pixels` are ignored; ties go to the region
/// found first in row-major order.
pub fn builtin_blob_detector(
    frame: &Frame,
    threshold: u8,
    min_pixels: usize,
    label: &str,
) -> Vec<BoundingBox> {
    let (w, h) = (frame.width as usize, frame.height as usize);
    let bright = |i: usize| frame.pixels[i] >= threshold;
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    // (pixels, x0, y0, x1, y1)
    let mut best: Option<(usize, usize, usize, usize, usize)> = None;
    for start in 0..w * h {
        if seen[start] || !bright(start) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut n, mut x0, mut y0, mut x1, mut y1) = (0, usize::MAX, usize::MAX, 0, 0);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            n += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            let mut visit = |j: usize| {
                if !seen[j] && bright(j) {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if n >= min_pixels && best.is_none_or(|b| n > b.0) {
            best = Some((n, x0, y0, x1, y1));
        }
    }
    let Some((_, x0, y0, x1, y1)) = best else {
        return Vec::new();
    };
    let lit = (y0..=y1)
        .flat_map(|y| (x0..=x1).map(move |x| y * w + x))
        .filter(|&i| bright(i))
        .count();
    let area = (x1 - x0 + 1) * (y1 - y0 + 1);
    let (wf, hf) = (w as f64, h as f64);
    vec![BoundingBox::new(
        label,
        lit as f64 / area as f64,
        (x0 + x1 + 1) as f64 / 2.0 / wf,
        (y0 + y1 + 1) as f64 / 2.0 / hf,
        (x1 - x0 + 1) as f64 / wf,
        (y1 - y0 + 1) as f64 / hf,
    )]
}

#[derive(Debug, Clone)]
pub struct BlobDetector {
    name: String,
    label: String,
    pub threshold: u8,
    pub min_pixels: usize,
}

impl BlobDetector {
    pub fn new(name: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            label: label.into(),
            threshold: DEFAULT_THRESHOLD,
            min_pixels: DEFAULT_MIN_PIXELS,
        }
    }
}

impl Transform for BlobDetector {
    type Input = Frame;
    type Output = BoundingBox;

    fn name(&self) -> &str {
        &self.name
    }

    fn is_vision(&self) -> bool {
        true
    }

    fn process(&mut self, item: &AeroData<Frame>, _: &mut Context) -> Vec<BoundingBox> {
        builtin_blob_detector(item.get_data(), self.threshold, self.min_pixels, &self.label)
    }
}

/// Hazard-vest detector for the person being followed.
pub fn vip_detection() -> Analytic<BlobDetector> {
    Analytic::new(BlobDetector::new("vip_detect", "hazard_vest"))
}

pub fn fire_detection() -> Analytic<BlobDetector> {
    Analytic::new(BlobDetector::new("fire_detect", "fire"))
}
