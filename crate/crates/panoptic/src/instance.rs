//! Detections from the instance branch: class, confidence, box, soft mask.

use crate::error::{Error, Result};

/// Axis-aligned box with inclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl BoundingBox {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Smallest box covering both.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// Errors unless `0 <= x0 <= x1 < width` and `0 <= y0 <= y1 < height`.
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if self.x0 > self.x1 || self.y0 > self.y1 || self.x1 >= width || self.y1 >= height {
            return Err(Error::BoxOutOfBounds {
                x0: self.x0,
                y0: self.y0,
                x1: self.x1,
                y1: self.y1,
                width,
                height,
            });
        }
        Ok(())
    }
}

/// One detected object: a thing class, a confidence, and a box-local
/// soft mask with values in [0, 1], row-major over the box extent.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDetection {
    pub class_id: u32,
    pub confidence: f32,
    pub bbox: BoundingBox,
    pub mask: Vec<f32>,
}

impl InstanceDetection {
    pub fn mask_at(&self, x: u32, y: u32) -> f32 {
        let local_x = (x - self.bbox.x0) as usize;
        let local_y = (y - self.bbox.y0) as usize;
        self.mask[local_y * self.bbox.width() as usize + local_x]
    }
}

/// Ordered detections for one image. The list order is stable; the index
/// is the final tie-break key everywhere downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSet {
    height: u32,
    width: u32,
    detections: Vec<InstanceDetection>,
}

impl InstanceSet {
    pub fn new(height: u32, width: u32, detections: Vec<InstanceDetection>) -> Result<Self> {
        for det in &detections {
            det.bbox.validate(width, height)?;
            let expected = det.bbox.area() as usize;
            if det.mask.len() != expected {
                return Err(Error::MaskShapeMismatch {
                    mask_h: (det.mask.len() / det.bbox.width().max(1) as usize) as u32,
                    mask_w: det.bbox.width(),
                    box_h: det.bbox.height(),
                    box_w: det.bbox.width(),
                });
            }
            if !det.confidence.is_finite() || !(0.0..=1.0).contains(&det.confidence) {
                return Err(Error::ValueOutOfRange {
                    what: "detection confidence",
                    value: det.confidence as f64,
                });
            }
            if let Some(&bad) = det
                .mask
                .iter()
                .find(|v| !v.is_finite() || !(0.0..=1.0).contains(*v))
            {
                return Err(Error::ValueOutOfRange {
                    what: "mask score",
                    value: bad as f64,
                });
            }
        }
        Ok(Self {
            height,
            width,
            detections,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn detections(&self) -> &[InstanceDetection] {
        &self.detections
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }
}
