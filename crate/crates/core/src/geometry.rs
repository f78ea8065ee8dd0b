//! Pixel- and normalized-coordinate primitives shared by every stage of the
//! pipeline: axis-aligned boxes in page pixels, their projection onto the
//! integer `[0, 1000]` grid, and the box arithmetic (IoU, intersection area)
//! that drives occlusion handling and region prompts.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Extent of the normalized coordinate grid. Prompts address regions on an
/// integer grid independent of page resolution.
pub const NORM_GRID: u16 = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid pixel box ({x1}, {y1}, {x2}, {y2}): require 0 <= x1 < x2 and 0 <= y1 < y2")]
    InvalidPixelBox { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("invalid normalized box ({x1}, {y1}, {x2}, {y2}): require 0 <= x1 < x2 <= 1000 and 0 <= y1 < y2 <= 1000")]
    InvalidNormBox { x1: u16, y1: u16, x2: u16, y2: u16 },
    #[error("invalid page size {width}x{height}: both dimensions must be >= 1")]
    InvalidPageSize { width: u32, height: u32 },
    #[error("coordinate {value} out of range [0, {max}] for the normalized grid")]
    InvalidNormCoord { value: u16, max: u16 },
    #[error("box ({x1}, {y1}, {x2}, {y2}) lies outside page {width}x{height}")]
    OutOfBounds {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        width: u32,
        height: u32,
    },
}

/// Raster dimensions of a page or natural image, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PageSize {
    width: u32,
    height: u32,
}

impl PageSize {
    pub fn new(width: u32, height: u32) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidPageSize { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Width/height as an exact rational comparison against another size:
    /// `self` is wider-proportioned than `other` iff w*oh > ow*h.
    pub fn wider_than(&self, other: &PageSize) -> bool {
        u64::from(self.width) * u64::from(other.height) > u64::from(other.width) * u64::from(self.height)
    }
}

impl Serialize for PageSize {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.width, self.height).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PageSize {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (width, height) = <(u32, u32)>::deserialize(deserializer)?;
        PageSize::new(width, height).map_err(D::Error::custom)
    }
}

/// An axis-aligned box in pixel coordinates, origin top-left.
///
/// Both corners are kept as reals so that upstream parser output survives
/// ingestion unchanged. The constructor enforces `x1 < x2`, `y1 < y2` and
/// non-negative coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelBox {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl PixelBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        let ok = x1.is_finite()
            && y1.is_finite()
            && x2.is_finite()
            && y2.is_finite()
            && x1 >= 0.0
            && y1 >= 0.0
            && x1 < x2
            && y1 < y2;
        if !ok {
            return Err(GeometryError::InvalidPixelBox { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn y2(&self) -> f64 {
        self.y2
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn within_page(&self, size: PageSize) -> bool {
        self.x2 <= f64::from(size.width) && self.y2 <= f64::from(size.height)
    }

    /// True when `other` lies fully inside `self` (edges may coincide).
    pub fn contains_box(&self, other: &PixelBox) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }

    /// Smallest box covering both operands.
    pub fn union_bounds(&self, other: &PixelBox) -> PixelBox {
        PixelBox {
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
            x2: self.x2.max(other.x2),
            y2: self.y2.max(other.y2),
        }
    }

    /// Area of overlap in px². Zero iff the boxes share no interior.
    pub fn intersection_area(&self, other: &PixelBox) -> f64 {
        let w = (self.x2.min(other.x2) - self.x1.max(other.x1)).max(0.0);
        let h = (self.y2.min(other.y2) - self.y1.max(other.y1)).max(0.0);
        w * h
    }

    /// Standard intersection-over-union in `[0, 1]`. Symmetric.
    pub fn iou(&self, other: &PixelBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    /// Projects the box onto the `[0, 1000]` grid with round-half-up per
    /// coordinate. A coordinate pair collapsed by rounding is widened by one
    /// grid unit toward the in-range side so thin regions stay addressable.
    pub fn normalize(&self, size: PageSize) -> Result<NormBox, GeometryError> {
        if !self.within_page(size) {
            return Err(GeometryError::OutOfBounds {
                x1: self.x1,
                y1: self.y1,
                x2: self.x2,
                y2: self.y2,
                width: size.width,
                height: size.height,
            });
        }
        let grid = f64::from(NORM_GRID);
        let nx1 = round_half_up(self.x1 / f64::from(size.width) * grid);
        let nx2 = round_half_up(self.x2 / f64::from(size.width) * grid);
        let ny1 = round_half_up(self.y1 / f64::from(size.height) * grid);
        let ny2 = round_half_up(self.y2 / f64::from(size.height) * grid);
        let (nx1, nx2) = widen_if_degenerate(nx1, nx2);
        let (ny1, ny2) = widen_if_degenerate(ny1, ny2);
        NormBox::new(nx1, ny1, nx2, ny2)
    }
}

impl Serialize for PixelBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // Integral coordinates serialize as JSON integers so that ingested
        // records re-serialize field-for-field.
        let mut seq = Vec::with_capacity(4);
        for v in self.corners() {
            if v.fract() == 0.0 && v.abs() < 9.0e15 {
                seq.push(serde_json::Value::from(v as i64));
            } else {
                seq.push(serde_json::Value::from(v));
            }
        }
        seq.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PixelBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x1, y1, x2, y2] = <[f64; 4]>::deserialize(deserializer)?;
        PixelBox::new(x1, y1, x2, y2).map_err(D::Error::custom)
    }
}

/// A box on the integer `[0, 1000]` grid, the form coordinates take inside
/// prompts and answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormBox {
    x1: u16,
    y1: u16,
    x2: u16,
    y2: u16,
}

impl NormBox {
    pub fn new(x1: u16, y1: u16, x2: u16, y2: u16) -> Result<Self, GeometryError> {
        if x1 < x2 && y1 < y2 && x2 <= NORM_GRID && y2 <= NORM_GRID {
            Ok(Self { x1, y1, x2, y2 })
        } else {
            Err(GeometryError::InvalidNormBox { x1, y1, x2, y2 })
        }
    }

    pub fn x1(&self) -> u16 {
        self.x1
    }

    pub fn y1(&self) -> u16 {
        self.y1
    }

    pub fn x2(&self) -> u16 {
        self.x2
    }

    pub fn y2(&self) -> u16 {
        self.y2
    }

    pub fn corners(&self) -> [u16; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn contains_point(&self, p: NormPoint) -> bool {
        self.x1 <= p.x && p.x <= self.x2 && self.y1 <= p.y && p.y <= self.y2
    }

    /// Containment with a symmetric slack in grid units, used by properties
    /// that must absorb rounding.
    pub fn contains_box_slack(&self, other: &NormBox, slack: u16) -> bool {
        i32::from(self.x1) - i32::from(slack) <= i32::from(other.x1)
            && i32::from(self.y1) - i32::from(slack) <= i32::from(other.y1)
            && i32::from(self.x2) + i32::from(slack) >= i32::from(other.x2)
            && i32::from(self.y2) + i32::from(slack) >= i32::from(other.y2)
    }

    /// Clamps all coordinates into `[lo, hi]`, re-widening if the clamp
    /// collapsed a side. Used for the foreground prompt convention.
    pub fn clamp_into(&self, lo: u16, hi: u16) -> NormBox {
        debug_assert!(lo < hi && hi <= NORM_GRID);
        let mut x1 = self.x1.clamp(lo, hi);
        let mut x2 = self.x2.clamp(lo, hi);
        let mut y1 = self.y1.clamp(lo, hi);
        let mut y2 = self.y2.clamp(lo, hi);
        if x1 >= x2 {
            if x2 < hi {
                x2 += 1;
            } else {
                x1 = x2 - 1;
            }
        }
        if y1 >= y2 {
            if y2 < hi {
                y2 += 1;
            } else {
                y1 = y2 - 1;
            }
        }
        NormBox { x1, y1, x2, y2 }
    }

    /// Inverse of [`PixelBox::normalize`] up to grid rounding: maps grid
    /// coordinates back onto the page raster.
    pub fn denormalize(&self, size: PageSize) -> PixelBox {
        let grid = f64::from(NORM_GRID);
        PixelBox {
            x1: f64::from(self.x1) / grid * f64::from(size.width),
            y1: f64::from(self.y1) / grid * f64::from(size.height),
            x2: f64::from(self.x2) / grid * f64::from(size.width),
            y2: f64::from(self.y2) / grid * f64::from(size.height),
        }
    }
}

impl Serialize for NormBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.corners().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NormBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x1, y1, x2, y2] = <[u16; 4]>::deserialize(deserializer)?;
        NormBox::new(x1, y1, x2, y2).map_err(D::Error::custom)
    }
}

/// A point on the `[0, 1000]` grid; the position prompt for line-level tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormPoint {
    pub x: u16,
    pub y: u16,
}

impl NormPoint {
    pub fn new(x: u16, y: u16) -> Result<Self, GeometryError> {
        if x > NORM_GRID {
            return Err(GeometryError::InvalidNormCoord { value: x, max: NORM_GRID });
        }
        if y > NORM_GRID {
            return Err(GeometryError::InvalidNormCoord { value: y, max: NORM_GRID });
        }
        Ok(Self { x, y })
    }
}

/// Anchor point for a line prompt: 2 px in from the left edge at vertical
/// center, normalized and clamped into the line's own normalized box so the
/// point always resolves back to its line.
pub fn line_anchor_point(line_box: &PixelBox, size: PageSize) -> Result<NormPoint, GeometryError> {
    let norm = line_box.normalize(size)?;
    let grid = f64::from(NORM_GRID);
    let px = line_box.x1 + 2.0;
    let py = (line_box.y1 + line_box.y2) / 2.0;
    let nx = round_i64(px / f64::from(size.width) * grid).clamp(i64::from(norm.x1()), i64::from(norm.x2()));
    let ny = round_i64(py / f64::from(size.height) * grid).clamp(i64::from(norm.y1()), i64::from(norm.y2()));
    NormPoint::new(nx as u16, ny as u16)
}

/// Round half up, fixed for determinism across platforms.
fn round_half_up(v: f64) -> u16 {
    debug_assert!((0.0..=f64::from(NORM_GRID) + 0.5).contains(&v));
    (v + 0.5).floor() as u16
}

fn round_i64(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

fn widen_if_degenerate(lo: u16, hi: u16) -> (u16, u16) {
    if lo < hi {
        (lo, hi)
    } else if hi < NORM_GRID {
        (lo, hi + 1)
    } else {
        (lo - 1, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pbox(x1: f64, y1: f64, x2: f64, y2: f64) -> PixelBox {
        PixelBox::new(x1, y1, x2, y2).unwrap()
    }

    fn size(w: u32, h: u32) -> PageSize {
        PageSize::new(w, h).unwrap()
    }

    #[test]
    fn normalize_full_page() {
        let n = pbox(0.0, 0.0, 2048.0, 2048.0).normalize(size(2048, 2048)).unwrap();
        assert_eq!(n.corners(), [0, 0, 1000, 1000]);
    }

    #[test]
    fn normalize_foreground_convention_box() {
        let n = pbox(2.0, 2.0, 998.0, 998.0).normalize(size(1000, 1000)).unwrap();
        assert_eq!(n.corners(), [2, 2, 998, 998]);
    }

    #[test]
    fn normalize_hand_evaluated() {
        // round(v / 1024 * 1000) for each corner
        let n = pbox(512.0, 256.0, 768.0, 512.0).normalize(size(1024, 1024)).unwrap();
        assert_eq!(n.corners(), [500, 250, 750, 500]);
    }

    #[test]
    fn normalize_rejects_out_of_bounds() {
        let err = pbox(0.0, 0.0, 1025.0, 100.0).normalize(size(1024, 1024));
        assert!(matches!(err, Err(GeometryError::OutOfBounds { .. })));
    }

    #[test]
    fn normalize_widens_degenerate_boxes() {
        // 1-px wide line on a huge page collapses to a single grid column.
        let n = pbox(100.0, 100.0, 101.0, 140.0).normalize(size(10_000, 10_000)).unwrap();
        assert_eq!(n.x1(), 10);
        assert_eq!(n.x2(), 11);
        // Collapse at the far edge widens inward.
        let n = pbox(9_998.0, 0.0, 10_000.0, 5_000.0).normalize(size(10_000, 10_000)).unwrap();
        assert_eq!((n.x1(), n.x2()), (999, 1000));
    }

    #[test]
    fn denormalize_examples() {
        let p = NormBox::new(0, 0, 1000, 1000).unwrap().denormalize(size(500, 500));
        assert_eq!(p.corners(), [0.0, 0.0, 500.0, 500.0]);
        let p = NormBox::new(500, 500, 1000, 1000).unwrap().denormalize(size(1000, 1000));
        assert_eq!(p.corners(), [500.0, 500.0, 1000.0, 1000.0]);
        let p = NormBox::new(2, 2, 998, 998).unwrap().denormalize(size(1024, 1024));
        for (got, want) in p.corners().into_iter().zip([2.048, 2.048, 1021.952, 1021.952]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn iou_examples() {
        let a = pbox(0.0, 0.0, 10.0, 10.0);
        assert_eq!(a.iou(&a), 1.0);
        let b = pbox(20.0, 20.0, 30.0, 30.0);
        assert_eq!(a.iou(&b), 0.0);
        let c = pbox(5.0, 5.0, 15.0, 15.0);
        let expected = 25.0 / 175.0;
        assert!((a.iou(&c) - expected).abs() < 1e-12);
        assert_eq!(a.iou(&c), c.iou(&a));
    }

    #[test]
    fn intersection_area_examples() {
        let a = pbox(0.0, 0.0, 10.0, 10.0);
        assert_eq!(a.intersection_area(&a), 100.0);
        // Touching edges share no interior.
        let b = pbox(10.0, 0.0, 20.0, 10.0);
        assert_eq!(a.intersection_area(&b), 0.0);
        let c = pbox(5.0, 5.0, 15.0, 15.0);
        assert_eq!(a.intersection_area(&c), 25.0);
    }

    #[test]
    fn line_anchor_examples() {
        let p = line_anchor_point(&pbox(0.0, 0.0, 1000.0, 20.0), size(1000, 1000)).unwrap();
        assert_eq!((p.x, p.y), (2, 10));
        let p = line_anchor_point(&pbox(100.0, 100.0, 900.0, 140.0), size(1000, 1000)).unwrap();
        assert_eq!((p.x, p.y), (102, 120));
    }

    #[test]
    fn line_anchor_stays_inside_thin_lines() {
        // Narrower than the 2 px inset: the anchor clamps into the box.
        let line = pbox(999.0, 0.0, 1000.0, 4.0);
        let p = line_anchor_point(&line, size(1000, 1000)).unwrap();
        assert!(line.normalize(size(1000, 1000)).unwrap().contains_point(p));
    }

    #[test]
    fn clamp_into_foreground_range() {
        let n = NormBox::new(0, 0, 1000, 1000).unwrap().clamp_into(2, 998);
        assert_eq!(n.corners(), [2, 2, 998, 998]);
        let n = NormBox::new(100, 100, 900, 200).unwrap().clamp_into(2, 998);
        assert_eq!(n.corners(), [100, 100, 900, 200]);
    }

    #[test]
    fn norm_roundtrip_is_idempotent() {
        let s = size(3, 7);
        for b in [
            NormBox::new(0, 0, 1000, 1000).unwrap(),
            NormBox::new(2, 2, 998, 998).unwrap(),
            NormBox::new(499, 1, 500, 999).unwrap(),
        ] {
            let again = b.denormalize(s).normalize(s).unwrap();
            assert_eq!(again, b);
        }
    }

    #[test]
    fn pixel_box_rejects_invalid() {
        assert!(PixelBox::new(5.0, 0.0, 5.0, 10.0).is_err());
        assert!(PixelBox::new(-1.0, 0.0, 5.0, 10.0).is_err());
        assert!(PixelBox::new(0.0, 10.0, 5.0, 2.0).is_err());
        assert!(PixelBox::new(0.0, f64::NAN, 5.0, 10.0).is_err());
    }

    #[test]
    fn pixel_box_serde_integral_as_int() {
        let b = pbox(2.0, 2.0, 998.5, 998.0);
        let v = serde_json::to_value(b).unwrap();
        assert_eq!(v.to_string(), "[2,2,998.5,998]");
        let back: PixelBox = serde_json::from_value(v).unwrap();
        assert_eq!(back, b);
    }
}
