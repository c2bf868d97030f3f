//! Axis-aligned boxes in CSS pixels and area-of-union arithmetic.

use serde::{Deserialize, Serialize};

/// An axis-aligned box `(x, y, w, h)` with the origin at the top-left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Intersection with `other`; zero-sized when they do not overlap.
    pub fn intersect(&self, other: &Rect) -> Rect {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        Rect::new(x0, y0, (x1 - x0).max(0.0), (y1 - y0).max(0.0))
    }

    /// True when `other` lies inside `self`, allowing `tol` pixels of slack on each edge.
    pub fn contains(&self, other: &Rect, tol: f64) -> bool {
        other.x >= self.x - tol
            && other.y >= self.y - tol
            && other.right() <= self.right() + tol
            && other.bottom() <= self.bottom() + tol
    }

    /// Largest whitespace separation along either axis (0 when the boxes touch or overlap).
    pub fn gap_to(&self, other: &Rect) -> f64 {
        let dx = (other.x - self.right()).max(self.x - other.right()).max(0.0);
        let dy = (other.y - self.bottom()).max(self.y - other.bottom()).max(0.0);
        dx.max(dy)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    pub fn scale(&self, k: f64) -> Rect {
        Rect::new(self.x * k, self.y * k, self.w * k, self.h * k)
    }

    /// Smallest box covering every input box, or `None` for an empty slice.
    pub fn bounding(rects: &[Rect]) -> Option<Rect> {
        let first = rects.first()?;
        let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.right(), first.bottom());
        for r in &rects[1..] {
            x0 = x0.min(r.x);
            y0 = y0.min(r.y);
            x1 = x1.max(r.right());
            y1 = y1.max(r.bottom());
        }
        Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
    }
}

/// Area of the geometric union of `rects`. Overlaps are counted once.
///
/// Slab sweep over the distinct x edges; within each slab the covering
/// y-intervals are merged. O(n² log n), which is fine for per-page block counts.
pub fn union_area(rects: &[Rect]) -> f64 {
    let boxes: Vec<&Rect> = rects.iter().filter(|r| r.w > 0.0 && r.h > 0.0).collect();
    if boxes.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = boxes.iter().flat_map(|r| [r.x, r.right()]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut total = 0.0;
    let mut spans: Vec<(f64, f64)> = Vec::with_capacity(boxes.len());
    for slab in xs.windows(2) {
        let (x0, x1) = (slab[0], slab[1]);
        spans.clear();
        spans.extend(
            boxes
                .iter()
                .filter(|r| r.x <= x0 && r.right() >= x1)
                .map(|r| (r.y, r.bottom())),
        );
        if spans.is_empty() {
            continue;
        }
        spans.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut covered = 0.0;
        let (mut lo, mut hi) = spans[0];
        for &(a, b) in &spans[1..] {
            if a > hi {
                covered += hi - lo;
                lo = a;
                hi = b;
            } else if b > hi {
                hi = b;
            }
        }
        covered += hi - lo;
        total += covered * (x1 - x0);
    }
    total
}

/// Area of `union(a) ∩ union(b)`, by inclusion-exclusion on union areas.
pub fn union_intersection_area(a: &[Rect], b: &[Rect]) -> f64 {
    let both: Vec<Rect> = a.iter().chain(b.iter()).copied().collect();
    (union_area(a) + union_area(b) - union_area(&both)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Rasterizes integer boxes on a unit grid; independent of the sweep.
    fn raster_union(rects: &[Rect]) -> f64 {
        let mut cells = std::collections::HashSet::new();
        for r in rects {
            for x in r.x as i64..r.right() as i64 {
                for y in r.y as i64..r.bottom() as i64 {
                    cells.insert((x, y));
                }
            }
        }
        cells.len() as f64
    }

    #[test]
    fn disjoint_and_overlapping() {
        let a = Rect::new(0.0, 0.0, 10.0, 10.0);
        let b = Rect::new(20.0, 0.0, 10.0, 10.0);
        assert_eq!(union_area(&[a, b]), 200.0);
        let c = Rect::new(5.0, 5.0, 10.0, 10.0);
        assert_eq!(union_area(&[a, c]), 175.0);
        assert_eq!(union_area(&[a, a, a]), 100.0);
        assert_eq!(union_area(&[]), 0.0);
    }

    #[test]
    fn gap_is_axis_separation() {
        let a = Rect::new(0.0, 0.0, 100.0, 50.0);
        assert_eq!(a.gap_to(&Rect::new(140.0, 0.0, 10.0, 10.0)), 40.0);
        assert_eq!(a.gap_to(&Rect::new(0.0, 55.0, 10.0, 10.0)), 5.0);
        assert_eq!(a.gap_to(&Rect::new(10.0, 10.0, 10.0, 10.0)), 0.0);
    }

    proptest! {
        #[test]
        fn sweep_matches_raster(boxes in prop::collection::vec((0u8..30, 0u8..30, 0u8..12, 0u8..12), 0..8)) {
            let rects: Vec<Rect> = boxes
                .iter()
                .map(|&(x, y, w, h)| Rect::new(x as f64, y as f64, w as f64, h as f64))
                .collect();
            prop_assert_eq!(union_area(&rects), raster_union(&rects));
        }
    }
}
