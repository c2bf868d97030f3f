//! Gestalt-style layout aesthetics over VIPS leaf objects.
//!
//! Thirteen measures, each in [0, 1], plus order-and-complexity (their mean),
//! computed for five object classes: all leaves, and text / image / form /
//! other leaves separately. Every measure is invariant under uniform scaling
//! of the page and its objects; alignment quantization is therefore expressed
//! as a fraction of the page width ([`ALIGN_QUANTUM`] px at 1280 px).
//!
//! Formulas, with `n` objects of area `a_i` and center `(cx_i, cy_i)` on a
//! `W × H` page:
//!
//! * balance: `w_side = Σ a_i·d_i` per side of each mirror axis; `1 − (|BM_lr| + |BM_tb|)/2`
//!   with `BM = (w_1 − w_2)/max(w_1, w_2)`.
//! * equilibrium: `1 − (e_x + e_y)/2`, `e_x = |Σ a_i (cx_i − W/2)| / (Σ a_i · W/2)`.
//! * symmetry: mean over vertical, horizontal and diagonal reflections of
//!   `|U ∩ reflect(U)| / |U|` where `U` is the union of boxes.
//! * sequence: quadrant area weights ranked against reading order UL, UR, LL, LR;
//!   `1 − Σ|rank − reading_rank| / 8`.
//! * cohesion: mean of `min(ar_i, ar_page)/max(ar_i, ar_page)`, `ar = h/w`.
//! * unity: mean of `1 − (k − 1)/n` (k distinct 10 % area buckets) and
//!   `Σ a_i / area(bounding box)`.
//! * proportion: closeness of each normalized aspect ratio to {1, 1/√2, 1/φ, 1/√3, 1/2}.
//! * simplicity: `3 / (n_vap + n_hap + n)` over distinct left / top alignment lines.
//! * density: `1 − |2a − 1|` with `a` the union coverage of the page.
//! * regularity: mean of `1 − (n_vap + n_hap)/2n` and `1 − (d − 1)/(n − 1)`,
//!   `d` the distinct spacings between consecutive alignment lines.
//! * economy: `1/k` with k as in unity.
//! * homogeneity: entropy of per-quadrant object counts over `ln 4`.
//! * rhythm: `1 − min(1, (cv_area + cv_dist)/2)` over per-quadrant total area and
//!   mean center distance from the page center.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::geom::{union_area, union_intersection_area, Rect};
use crate::snapshot::RenderGeometry;
use crate::vips::{BlockKind, VipsTree};

pub const PREFIX: &str = "viscom.aesthetics.";

/// Alignment quantum in CSS px at the reference page width.
pub const ALIGN_QUANTUM: f64 = 4.0;
pub const REFERENCE_WIDTH: f64 = 1280.0;

const EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum AestheticsError {
    #[error("unknown measure id {0}; expected 1..=13")]
    UnknownMeasure(u8),
    #[error("expected 13 measure values, got {0}")]
    WrongArity(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Text,
    Image,
    Form,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutObject {
    pub bbox: Rect,
    pub class: ObjectClass,
}

impl LayoutObject {
    pub fn area(&self) -> f64 {
        self.bbox.area()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSet {
    pub objects: Vec<LayoutObject>,
    pub page_width: f64,
    pub page_height: f64,
}

impl ObjectSet {
    pub fn of_class(&self, class: ObjectClass) -> ObjectSet {
        ObjectSet {
            objects: self
                .objects
                .iter()
                .filter(|o| o.class == class)
                .copied()
                .collect(),
            ..*self
        }
    }

    fn boxes(&self) -> Vec<Rect> {
        self.objects.iter().map(|o| o.bbox).collect()
    }

    fn page_area(&self) -> f64 {
        self.page_width * self.page_height
    }

    /// Quadrant index 0..4 (UL, UR, LL, LR) of a point.
    /// Points within a scale-relative tolerance of an axis count as on it.
    fn quadrant(&self, (x, y): (f64, f64)) -> usize {
        let right = x >= self.page_width / 2.0 * (1.0 - EPS);
        let bottom = y >= self.page_height / 2.0 * (1.0 - EPS);
        (bottom as usize) * 2 + right as usize
    }
}

/// The thirteen measures, in registry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Balance = 1,
    Equilibrium,
    Symmetry,
    Sequence,
    Cohesion,
    Unity,
    Proportion,
    Simplicity,
    Density,
    Regularity,
    Economy,
    Homogeneity,
    Rhythm,
}

impl Measure {
    pub const ALL: [Measure; 13] = [
        Measure::Balance,
        Measure::Equilibrium,
        Measure::Symmetry,
        Measure::Sequence,
        Measure::Cohesion,
        Measure::Unity,
        Measure::Proportion,
        Measure::Simplicity,
        Measure::Density,
        Measure::Regularity,
        Measure::Economy,
        Measure::Homogeneity,
        Measure::Rhythm,
    ];

    pub fn from_id(id: u8) -> Result<Self, AestheticsError> {
        match id {
            1..=13 => Ok(Self::ALL[id as usize - 1]),
            _ => Err(AestheticsError::UnknownMeasure(id)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Balance => "balance",
            Measure::Equilibrium => "equilibrium",
            Measure::Symmetry => "symmetry",
            Measure::Sequence => "sequence",
            Measure::Cohesion => "cohesion",
            Measure::Unity => "unity",
            Measure::Proportion => "proportion",
            Measure::Simplicity => "simplicity",
            Measure::Density => "density",
            Measure::Regularity => "regularity",
            Measure::Economy => "economy",
            Measure::Homogeneity => "homogeneity",
            Measure::Rhythm => "rhythm",
        }
    }
}

fn quantize(v: f64, q: f64) -> i64 {
    (v / q + EPS).floor() as i64
}

fn align_quantum(o: &ObjectSet) -> f64 {
    ALIGN_QUANTUM * o.page_width / REFERENCE_WIDTH
}

/// Distinct left-edge and top-edge alignment lines.
fn alignment_lines(o: &ObjectSet) -> (BTreeSet<i64>, BTreeSet<i64>) {
    let q = align_quantum(o);
    let xs = o.objects.iter().map(|b| quantize(b.bbox.x, q)).collect();
    let ys = o.objects.iter().map(|b| quantize(b.bbox.y, q)).collect();
    (xs, ys)
}

/// Number of distinct 10 %-of-largest area buckets.
fn size_classes(o: &ObjectSet) -> usize {
    let amax = o.objects.iter().map(LayoutObject::area).fold(0.0, f64::max);
    if amax <= 0.0 {
        return 1;
    }
    o.objects
        .iter()
        .map(|b| quantize(10.0 * b.area() / amax, 1.0).min(9))
        .collect::<BTreeSet<_>>()
        .len()
}

fn balance(o: &ObjectSet) -> f64 {
    let (cx_axis, cy_axis) = (o.page_width / 2.0, o.page_height / 2.0);
    let (mut l, mut r, mut t, mut b) = (0.0, 0.0, 0.0, 0.0);
    let snap = |d: f64, axis: f64| if d.abs() <= EPS * axis { 0.0 } else { d };
    for obj in &o.objects {
        let (cx, cy) = obj.bbox.center();
        let a = obj.area();
        let (dx, dy) = (snap(cx - cx_axis, cx_axis), snap(cy - cy_axis, cy_axis));
        if dx < 0.0 {
            l -= a * dx;
        } else {
            r += a * dx;
        }
        if dy < 0.0 {
            t -= a * dy;
        } else {
            b += a * dy;
        }
    }
    let imbalance = |p: f64, q: f64| {
        let m = p.max(q);
        if m == 0.0 {
            0.0
        } else {
            (p - q) / m
        }
    };
    1.0 - (imbalance(l, r).abs() + imbalance(t, b).abs()) / 2.0
}

fn equilibrium(o: &ObjectSet) -> f64 {
    let total: f64 = o.objects.iter().map(LayoutObject::area).sum();
    if total == 0.0 {
        return 0.0;
    }
    let (mx, my) = o.objects.iter().fold((0.0, 0.0), |(sx, sy), obj| {
        let (cx, cy) = obj.bbox.center();
        let a = obj.area();
        (sx + a * (cx - o.page_width / 2.0), sy + a * (cy - o.page_height / 2.0))
    });
    let ex = mx.abs() / (total * o.page_width / 2.0);
    let ey = my.abs() / (total * o.page_height / 2.0);
    1.0 - (ex + ey) / 2.0
}

fn symmetry(o: &ObjectSet) -> f64 {
    let boxes = o.boxes();
    let whole = union_area(&boxes);
    if whole <= 0.0 {
        return 0.0;
    }
    let (w, h) = (o.page_width, o.page_height);
    let reflect = |fx: bool, fy: bool| -> Vec<Rect> {
        boxes
            .iter()
            .map(|b| {
                Rect::new(
                    if fx { w - b.x - b.w } else { b.x },
                    if fy { h - b.y - b.h } else { b.y },
                    b.w,
                    b.h,
                )
            })
            .collect()
    };
    let s = |fx, fy| (union_intersection_area(&boxes, &reflect(fx, fy)) / whole).min(1.0);
    (s(true, false) + s(false, true) + s(true, true)) / 3.0
}

fn quadrant_weights(o: &ObjectSet) -> [f64; 4] {
    let mut w = [0.0; 4];
    for obj in &o.objects {
        w[o.quadrant(obj.bbox.center())] += obj.area();
    }
    w
}

fn sequence(o: &ObjectSet) -> f64 {
    let w = quadrant_weights(o);
    let mut order = [0usize, 1, 2, 3];
    // Heaviest first; ties keep reading order.
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let mut displacement = 0usize;
    for (rank, &q) in order.iter().enumerate() {
        displacement += rank.abs_diff(q);
    }
    1.0 - displacement as f64 / 8.0
}

fn cohesion(o: &ObjectSet) -> f64 {
    let page_ar = o.page_height / o.page_width;
    let sum: f64 = o
        .objects
        .iter()
        .map(|obj| {
            let (w, h) = (obj.bbox.w, obj.bbox.h);
            if w <= 0.0 || h <= 0.0 {
                return 0.0;
            }
            let ar = h / w;
            ar.min(page_ar) / ar.max(page_ar)
        })
        .sum();
    sum / o.objects.len() as f64
}

fn unity(o: &ObjectSet) -> f64 {
    let n = o.objects.len() as f64;
    let u_form = 1.0 - (size_classes(o) as f64 - 1.0) / n;
    let boxes = o.boxes();
    let bounds = Rect::bounding(&boxes).map_or(0.0, |b| b.area());
    let u_space = if bounds > 0.0 {
        (o.objects.iter().map(LayoutObject::area).sum::<f64>() / bounds).min(1.0)
    } else {
        0.0
    };
    (u_form + u_space) / 2.0
}

const PREFERRED_RATIOS: [f64; 5] = [
    1.0,
    1.0 / std::f64::consts::SQRT_2,
    1.0 / 1.618_033_988_749_895,
    1.0 / 1.732_050_807_568_877_2,
    0.5,
];

fn proportion(o: &ObjectSet) -> f64 {
    let sum: f64 = o
        .objects
        .iter()
        .map(|obj| {
            let (w, h) = (obj.bbox.w, obj.bbox.h);
            if w <= 0.0 || h <= 0.0 {
                return 0.0;
            }
            let ar = h / w;
            let norm = if ar <= 1.0 { ar } else { 1.0 / ar };
            let dist = PREFERRED_RATIOS
                .iter()
                .map(|p| (norm - p).abs())
                .fold(f64::INFINITY, f64::min);
            (1.0 - dist / 0.5).clamp(0.0, 1.0)
        })
        .sum();
    sum / o.objects.len() as f64
}

fn simplicity(o: &ObjectSet) -> f64 {
    let (xs, ys) = alignment_lines(o);
    (3.0 / (xs.len() + ys.len() + o.objects.len()) as f64).clamp(0.0, 1.0)
}

fn density(o: &ObjectSet) -> f64 {
    let coverage = (union_area(&o.boxes()) / o.page_area()).clamp(0.0, 1.0);
    1.0 - (2.0 * coverage - 1.0).abs()
}

fn regularity(o: &ObjectSet) -> f64 {
    let n = o.objects.len();
    if n == 1 {
        return 1.0;
    }
    let (xs, ys) = alignment_lines(o);
    let r_align = 1.0 - (xs.len() + ys.len()) as f64 / (2 * n) as f64;
    let gaps = |lines: &BTreeSet<i64>| -> Vec<i64> {
        let v: Vec<i64> = lines.iter().copied().collect();
        v.windows(2).map(|w| w[1] - w[0]).collect()
    };
    let distinct: BTreeSet<i64> = gaps(&xs).into_iter().chain(gaps(&ys)).collect();
    let r_space = if distinct.is_empty() {
        1.0
    } else {
        (1.0 - (distinct.len() as f64 - 1.0) / (n as f64 - 1.0)).clamp(0.0, 1.0)
    };
    ((r_align + r_space) / 2.0).clamp(0.0, 1.0)
}

fn economy(o: &ObjectSet) -> f64 {
    1.0 / size_classes(o) as f64
}

fn homogeneity(o: &ObjectSet) -> f64 {
    let mut counts = [0usize; 4];
    for obj in &o.objects {
        counts[o.quadrant(obj.bbox.center())] += 1;
    }
    let n = o.objects.len() as f64;
    let entropy: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    (entropy / 4f64.ln()).clamp(0.0, 1.0)
}

fn coefficient_of_variation(v: &[f64; 4]) -> f64 {
    let mean = v.iter().sum::<f64>() / 4.0;
    if mean <= 0.0 {
        return 0.0;
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
    var.sqrt() / mean
}

fn rhythm(o: &ObjectSet) -> f64 {
    if o.objects.len() == 1 {
        return 1.0;
    }
    let areas = quadrant_weights(o);
    let (pcx, pcy) = (o.page_width / 2.0, o.page_height / 2.0);
    let mut dist_sum = [0.0; 4];
    let mut counts = [0usize; 4];
    for obj in &o.objects {
        let (cx, cy) = obj.bbox.center();
        let q = o.quadrant((cx, cy));
        dist_sum[q] += (cx - pcx).hypot(cy - pcy);
        counts[q] += 1;
    }
    let mut dists = [0.0; 4];
    for q in 0..4 {
        if counts[q] > 0 {
            dists[q] = dist_sum[q] / counts[q] as f64;
        }
    }
    let cv = (coefficient_of_variation(&areas) + coefficient_of_variation(&dists)) / 2.0;
    1.0 - cv.min(1.0)
}

pub fn measure(m: Measure, o: &ObjectSet) -> f64 {
    if o.objects.is_empty() {
        return 0.0;
    }
    let v = match m {
        Measure::Balance => balance(o),
        Measure::Equilibrium => equilibrium(o),
        Measure::Symmetry => symmetry(o),
        Measure::Sequence => sequence(o),
        Measure::Cohesion => cohesion(o),
        Measure::Unity => unity(o),
        Measure::Proportion => proportion(o),
        Measure::Simplicity => simplicity(o),
        Measure::Density => density(o),
        Measure::Regularity => regularity(o),
        Measure::Economy => economy(o),
        Measure::Homogeneity => homogeneity(o),
        Measure::Rhythm => rhythm(o),
    };
    v.clamp(0.0, 1.0)
}

/// Measure by numeric id, 1 (balance) through 13 (rhythm).
pub fn aesthetic_measure(id: u8, o: &ObjectSet) -> Result<f64, AestheticsError> {
    Ok(measure(Measure::from_id(id)?, o))
}

pub fn order_and_complexity(values: &[f64]) -> Result<f64, AestheticsError> {
    if values.len() != 13 {
        return Err(AestheticsError::WrongArity(values.len()));
    }
    Ok(values.iter().sum::<f64>() / 13.0)
}

/// One object per VIPS leaf with positive area, clipped to the page.
pub fn derive_objects(t: &VipsTree, g: &RenderGeometry) -> ObjectSet {
    let page = g.page_box();
    let objects = t
        .leaves()
        .into_iter()
        .filter_map(|leaf| {
            let bbox = leaf.bbox.intersect(&page);
            let class = match leaf.kind {
                BlockKind::Text => ObjectClass::Text,
                BlockKind::Image => ObjectClass::Image,
                BlockKind::Form => ObjectClass::Form,
                BlockKind::Other | BlockKind::Composite => ObjectClass::Other,
            };
            (bbox.area() > 0.0).then_some(LayoutObject { bbox, class })
        })
        .collect();
    ObjectSet {
        objects,
        page_width: g.page_width as f64,
        page_height: g.page_height as f64,
    }
}

pub const CLASS_NAMES: [&str; 5] = ["all", "text", "image", "form", "other"];

pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(70);
    for class in CLASS_NAMES {
        for m in Measure::ALL {
            names.push(format!("{PREFIX}{class}.{}", m.name()));
        }
        names.push(format!("{PREFIX}{class}.order_and_complexity"));
    }
    names
}

/// Thirteen measures followed by order-and-complexity.
pub fn class_vector(o: &ObjectSet) -> [f64; 14] {
    let mut v = [0.0; 14];
    for (i, m) in Measure::ALL.into_iter().enumerate() {
        v[i] = measure(m, o);
    }
    v[13] = order_and_complexity(&v[..13]).expect("13 values");
    v
}

pub fn aesthetics_features(t: &VipsTree, g: &RenderGeometry) -> FeatureVector {
    let all = derive_objects(t, g);
    let mut values = Vec::with_capacity(70);
    values.extend(class_vector(&all));
    for class in [
        ObjectClass::Text,
        ObjectClass::Image,
        ObjectClass::Form,
        ObjectClass::Other,
    ] {
        values.extend(class_vector(&all.of_class(class)));
    }
    FeatureVector::page(feature_names(), values)
}
