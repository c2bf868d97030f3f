//! Independent reference implementations shared by the property suites and
//! the acceptance runner.

#![allow(dead_code)]

use rand::Rng;
use viscom::aesthetics::{LayoutObject, ObjectClass, ObjectSet};
use viscom::geom::Rect;

/// Accuracy and macro-F1 by counting label pairs directly.
pub fn brute_metrics(y_true: &[usize], y_pred: &[usize], k: usize) -> (f64, f64) {
    let n = y_true.len();
    let correct = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    let mut f1_sum = 0.0;
    for c in 0..k {
        let mut tp = 0;
        let mut fp = 0;
        let mut fn_ = 0;
        for i in 0..n {
            match (y_true[i] == c, y_pred[i] == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                _ => {}
            }
        }
        let den = 2 * tp + fp + fn_;
        if den > 0 {
            f1_sum += 2.0 * tp as f64 / den as f64;
        }
    }
    (correct as f64 / n as f64, f1_sum / k as f64)
}

/// Γ(ν/2) for integer ν ≥ 1 by the half-integer recurrence.
fn gamma_half(nu: usize) -> f64 {
    let (mut g, mut x) = if nu % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while 2.0 * x < nu as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

fn t_density(x: f64, df: usize) -> f64 {
    let nu = df as f64;
    let c = gamma_half(df + 1) / ((nu * std::f64::consts::PI).sqrt() * gamma_half(df));
    c * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0)
}

/// `P(T > t)` by composite Simpson integration of the density over `[0, |t|]`.
pub fn t_sf_integral(t: f64, df: usize) -> f64 {
    let n = 20_000;
    let b = t.abs();
    let h = b / n as f64;
    let mut s = t_density(0.0, df) + t_density(b, df);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * t_density(i as f64 * h, df);
    }
    let mass = s * h / 3.0;
    if t >= 0.0 {
        0.5 - mass
    } else {
        0.5 + mass
    }
}

/// Class index per value: z-score against the population moments, then
/// strict thresholds at ±0.5 (boundaries are moderate).
pub fn kg_classes(kgs: &[f64]) -> Vec<usize> {
    let n = kgs.len() as f64;
    let mu = kgs.iter().sum::<f64>() / n;
    let sd = (kgs.iter().map(|k| (k - mu).powi(2)).sum::<f64>() / n).sqrt();
    kgs.iter()
        .map(|k| {
            let z = (k - mu) / sd;
            if z < -0.5 {
                0
            } else if z > 0.5 {
                2
            } else {
                1
            }
        })
        .collect()
}

pub fn z_scores(kgs: &[f64]) -> Vec<f64> {
    let n = kgs.len() as f64;
    let mu = kgs.iter().sum::<f64>() / n;
    let sd = (kgs.iter().map(|k| (k - mu).powi(2)).sum::<f64>() / n).sqrt();
    kgs.iter().map(|k| (k - mu) / sd).collect()
}

const CLASSES: [ObjectClass; 4] = [ObjectClass::Text, ObjectClass::Image, ObjectClass::Form, ObjectClass::Other];

/// 1 to 40 boxes inside a page, with sub-pixel coordinates.
pub fn random_objects<R: Rng>(rng: &mut R) -> ObjectSet {
    let w = rng.random_range(200.0..2000.0);
    let h = rng.random_range(200.0..6000.0);
    let n = rng.random_range(1..=40);
    let objects = (0..n)
        .map(|_| {
            let bw = rng.random_range(1.0..w / 2.0);
            let bh = rng.random_range(1.0..h / 2.0);
            let x = rng.random_range(0.0..w - bw);
            let y = rng.random_range(0.0..h - bh);
            LayoutObject {
                bbox: Rect::new(x, y, bw, bh),
                class: CLASSES[rng.random_range(0..4)],
            }
        })
        .collect();
    ObjectSet { objects, page_width: w, page_height: h }
}

pub fn scaled(o: &ObjectSet, s: f64) -> ObjectSet {
    ObjectSet {
        objects: o
            .objects
            .iter()
            .map(|b| LayoutObject {
                bbox: Rect::new(b.bbox.x * s, b.bbox.y * s, b.bbox.w * s, b.bbox.h * s),
                class: b.class,
            })
            .collect(),
        page_width: o.page_width * s,
        page_height: o.page_height * s,
    }
}

/// Boxes drawn in the upper-left quadrant on an integer grid, then reflected
/// across both page axes, so every measure sees an exactly mirrored page.
pub fn mirrored_objects<R: Rng>(rng: &mut R) -> ObjectSet {
    let w = 2 * rng.random_range(100..1000);
    let h = 2 * rng.random_range(100..3000);
    let (hw, hh) = (w / 2, h / 2);
    let mut objects = Vec::new();
    for _ in 0..rng.random_range(1..=10) {
        let bw = rng.random_range(1..=hw);
        let bh = rng.random_range(1..=hh);
        let x = rng.random_range(0..=hw - bw);
        let y = rng.random_range(0..=hh - bh);
        let class = CLASSES[rng.random_range(0..4)];
        for (fx, fy) in [(false, false), (true, false), (false, true), (true, true)] {
            let rx = if fx { w - x - bw } else { x };
            let ry = if fy { h - y - bh } else { y };
            objects.push(LayoutObject {
                bbox: Rect::new(rx as f64, ry as f64, bw as f64, bh as f64),
                class,
            });
        }
    }
    ObjectSet { objects, page_width: w as f64, page_height: h as f64 }
}

/// A page whose boxes cover exactly half of it without overlap.
pub fn half_covered<R: Rng>(rng: &mut R) -> ObjectSet {
    let w = rng.random_range(10..200) as f64 * 8.0;
    let h = rng.random_range(10..200) as f64 * 8.0;
    let strips = 1usize << rng.random_range(0..4);
    let sw = w / 2.0 / strips as f64;
    let objects = (0..strips)
        .map(|i| LayoutObject {
            bbox: Rect::new(2.0 * i as f64 * sw, 0.0, sw, h),
            class: ObjectClass::Text,
        })
        .collect();
    ObjectSet { objects, page_width: w, page_height: h }
}

/// Mean accumulated in reverse order.
pub fn mean_rev(v: &[f64]) -> f64 {
    v.iter().rev().fold(0.0, |a, b| a + b) / v.len() as f64
}
