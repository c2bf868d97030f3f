//! Text tables and the PFI bar chart.

use std::fmt::Write;

use image::{Rgb, RgbImage};
use viscom::ml::experiment::{ExperimentReport, Mode};
use viscom::ml::PfiResult;

fn pct(mean: f64, std: f64) -> String {
    format!("{:5.1} ± {:4.1}", 100.0 * mean, 100.0 * std)
}

fn group(m: Mode) -> &'static str {
    match m {
        Mode::Full => "full",
        Mode::Subsets => "subsets",
        Mode::Combination => "combination",
    }
}

/// Rows grouped as baselines, then the configured design; percentages.
pub fn report_text(r: &ExperimentReport, pfi: Option<&[PfiResult]>) -> String {
    let mut s = String::new();
    let [low, moderate, high] = r.class_counts;
    let _ = writeln!(
        s,
        "seed {}  sessions {} (low {low}, moderate {moderate}, high {high})",
        r.seed, r.n_sessions
    );
    let _ = writeln!(
        s,
        "alpha {} / {} settings = alpha_bon {}  baseline {} ({:.1}%)",
        r.config.alpha,
        r.n_settings,
        r.alpha_bon,
        r.best_baseline.name(),
        100.0 * r.baseline_accuracy
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<12} {:<28} {:<16} {:>4}  {:<13}  {:<13}  {:>8}  {}",
        "group", "setting", "selection", "n", "macro-F1 %", "accuracy %", "p", "sig"
    );
    for b in &r.baselines {
        let _ = writeln!(
            s,
            "{:<12} {:<28} {:<16} {:>4}  {}  {}",
            "baseline",
            b.baseline.name(),
            "",
            "",
            pct(b.macro_f1_mean, b.macro_f1_std),
            pct(b.accuracy_mean, b.accuracy_std)
        );
    }
    for st in &r.settings {
        let _ = writeln!(
            s,
            "{:<12} {:<28} {:<16} {:>4}  {}  {}  {:>8.2e}  {}",
            group(r.config.mode),
            st.name,
            st.selection,
            st.n_features,
            pct(st.macro_f1_mean, st.macro_f1_std),
            pct(st.accuracy_mean, st.accuracy_std),
            st.p_value,
            if st.significant { "*" } else { "" }
        );
    }

    let _ = writeln!(s);
    let _ = writeln!(s, "per classifier (accuracy %, folds mean ± std)");
    for st in &r.settings {
        let _ = write!(s, "  {:<26}", format!("{} [{}]", st.name, st.selection));
        for c in &st.classifiers {
            let _ = write!(s, "  {} {}", c.classifier.name(), pct(c.accuracy_mean, c.accuracy_std).trim());
        }
        let _ = writeln!(s);
    }

    if let Some(rows) = pfi {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<40} {:>10} {:>10} {:>9}", "feature", "mean_delta", "std_delta", "selected");
        for p in sorted_pfi(rows) {
            let _ = writeln!(
                s,
                "{:<40} {:>10.4} {:>10.4} {:>9}",
                p.feature_name, p.mean_delta, p.std_delta, p.selection_count
            );
        }
    }
    s
}

/// Largest mean delta first; ties keep file order.
fn sorted_pfi(rows: &[PfiResult]) -> Vec<&PfiResult> {
    let mut v: Vec<&PfiResult> = rows.iter().collect();
    v.sort_by(|a, b| b.mean_delta.total_cmp(&a.mean_delta));
    v
}

const BAR_H: u32 = 12;
const GAP: u32 = 4;
const WIDTH: u32 = 480;
const MAX_BARS: usize = 20;

/// Horizontal bars in the same order as the text table: positive deltas
/// extend right of the centre line, negative ones left.
pub fn pfi_plot(rows: &[PfiResult]) -> RgbImage {
    let bars: Vec<&PfiResult> = sorted_pfi(rows).into_iter().take(MAX_BARS).collect();
    let h = (bars.len() as u32).max(1) * (BAR_H + GAP) + GAP;
    let mut img = RgbImage::from_pixel(WIDTH, h, Rgb([255, 255, 255]));
    let scale = bars.iter().map(|p| p.mean_delta.abs()).fold(0.0, f64::max);
    let mid = WIDTH / 2;
    for (i, p) in bars.iter().enumerate() {
        let len = if scale > 0.0 {
            ((p.mean_delta.abs() / scale) * f64::from(mid - GAP)).round() as u32
        } else {
            0
        };
        let (x0, x1, colour) = if p.mean_delta >= 0.0 {
            (mid, mid + len, Rgb([52, 101, 164]))
        } else {
            (mid - len, mid, Rgb([204, 0, 0]))
        };
        let y0 = GAP + i as u32 * (BAR_H + GAP);
        for y in y0..y0 + BAR_H {
            for x in x0..x1 {
                img.put_pixel(x, y, colour);
            }
        }
    }
    for y in 0..h {
        img.put_pixel(mid, y, Rgb([0, 0, 0]));
    }
    img
}
