//! Screenshot-derived visual features.
//!
//! Color statistics are accumulated over a color histogram visited in sorted
//! order, so they depend only on the pixel multiset, never on pixel positions.
//!
//! Encoder settings are part of the output contract:
//! PNG uses `image`'s encoder with `CompressionType::Default` and
//! `FilterType::Adaptive`; JPEG uses quality 85 with 4:2:0 chroma subsampling.
//! Pages taller than the JPEG limit are encoded in strips of
//! [`JPEG_STRIP_ROWS`] rows and the strip sizes summed.

use std::collections::HashMap;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use thiserror::Error;

use crate::features::FeatureVector;

pub const JPEG_QUALITY: u8 = 85;
pub const JPEG_STRIP_ROWS: u32 = 65520;

pub const VISUAL_FEATURES: [&str; 8] = [
    "viscom.visual.avg_brightness",
    "viscom.visual.avg_hue",
    "viscom.visual.avg_colorfulness",
    "viscom.visual.png_size",
    "viscom.visual.jpg_size",
    "viscom.visual.page_width",
    "viscom.visual.page_height",
    "viscom.visual.aspect_ratio",
];

#[derive(Debug, Error, PartialEq)]
pub enum ScreenshotError {
    #[error("screenshot dimensions must be positive, got {0}x{1}")]
    EmptyImage(u32, u32),
    #[error("pixel buffer has {got} bytes, expected {expected}")]
    BufferLength { got: usize, expected: usize },
}

/// RGB raster, row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Screenshot {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Screenshot {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ScreenshotError> {
        if width == 0 || height == 0 {
            return Err(ScreenshotError::EmptyImage(width, height));
        }
        let expected = 3 * width as usize * height as usize;
        if pixels.len() != expected {
            return Err(ScreenshotError::BufferLength {
                got: pixels.len(),
                expected,
            });
        }
        Ok(Screenshot {
            width,
            height,
            pixels,
        })
    }

    /// Solid-color image.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(3 * width as usize * height as usize)
            .collect();
        Self::new(width, height, pixels).expect("positive dimensions")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn to_png(&self) -> Result<Vec<u8>, image::ImageError> {
        let mut buf = Vec::new();
        PngEncoder::new_with_quality(&mut buf, CompressionType::Default, FilterType::Adaptive)
            .write_image(&self.pixels, self.width, self.height, ExtendedColorType::Rgb8)?;
        Ok(buf)
    }

    /// Encoded JPEG byte length under the pinned settings.
    pub fn jpeg_len(&self) -> Result<usize, jpeg_encoder::EncodingError> {
        let row_bytes = 3 * self.width as usize;
        let mut total = 0;
        let mut y = 0;
        while y < self.height {
            let rows = (self.height - y).min(JPEG_STRIP_ROWS);
            let strip = &self.pixels[y as usize * row_bytes..(y + rows) as usize * row_bytes];
            let mut buf = Vec::new();
            let mut enc = jpeg_encoder::Encoder::new(&mut buf, JPEG_QUALITY);
            enc.set_sampling_factor(jpeg_encoder::SamplingFactor::R_4_2_0);
            enc.encode(
                strip,
                self.width as u16,
                rows as u16,
                jpeg_encoder::ColorType::Rgb,
            )?;
            total += buf.len();
            y += rows;
        }
        Ok(total)
    }
}

/// HSV of an 8-bit RGB triple: hue in degrees [0, 360), saturation and value in [0, 1].
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64 / 255.0;
    if max == 0 {
        return (0.0, 0.0, v);
    }
    let delta = (max - min) as f64;
    let s = delta / max as f64;
    if max == min {
        return (0.0, s, v);
    }
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let h = if max as f64 == r {
        60.0 * ((g - b) / delta)
    } else if max as f64 == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (if h < 0.0 { h + 360.0 } else { h }, s, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorStats {
    pub avg_brightness: f64,
    pub avg_hue: f64,
    pub avg_colorfulness: f64,
}

pub fn color_stats(s: &Screenshot) -> ColorStats {
    let mut hist: HashMap<[u8; 3], u64> = HashMap::new();
    for px in s.pixels.chunks_exact(3) {
        *hist.entry([px[0], px[1], px[2]]).or_insert(0) += 1;
    }
    let mut colors: Vec<([u8; 3], u64)> = hist.into_iter().collect();
    colors.sort_unstable();

    let n = s.pixel_count() as f64;
    let (mut sum_v, mut sum_s, mut hx, mut hy, mut hw) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let hsv: Vec<(f64, f64, f64, f64)> = colors
        .iter()
        .map(|&([r, g, b], c)| {
            let (h, s, v) = rgb_to_hsv(r, g, b);
            (h, s, v, c as f64)
        })
        .collect();
    for &(h, s, v, c) in &hsv {
        sum_v += c * v;
        sum_s += c * s;
        let rad = h.to_radians();
        hx += c * s * rad.cos();
        hy += c * s * rad.sin();
        hw += c * s;
    }
    let mean_s = sum_s / n;
    let var_s = hsv
        .iter()
        .map(|&(_, s, _, c)| c * (s - mean_s) * (s - mean_s))
        .sum::<f64>()
        / n;

    let avg_hue = if hw == 0.0 || hx.hypot(hy) < 1e-12 * hw {
        0.0
    } else {
        let deg = hy.atan2(hx).to_degrees();
        let deg = if deg < 0.0 { deg + 360.0 } else { deg };
        if deg >= 360.0 {
            0.0
        } else {
            deg
        }
    };

    ColorStats {
        avg_brightness: sum_v / n,
        avg_hue,
        avg_colorfulness: mean_s + var_s.max(0.0).sqrt(),
    }
}

/// The eight visual features, in [`VISUAL_FEATURES`] order.
///
/// Encoder failures (which the pinned encoders do not produce for valid
/// screenshots) surface as an error so callers can mark the page missing.
pub fn visual_features(s: &Screenshot) -> Result<FeatureVector, String> {
    let stats = color_stats(s);
    let px = s.pixel_count() as f64;
    let png = s.to_png().map_err(|e| e.to_string())?.len() as f64;
    let jpg = s.jpeg_len().map_err(|e| e.to_string())? as f64;
    let (w, h) = (s.width as f64, s.height as f64);
    Ok(FeatureVector::page(
        VISUAL_FEATURES.iter().map(|n| n.to_string()).collect(),
        vec![
            stats.avg_brightness,
            stats.avg_hue,
            stats.avg_colorfulness,
            png / px,
            jpg / px,
            w,
            h,
            w / h,
        ],
    ))
}
