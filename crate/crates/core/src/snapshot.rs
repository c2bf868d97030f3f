//! Snapshot bundles: one captured page on disk.
//!
//! A bundle directory holds `page.html`, `screenshot.png`, `geometry.json`
//! and `meta.json`. Coordinates are CSS pixels at device-pixel-ratio 1, and
//! the screenshot must match the page dimensions exactly.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Rect;
use crate::page_type::PageType;
use crate::visual::Screenshot;

pub const HTML_FILE: &str = "page.html";
pub const SCREENSHOT_FILE: &str = "screenshot.png";
pub const GEOMETRY_FILE: &str = "geometry.json";
pub const META_FILE: &str = "meta.json";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("schema violation in {field}: {rule}")]
    SchemaViolation { field: String, rule: String },
    #[error("screenshot is {shot_w}x{shot_h} but geometry says {page_w}x{page_h}")]
    DimensionMismatch {
        shot_w: u32,
        shot_h: u32,
        page_w: u32,
        page_h: u32,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode or encode screenshot: {0}")]
    Image(#[from] image::ImageError),
}

fn schema(field: &str, rule: impl Into<String>) -> SnapshotError {
    SnapshotError::SchemaViolation {
        field: field.to_string(),
        rule: rule.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderNode {
    pub id: i64,
    #[serde(rename = "parent")]
    pub parent_id: Option<i64>,
    pub tag: String,
    #[serde(rename = "box")]
    pub bbox: Rect,
    pub visible: bool,
    #[serde(default)]
    pub styles: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default)]
    pub attrs: BTreeMap<String, String>,
}

impl RenderNode {
    pub fn is_text(&self) -> bool {
        self.tag == "#text"
    }

    pub fn style(&self, key: &str) -> Option<&str> {
        self.styles.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "GeometryWire", into = "GeometryWire")]
pub struct RenderGeometry {
    pub page_width: u32,
    pub page_height: u32,
    pub nodes: Vec<RenderNode>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageDims {
    width: u32,
    height: u32,
}

#[derive(Serialize, Deserialize)]
struct GeometryWire {
    page: PageDims,
    nodes: Vec<RenderNode>,
}

impl From<GeometryWire> for RenderGeometry {
    fn from(w: GeometryWire) -> Self {
        RenderGeometry {
            page_width: w.page.width,
            page_height: w.page.height,
            nodes: w.nodes,
        }
    }
}

impl From<RenderGeometry> for GeometryWire {
    fn from(g: RenderGeometry) -> Self {
        GeometryWire {
            page: PageDims {
                width: g.page_width,
                height: g.page_height,
            },
            nodes: g.nodes,
        }
    }
}

impl RenderGeometry {
    pub fn page_box(&self) -> Rect {
        Rect::new(0.0, 0.0, self.page_width as f64, self.page_height as f64)
    }

    pub fn page_area(&self) -> f64 {
        self.page_width as f64 * self.page_height as f64
    }

    /// Index of the unique root node, if there is exactly one.
    pub fn root(&self) -> Option<usize> {
        let mut roots = self.nodes.iter().enumerate().filter(|(_, n)| n.parent_id.is_none());
        match (roots.next(), roots.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    /// Child node indices per node index, in document (list) order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let pos: HashMap<i64, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id, i))
            .collect();
        let mut kids = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent_id.and_then(|p| pos.get(&p)) {
                kids[*p].push(i);
            }
        }
        kids
    }
}

/// Lists every geometry invariant violation; empty means the geometry is valid.
pub fn validate_geometry(g: &RenderGeometry) -> Vec<String> {
    let mut out = Vec::new();
    if g.page_width == 0 {
        out.push("page width must be positive".to_string());
    }
    if g.page_height == 0 {
        out.push("page height must be positive".to_string());
    }

    let mut ids = HashSet::new();
    for n in &g.nodes {
        if !ids.insert(n.id) {
            out.push(format!("duplicate id: node {}", n.id));
        }
    }

    let roots = g.nodes.iter().filter(|n| n.parent_id.is_none()).count();
    match roots {
        0 => out.push("no root".to_string()),
        1 => {}
        _ => out.push("multiple roots".to_string()),
    }

    for n in &g.nodes {
        if let Some(p) = n.parent_id {
            if !ids.contains(&p) {
                out.push(format!("dangling parent: node {}", n.id));
            }
        }
        let b = n.bbox;
        if ![b.x, b.y, b.w, b.h].iter().all(|v| v.is_finite()) {
            out.push(format!("non-finite box: node {}", n.id));
        } else if b.w < 0.0 || b.h < 0.0 {
            out.push(format!("negative size: node {}", n.id));
        }
    }

    let by_id: HashMap<i64, &RenderNode> = g.nodes.iter().map(|n| (n.id, n)).collect();
    for n in &g.nodes {
        if let Some(p) = n.parent_id.and_then(|p| by_id.get(&p)) {
            if p.is_text() {
                out.push(format!("text node has children: node {}", p.id));
            }
        }
    }

    // Every node must reach a root by following parents; otherwise it sits on a cycle.
    if roots == 1 {
        let mut on_cycle = Vec::new();
        for n in &g.nodes {
            let mut cur = n;
            let mut steps = 0;
            while let Some(p) = cur.parent_id.and_then(|p| by_id.get(&p)) {
                cur = p;
                steps += 1;
                if steps > g.nodes.len() {
                    on_cycle.push(n.id);
                    break;
                }
            }
        }
        out.extend(on_cycle.into_iter().map(|id| format!("cycle: node {id}")));
    }
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageMeta {
    pub url: String,
    pub captured_at: DateTime<FixedOffset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_type_hint: Option<PageType>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageSnapshot {
    pub id: String,
    pub html: Vec<u8>,
    pub screenshot: Screenshot,
    pub geometry: RenderGeometry,
    pub meta: PageMeta,
}

fn read(dir: &Path, name: &str) -> Result<Vec<u8>, SnapshotError> {
    let path = dir.join(name);
    fs::read(&path).map_err(|source| SnapshotError::Io { path, source })
}

/// Loads and validates the bundle in `bundle_dir`. The snapshot id is the directory name.
pub fn load_snapshot(bundle_dir: &Path) -> Result<PageSnapshot, SnapshotError> {
    for name in [HTML_FILE, SCREENSHOT_FILE, GEOMETRY_FILE, META_FILE] {
        if !bundle_dir.join(name).is_file() {
            return Err(SnapshotError::MissingFile(name.to_string()));
        }
    }
    let id = bundle_dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();

    let html = read(bundle_dir, HTML_FILE)?;
    if html.is_empty() {
        return Err(schema(HTML_FILE, "html must be non-empty"));
    }

    let geometry: RenderGeometry = serde_json::from_slice(&read(bundle_dir, GEOMETRY_FILE)?)
        .map_err(|e| schema(GEOMETRY_FILE, e.to_string()))?;
    let violations = validate_geometry(&geometry);
    if !violations.is_empty() {
        return Err(schema("geometry.nodes", violations.join("; ")));
    }

    let meta: PageMeta = serde_json::from_slice(&read(bundle_dir, META_FILE)?)
        .map_err(|e| schema(META_FILE, e.to_string()))?;
    if meta.url.is_empty() {
        return Err(schema("meta.url", "url must be non-empty"));
    }

    let png = read(bundle_dir, SCREENSHOT_FILE)?;
    let rgb = image::load_from_memory_with_format(&png, image::ImageFormat::Png)?.into_rgb8();
    let (w, h) = rgb.dimensions();
    if w != geometry.page_width || h != geometry.page_height {
        return Err(SnapshotError::DimensionMismatch {
            shot_w: w,
            shot_h: h,
            page_w: geometry.page_width,
            page_h: geometry.page_height,
        });
    }
    let screenshot = Screenshot::new(w, h, rgb.into_raw())
        .map_err(|e| schema(SCREENSHOT_FILE, e.to_string()))?;

    Ok(PageSnapshot {
        id,
        html,
        screenshot,
        geometry,
        meta,
    })
}

/// Writes `s` as a bundle into `bundle_dir`, creating the directory.
pub fn write_snapshot(s: &PageSnapshot, bundle_dir: &Path) -> Result<(), SnapshotError> {
    let io = |path: PathBuf| move |source| SnapshotError::Io { path, source };
    fs::create_dir_all(bundle_dir).map_err(io(bundle_dir.to_path_buf()))?;

    let write = |name: &str, bytes: &[u8]| {
        let path = bundle_dir.join(name);
        fs::write(&path, bytes).map_err(io(path))
    };
    write(HTML_FILE, &s.html)?;
    write(
        GEOMETRY_FILE,
        &serde_json::to_vec_pretty(&s.geometry).expect("geometry serializes"),
    )?;
    write(
        META_FILE,
        &serde_json::to_vec_pretty(&s.meta).expect("meta serializes"),
    )?;
    write(SCREENSHOT_FILE, &s.screenshot.to_png()?)?;
    Ok(())
}
