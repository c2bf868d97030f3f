//! Vision-based page segmentation over render geometry, with HTML5 sectioning awareness.
//!
//! Blocks are extracted top-down from the root node:
//!
//! * invisible nodes (`visible = false` or zero area after clipping to the
//!   parent block) are skipped with their subtree;
//! * a node is indivisible when it is text, a replaced element
//!   (`img`, `svg`, `canvas`, `video`, `picture`), a form control, or when all of
//!   its visible children are inline-level;
//! * a node with a single visible child is transparent: the child stands in for it;
//! * otherwise the node is a candidate split whose degree of coherence (DoC)
//!   comes from the rule table in [`VipsConfig`], and it is divided only while
//!   its DoC is below the permitted DoC.
//!
//! The page-level block is always the least coherent block (DoC
//! [`VipsConfig::doc_page`]), so the first division happens for any permitted
//! DoC above it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::geom::{union_area, Rect};
use crate::snapshot::{validate_geometry, RenderGeometry, RenderNode};

pub const PREFIX: &str = "viscom.layout.";
pub const LAYOUT_FEATURES: [&str; 5] = [
    "viscom.layout.n_vips_non_leaf_nodes",
    "viscom.layout.n_vips_leaf_nodes",
    "viscom.layout.text_area_to_whole_page",
    "viscom.layout.n_texts_to_whole_page",
    "viscom.layout.n_vips_layers",
];

pub const DEFAULT_PDOC: u8 = 6;

const SECTIONING: &[&str] = &["header", "nav", "main", "article", "section", "aside", "footer"];
const IMAGE_TAGS: &[&str] = &["img", "svg", "canvas", "picture"];
const REPLACED: &[&str] = &["img", "svg", "canvas", "video", "picture"];
const FORM_CONTROLS: &[&str] = &["input", "button", "select", "textarea"];
const SEPARATORS: &[&str] = &["hr"];
const INLINE_TAGS: &[&str] = &[
    "a", "abbr", "b", "bdi", "bdo", "br", "button", "canvas", "cite", "code", "data", "dfn",
    "em", "i", "img", "input", "kbd", "label", "mark", "q", "s", "samp", "select", "small",
    "span", "strong", "sub", "sup", "svg", "textarea", "time", "u", "var", "wbr",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VipsConfig {
    /// Minimum whitespace (CSS px) between consecutive children that counts as a separator.
    pub gap_threshold: f64,
    pub doc_sectioning: u8,
    pub doc_separator: u8,
    pub doc_background: u8,
    pub doc_gap: u8,
    pub doc_default: u8,
    pub doc_leaf: u8,
    pub doc_page: u8,
}

impl Default for VipsConfig {
    fn default() -> Self {
        VipsConfig {
            gap_threshold: 10.0,
            doc_sectioning: 4,
            doc_separator: 4,
            doc_background: 6,
            doc_gap: 7,
            doc_default: 5,
            doc_leaf: 10,
            doc_page: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Text,
    Image,
    Form,
    Other,
    Composite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VipsBlock {
    #[serde(rename = "box")]
    pub bbox: Rect,
    pub doc: u8,
    pub kind: BlockKind,
    pub source_nodes: BTreeSet<i64>,
    pub children: Vec<VipsBlock>,
}

impl VipsBlock {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn visit<'a>(&'a self, out: &mut Vec<&'a VipsBlock>) {
        out.push(self);
        for c in &self.children {
            c.visit(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VipsTree {
    pub root: VipsBlock,
    pub pdoc: u8,
}

impl VipsTree {
    pub fn blocks(&self) -> Vec<&VipsBlock> {
        let mut out = Vec::new();
        self.root.visit(&mut out);
        out
    }

    pub fn leaves(&self) -> Vec<&VipsBlock> {
        self.blocks().into_iter().filter(|b| b.is_leaf()).collect()
    }

    pub fn n_leaf(&self) -> usize {
        self.leaves().len()
    }

    pub fn n_nonleaf(&self) -> usize {
        self.blocks().len() - self.n_leaf()
    }

    /// Number of blocks on the longest root-to-leaf path.
    pub fn layers(&self) -> usize {
        fn depth(b: &VipsBlock) -> usize {
            1 + b.children.iter().map(depth).max().unwrap_or(0)
        }
        depth(&self.root)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum VipsError {
    #[error("permitted degree of coherence must be in 1..=10, got {0}")]
    InvalidPdoc(u8),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

struct Segmenter<'a> {
    g: &'a RenderGeometry,
    kids: Vec<Vec<usize>>,
    cfg: &'a VipsConfig,
    pdoc: u8,
}

fn is_transparent(color: Option<&str>) -> bool {
    match color.map(|c| c.trim().to_ascii_lowercase()) {
        None => true,
        Some(c) => {
            c.is_empty()
                || c == "transparent"
                || c == "none"
                || c.replace(' ', "") == "rgba(0,0,0,0)"
        }
    }
}

impl Segmenter<'_> {
    fn node(&self, i: usize) -> &RenderNode {
        &self.g.nodes[i]
    }

    /// Visible children of `i` with their boxes clipped to `clip`.
    fn visible_children(&self, i: usize, clip: &Rect) -> Vec<(usize, Rect)> {
        self.kids[i]
            .iter()
            .filter_map(|&c| {
                let n = self.node(c);
                let b = n.bbox.intersect(clip);
                (n.visible && b.area() > 0.0).then_some((c, b))
            })
            .collect()
    }

    fn is_inline(&self, i: usize) -> bool {
        let n = self.node(i);
        if n.is_text() {
            return true;
        }
        match n.style("display") {
            Some(d) if !d.trim().is_empty() => d.trim().starts_with("inline"),
            _ => INLINE_TAGS.contains(&n.tag.as_str()),
        }
    }

    fn subtree_ids(&self, i: usize, clip: &Rect, out: &mut BTreeSet<i64>) {
        out.insert(self.node(i).id);
        for (c, b) in self.visible_children(i, clip) {
            self.subtree_ids(c, &b, out);
        }
    }

    fn leaf_kind(&self, i: usize, clip: &Rect) -> BlockKind {
        let n = self.node(i);
        let tag = n.tag.as_str();
        if n.is_text() {
            return BlockKind::Text;
        }
        if IMAGE_TAGS.contains(&tag) {
            return BlockKind::Image;
        }
        if FORM_CONTROLS.contains(&tag) {
            return BlockKind::Form;
        }
        if REPLACED.contains(&tag) {
            return BlockKind::Other;
        }
        let (mut text, mut image, mut form) = (false, false, false);
        let mut stack = vec![(i, *clip)];
        while let Some((j, b)) = stack.pop() {
            for (c, cb) in self.visible_children(j, &b) {
                let cn = self.node(c);
                if cn.is_text() {
                    text |= cn.text.as_deref().is_some_and(|t| !t.trim().is_empty());
                } else if IMAGE_TAGS.contains(&cn.tag.as_str()) {
                    image = true;
                } else if FORM_CONTROLS.contains(&cn.tag.as_str()) {
                    form = true;
                } else {
                    stack.push((c, cb));
                }
            }
        }
        if text {
            BlockKind::Text
        } else if image {
            BlockKind::Image
        } else if form {
            BlockKind::Form
        } else {
            BlockKind::Other
        }
    }

    fn leaf(&self, i: usize, bbox: Rect, doc: u8) -> VipsBlock {
        let mut ids = BTreeSet::new();
        self.subtree_ids(i, &bbox, &mut ids);
        VipsBlock {
            bbox,
            doc,
            kind: self.leaf_kind(i, &bbox),
            source_nodes: ids,
            children: Vec::new(),
        }
    }

    fn split_doc(&self, parts: &[(usize, Rect)], has_separator: bool) -> u8 {
        let cfg = self.cfg;
        let mut doc: Option<u8> = None;
        let mut hit = |d: u8| doc = Some(doc.map_or(d, |cur| cur.min(d)));
        if has_separator {
            hit(cfg.doc_separator);
        }
        if parts
            .iter()
            .any(|(c, _)| SECTIONING.contains(&self.node(*c).tag.as_str()))
        {
            hit(cfg.doc_sectioning);
        }
        let bg = |c: usize| {
            let s = self.node(c).style("background-color");
            if is_transparent(s) {
                "transparent".to_string()
            } else {
                s.unwrap_or_default().replace(' ', "").to_ascii_lowercase()
            }
        };
        if parts.windows(2).any(|w| bg(w[0].0) != bg(w[1].0)) {
            hit(cfg.doc_background);
        }
        if parts
            .windows(2)
            .any(|w| w[0].1.gap_to(&w[1].1) >= cfg.gap_threshold)
        {
            hit(cfg.doc_gap);
        }
        doc.unwrap_or(cfg.doc_default)
    }

    fn block(&self, i: usize, bbox: Rect, page_level: bool) -> VipsBlock {
        let n = self.node(i);
        let tag = n.tag.as_str();
        if n.is_text() || REPLACED.contains(&tag) || FORM_CONTROLS.contains(&tag) {
            return self.leaf(i, bbox, self.cfg.doc_leaf);
        }
        let visible = self.visible_children(i, &bbox);
        if visible.iter().all(|(c, _)| self.is_inline(*c)) {
            return self.leaf(i, bbox, self.cfg.doc_leaf);
        }
        let (seps, parts): (Vec<_>, Vec<_>) = visible
            .into_iter()
            .partition(|(c, _)| SEPARATORS.contains(&self.node(*c).tag.as_str()));
        match parts.len() {
            0 => return self.leaf(i, bbox, self.cfg.doc_leaf),
            1 if seps.is_empty() => return self.block(parts[0].0, parts[0].1, page_level),
            _ => {}
        }
        let doc = if page_level {
            self.cfg.doc_page
        } else {
            self.split_doc(&parts, !seps.is_empty())
        };
        if doc >= self.pdoc {
            return self.leaf(i, bbox, doc);
        }
        let children: Vec<VipsBlock> = parts
            .iter()
            .map(|&(c, b)| self.block(c, b, false))
            .collect();
        let mut ids = BTreeSet::from([n.id]);
        for c in &children {
            ids.extend(c.source_nodes.iter().copied());
        }
        VipsBlock {
            bbox,
            doc,
            kind: BlockKind::Composite,
            source_nodes: ids,
            children,
        }
    }
}

/// Segments with the default rule table.
pub fn segment_vips(g: &RenderGeometry, pdoc: u8) -> Result<VipsTree, VipsError> {
    segment_vips_with(g, pdoc, &VipsConfig::default())
}

pub fn segment_vips_with(
    g: &RenderGeometry,
    pdoc: u8,
    cfg: &VipsConfig,
) -> Result<VipsTree, VipsError> {
    if !(1..=10).contains(&pdoc) {
        return Err(VipsError::InvalidPdoc(pdoc));
    }
    let violations = validate_geometry(g);
    if !violations.is_empty() {
        return Err(VipsError::InvalidGeometry(violations.join("; ")));
    }
    let page = g.page_box();
    let root = g.root().expect("validated geometry has one root");
    let seg = Segmenter {
        g,
        kids: g.children(),
        cfg,
        pdoc,
    };
    let root_node = seg.node(root);
    let has_content = root_node.visible
        && (root_node.is_text() || !seg.visible_children(root, &page).is_empty());
    let block = if has_content {
        seg.block(root, page, true)
    } else {
        VipsBlock {
            bbox: page,
            doc: cfg.doc_leaf,
            kind: BlockKind::Other,
            source_nodes: BTreeSet::new(),
            children: Vec::new(),
        }
    };
    Ok(VipsTree { root: block, pdoc })
}

/// Page area in units of 10⁶ px².
fn megapixels(g: &RenderGeometry) -> f64 {
    g.page_area() / 1e6
}

/// The five layout features, in [`LAYOUT_FEATURES`] order.
pub fn layout_features(t: &VipsTree, g: &RenderGeometry) -> FeatureVector {
    let text_boxes: Vec<Rect> = t
        .leaves()
        .into_iter()
        .filter(|b| b.kind == BlockKind::Text)
        .map(|b| b.bbox)
        .collect();
    let text_area = (union_area(&text_boxes) / g.page_area()).clamp(0.0, 1.0);
    FeatureVector::page(
        LAYOUT_FEATURES.iter().map(|s| s.to_string()).collect(),
        vec![
            t.n_nonleaf() as f64,
            t.n_leaf() as f64,
            text_area,
            text_boxes.len() as f64 / megapixels(g),
            t.layers() as f64,
        ],
    )
}
