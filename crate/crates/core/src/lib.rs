//! Feature extraction and modelling for web-search sessions.
//!
//! Pages arrive as snapshot bundles (HTML, screenshot, render geometry,
//! metadata). [`extract`] turns each into a page feature vector, [`kg`]
//! aggregates pages into sessions and labels knowledge gain, and [`ml`]
//! runs the cross-validated classification protocol.

pub mod aesthetics;
pub mod aggregate;
pub mod dom;
pub mod embed;
pub mod extract;
pub mod features;
pub mod geom;
pub mod html_stats;
pub mod kg;
pub mod main_text;
pub mod ml;
pub mod page_type;
pub mod query;
pub mod registry;
pub mod session;
pub mod snapshot;
pub mod table;
pub mod textcom;
pub mod visual;
pub mod vips;
pub mod webrel;

pub use features::{FeatureVector, Scope};
pub use geom::Rect;
pub use kg::{KgClass, KgLabel};
pub use main_text::MainText;
pub use page_type::PageType;
pub use session::{KnowledgeTest, NavigationEvent, SessionRecord};
pub use snapshot::{PageMeta, PageSnapshot, RenderGeometry, RenderNode};
pub use visual::Screenshot;
