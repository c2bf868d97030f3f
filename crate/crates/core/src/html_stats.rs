//! HTML statistics: tag-group counts and their spread across top-level sections.
//!
//! All statistics are taken over the `body` subtree (excluding `body`
//! itself). A top-level section is an element child of `body`; per-section
//! occurrence counts include the section element itself.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dom::DomNode;
use crate::features::FeatureVector;

pub const PREFIX: &str = "viscom.html.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stat {
    Count,
    Min,
    Max,
    Avg,
    Std,
}

impl Stat {
    fn name(self) -> &'static str {
        match self {
            Stat::Count => "n",
            Stat::Min => "min",
            Stat::Max => "max",
            Stat::Avg => "avg",
            Stat::Std => "std",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagGroupSpec {
    pub group_name: String,
    pub member_tags: Vec<String>,
    pub stats: Vec<Stat>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("group `{0}` has no member tags")]
    EmptyGroup(String),
    #[error("tag `{tag}` appears in both `{first}` and `{second}`")]
    Overlap {
        tag: String,
        first: String,
        second: String,
    },
}

const GLOBALS: [&str; 6] = [
    "n_tags",
    "max_depth",
    "n_distinct_tags",
    "n_text_nodes",
    "text_length",
    "n_script_style",
];

/// The shipped nine-group registry.
pub fn default_registry() -> Vec<TagGroupSpec> {
    use Stat::*;
    let group = |name: &str, tags: &[&str], spread: bool| TagGroupSpec {
        group_name: name.to_string(),
        member_tags: tags.iter().map(|t| t.to_string()).collect(),
        stats: if spread {
            vec![Count, Min, Max, Avg, Std]
        } else {
            vec![Count]
        },
    };
    vec![
        group("headings", &["h1", "h2", "h3", "h4", "h5", "h6"], true),
        group("paragraphs", &["p"], false),
        group("lists", &["ul", "ol", "li"], true),
        group("tables", &["table", "tr", "td", "th"], true),
        group("images", &["img", "picture", "svg"], false),
        group("media", &["video", "audio", "iframe", "embed"], false),
        group("links", &["a"], true),
        group("forms", &["form", "input", "button", "select", "textarea"], false),
        group("styling", &["b", "i", "em", "strong", "span"], false),
    ]
}

pub fn validate_registry(registry: &[TagGroupSpec]) -> Result<(), RegistryError> {
    for (i, g) in registry.iter().enumerate() {
        if g.member_tags.is_empty() {
            return Err(RegistryError::EmptyGroup(g.group_name.clone()));
        }
        for other in &registry[..i] {
            if let Some(tag) = g.member_tags.iter().find(|t| other.member_tags.contains(t)) {
                return Err(RegistryError::Overlap {
                    tag: tag.clone(),
                    first: other.group_name.clone(),
                    second: g.group_name.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Ordered feature names: group counts, then per-section spread statistics, then globals.
pub fn feature_names(registry: &[TagGroupSpec]) -> Vec<String> {
    let mut names = Vec::new();
    for g in registry.iter().filter(|g| g.stats.contains(&Stat::Count)) {
        names.push(format!("{PREFIX}n_{}", g.group_name));
    }
    for g in registry {
        for s in g.stats.iter().filter(|s| **s != Stat::Count) {
            names.push(format!("{PREFIX}{}_{}", g.group_name, s.name()));
        }
    }
    names.extend(GLOBALS.iter().map(|g| format!("{PREFIX}{g}")));
    names
}

fn collapsed_len(s: &str) -> usize {
    s.split_whitespace().collect::<Vec<_>>().join(" ").chars().count()
}

#[derive(Default)]
struct Tally {
    tags: Vec<String>,
    max_depth: usize,
    text_nodes: usize,
    text_len: usize,
}

fn walk(n: &DomNode, depth: usize, in_raw: bool, t: &mut Tally) {
    for c in &n.children {
        if c.is_text() {
            if !in_raw && !c.text.trim().is_empty() {
                t.text_nodes += 1;
                t.text_len += collapsed_len(&c.text);
            }
            continue;
        }
        t.tags.push(c.tag.clone());
        t.max_depth = t.max_depth.max(depth + 1);
        walk(c, depth + 1, in_raw || c.tag == "script" || c.tag == "style", t);
    }
}

fn count_in(n: &DomNode, members: &[String]) -> usize {
    n.descendants()
        .iter()
        .filter(|d| !d.is_text() && members.contains(&d.tag))
        .count()
}

/// Computes the HTML feature vector for `dom` under `registry`.
pub fn html_features(dom: &DomNode, registry: &[TagGroupSpec]) -> FeatureVector {
    let names = feature_names(registry);
    let empty = DomNode::default();
    let body = dom.body().unwrap_or(&empty);

    let mut tally = Tally::default();
    walk(body, 0, false, &mut tally);
    let sections: Vec<&DomNode> = body.element_children().collect();

    let mut values = Vec::with_capacity(names.len());
    for g in registry.iter().filter(|g| g.stats.contains(&Stat::Count)) {
        values.push(tally.tags.iter().filter(|t| g.member_tags.contains(t)).count() as f64);
    }
    for g in registry {
        let per: Vec<f64> = sections
            .iter()
            .map(|s| count_in(s, &g.member_tags) as f64)
            .collect();
        let n = per.len() as f64;
        let mean = if per.is_empty() { 0.0 } else { per.iter().sum::<f64>() / n };
        for s in g.stats.iter().filter(|s| **s != Stat::Count) {
            values.push(match (s, per.is_empty()) {
                (_, true) => 0.0,
                (Stat::Min, _) => per.iter().copied().fold(f64::INFINITY, f64::min),
                (Stat::Max, _) => per.iter().copied().fold(0.0, f64::max),
                (Stat::Avg, _) => mean,
                (Stat::Std, _) => {
                    (per.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
                }
                (Stat::Count, _) => unreachable!("filtered above"),
            });
        }
    }
    let distinct: BTreeSet<&String> = tally.tags.iter().collect();
    values.extend([
        tally.tags.len() as f64,
        tally.max_depth as f64,
        distinct.len() as f64,
        tally.text_nodes as f64,
        tally.text_len as f64,
        tally
            .tags
            .iter()
            .filter(|t| *t == "script" || *t == "style")
            .count() as f64,
    ]);
    FeatureVector::page(names, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_dom;
    use proptest::prelude::*;

    fn features(html: &str) -> FeatureVector {
        html_features(&parse_dom(html.as_bytes()).unwrap(), &default_registry())
    }

    fn get(v: &FeatureVector, name: &str) -> f64 {
        v.get(&format!("{PREFIX}{name}")).unwrap().unwrap()
    }

    #[test]
    fn registry_has_31_names() {
        let reg = default_registry();
        validate_registry(&reg).unwrap();
        let names = feature_names(&reg);
        assert_eq!(names.len(), 31);
        assert_eq!(names[0], "viscom.html.n_headings");
        assert_eq!(names[9], "viscom.html.headings_min");
        assert_eq!(names[30], "viscom.html.n_script_style");
    }

    #[test]
    fn empty_body_is_all_zero() {
        let v = features("<html><head><title>t</title><style>p{}</style></head><body></body></html>");
        assert_eq!(v.len(), 31);
        assert!(v.values().iter().all(|x| *x == Some(0.0)));
    }

    #[test]
    fn paragraph_and_image_counts() {
        let v = features("<p>a</p><p>b</p><img src=x>");
        assert_eq!(get(&v, "n_paragraphs"), 2.0);
        assert_eq!(get(&v, "n_images"), 1.0);
        assert_eq!(get(&v, "n_tags"), 3.0);
        assert_eq!(get(&v, "n_text_nodes"), 2.0);
    }

    #[test]
    fn section_spread() {
        // Sections hold 1, 3 and 0 links.
        let v = features("<div><a>x</a></div><div><a>1</a><a>2</a><a>3</a></div><p>none</p>");
        assert_eq!(get(&v, "links_min"), 0.0);
        assert_eq!(get(&v, "links_max"), 3.0);
        assert_eq!(get(&v, "links_avg"), 4.0 / 3.0);
        let mean = 4.0 / 3.0;
        let std = (((1.0 - mean) * (1.0f64 - mean) + (3.0 - mean) * (3.0 - mean) + mean * mean) / 3.0).sqrt();
        assert!((get(&v, "links_std") - std).abs() < 1e-12);
    }

    #[test]
    fn overlap_rejected() {
        let mut reg = default_registry();
        reg[1].member_tags.push("h1".into());
        assert!(matches!(validate_registry(&reg), Err(RegistryError::Overlap { .. })));
    }

    fn fragment() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            Just("<p>some text</p>".to_string()),
            Just("<img src=a>".to_string()),
            Just("<a href=x>link</a>".to_string()),
            Just("<span>s</span>".to_string()),
            Just("<h2>Title</h2>".to_string()),
            Just("<script>var x = 1;</script>".to_string()),
        ];
        leaf.prop_recursive(3, 24, 4, |inner| {
            (prop::sample::select(vec!["div", "section", "ul", "td"]), prop::collection::vec(inner, 1..4))
                .prop_map(|(tag, kids)| match tag {
                    "ul" => format!("<ul>{}</ul>", kids.iter().map(|k| format!("<li>{k}</li>")).collect::<String>()),
                    "td" => format!("<table><tr><td>{}</td></tr></table>", kids.concat()),
                    t => format!("<{t}>{}</{t}>", kids.concat()),
                })
        })
    }

    proptest! {
        #[test]
        fn whitespace_between_tags_is_ignored(parts in prop::collection::vec(fragment(), 1..4), ws in "[ \n\t]{1,3}") {
            let body = parts.concat();
            let spaced = body.replace("><", &format!(">{ws}<"));
            let a = features(&format!("<html><body>{body}</body></html>"));
            let b = features(&format!("<html>{ws}<body>{ws}{spaced}{ws}</body>{ws}</html>"));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn doubling_body_doubles_counts(parts in prop::collection::vec(fragment(), 1..4)) {
            let body = parts.concat();
            let a = features(&format!("<body>{body}</body>"));
            let b = features(&format!("<body>{body}{body}</body>"));
            for (i, name) in a.names().iter().enumerate() {
                let (x, y) = (a.values()[i].unwrap(), b.values()[i].unwrap());
                let suffix = name.trim_start_matches(PREFIX);
                let is_count = suffix.starts_with("n_") && suffix != "n_distinct_tags" || suffix == "text_length";
                if is_count {
                    prop_assert_eq!(y, 2.0 * x, "{}", name);
                } else {
                    prop_assert!((y - x).abs() < 1e-9, "{} {} {}", name, x, y);
                }
            }
        }
    }
}
