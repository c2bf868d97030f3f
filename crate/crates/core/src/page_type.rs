//! SERP / video / content classification of visited URLs.

use serde::{Deserialize, Serialize};
use url::Url;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PageType {
    Serp,
    Video,
    Content,
}

/// A search-result page pattern.
///
/// `host` is either an exact domain (`bing.com`, also matching subdomains)
/// or a domain stem ending in `.*` (`google.*`), which matches any TLD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerpPattern {
    pub host: String,
    pub path_prefix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_param: Option<String>,
}

/// Editable rule tables, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageTypeRules {
    pub serp: Vec<SerpPattern>,
    pub video: Vec<String>,
}

impl Default for PageTypeRules {
    fn default() -> Self {
        let serp = |host: &str, path: &str, q: Option<&str>| SerpPattern {
            host: host.to_string(),
            path_prefix: path.to_string(),
            query_param: q.map(str::to_string),
        };
        PageTypeRules {
            serp: vec![
                serp("google.*", "/search", None),
                serp("bing.com", "/search", None),
                serp("duckduckgo.com", "/", Some("q")),
                serp("ecosia.org", "/search", None),
            ],
            video: ["youtube.com", "youtu.be", "vimeo.com", "dailymotion.com"]
                .map(String::from)
                .to_vec(),
        }
    }
}

fn host_matches(host: &str, pattern: &str) -> bool {
    let host = host.to_ascii_lowercase();
    let pattern = pattern.to_ascii_lowercase();
    match pattern.strip_suffix(".*") {
        Some(stem) => {
            let labels: Vec<&str> = host.split('.').collect();
            let stem: Vec<&str> = stem.split('.').collect();
            // The stem must be followed by at least one TLD label.
            (0..labels.len().saturating_sub(stem.len()))
                .any(|i| labels[i..i + stem.len()] == stem[..])
        }
        None => host == pattern || host.ends_with(&format!(".{pattern}")),
    }
}

impl PageTypeRules {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// The hint wins when present; otherwise SERP rules, then video hosts, then content.
    pub fn classify(&self, url: &str, hint: Option<PageType>) -> PageType {
        if let Some(h) = hint {
            return h;
        }
        let Ok(parsed) = Url::parse(url) else {
            return PageType::Content;
        };
        let Some(host) = parsed.host_str() else {
            return PageType::Content;
        };
        let is_serp = self.serp.iter().any(|p| {
            host_matches(host, &p.host)
                && parsed.path().starts_with(&p.path_prefix)
                && p
                    .query_param
                    .as_ref()
                    .is_none_or(|q| parsed.query_pairs().any(|(k, _)| k == q.as_str()))
        });
        if is_serp {
            PageType::Serp
        } else if self.video.iter().any(|v| host_matches(host, v)) {
            PageType::Video
        } else {
            PageType::Content
        }
    }
}

/// Classifies with the shipped default rules.
pub fn classify_page_type(url: &str, hint: Option<PageType>) -> PageType {
    PageTypeRules::default().classify(url, hint)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_table() {
        assert_eq!(
            classify_page_type("https://www.google.com/search?q=lightning", None),
            PageType::Serp
        );
        assert_eq!(
            classify_page_type("https://www.youtube.com/watch?v=x", None),
            PageType::Video
        );
        assert_eq!(
            classify_page_type("https://en.wikipedia.org/wiki/Lightning", None),
            PageType::Content
        );
        assert_eq!(
            classify_page_type("https://www.google.de/search?q=blitz", None),
            PageType::Serp
        );
        assert_eq!(
            classify_page_type("https://duckduckgo.com/?q=thunder", None),
            PageType::Serp
        );
        assert_eq!(
            classify_page_type("https://duckduckgo.com/about", None),
            PageType::Content
        );
        assert_eq!(
            classify_page_type("https://maps.google.com/place", None),
            PageType::Content
        );
        assert_eq!(classify_page_type("not a url", None), PageType::Content);
    }

    #[test]
    fn hint_wins() {
        assert_eq!(
            classify_page_type("https://www.youtube.com/watch?v=x", Some(PageType::Content)),
            PageType::Content
        );
    }

    #[test]
    fn rules_round_trip_json() {
        let rules = PageTypeRules::default();
        let json = serde_json::to_string(&rules).unwrap();
        assert_eq!(PageTypeRules::from_json(&json).unwrap(), rules);
    }
}
