//! Main-text extraction: prose paragraphs from block-level elements.
//!
//! Navigation chrome (`nav`, `header`, `footer`, `aside`, `form`) and
//! non-rendered content are skipped. Each block-level element closes the
//! current paragraph, so nested blocks yield separate paragraphs. A
//! paragraph survives the prose filter iff it has at least
//! [`MIN_TOKENS`] tokens, ends in sentence punctuation and contains a
//! function word from [`FUNCTION_WORDS`].

use serde::{Deserialize, Serialize};

use crate::dom::DomNode;

pub const MIN_TOKENS: usize = 5;

const SKIPPED: &[&str] = &[
    "nav", "header", "footer", "aside", "form", "script", "style", "noscript", "template",
    "head", "select", "button", "iframe", "svg",
];

const BLOCKS: &[&str] = &[
    "address", "article", "blockquote", "body", "caption", "center", "dd", "details", "div",
    "dl", "dt", "figcaption", "figure", "h1", "h2", "h3", "h4", "h5", "h6", "hr", "li", "main",
    "ol", "p", "pre", "section", "summary", "table", "tbody", "td", "tfoot", "th", "thead",
    "tr", "ul", "br",
];

/// Closed-class words whose presence marks a run of text as prose.
pub const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "being", "has", "have", "had",
    "do", "does", "did", "of", "in", "on", "at", "by", "for", "with", "from", "to", "into",
    "and", "or", "but", "that", "which", "who", "this", "these", "those", "it", "its", "they",
    "their", "can", "will", "would", "should", "could", "may", "might", "must", "not", "as",
    "than", "when", "where", "while", "because", "if",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainText {
    pub paragraphs: Vec<String>,
}

impl MainText {
    pub fn is_empty(&self) -> bool {
        self.paragraphs.is_empty()
    }
}

fn strip_word(tok: &str) -> String {
    tok.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// The prose filter applied to each candidate paragraph.
pub fn is_prose(paragraph: &str) -> bool {
    let tokens: Vec<&str> = paragraph.split_whitespace().collect();
    if tokens.len() < MIN_TOKENS {
        return false;
    }
    let tail = paragraph.trim_end_matches(|c: char| matches!(c, '"' | '\'' | ')' | '”' | '’' | ']'));
    if !tail.ends_with(['.', '!', '?']) {
        return false;
    }
    tokens
        .iter()
        .any(|t| FUNCTION_WORDS.contains(&strip_word(t).as_str()))
}

struct Collector {
    buf: String,
    out: Vec<String>,
}

impl Collector {
    fn flush(&mut self) {
        let p = self.buf.split_whitespace().collect::<Vec<_>>().join(" ");
        self.buf.clear();
        if is_prose(&p) {
            self.out.push(p);
        }
    }

    fn walk(&mut self, n: &DomNode) {
        if n.is_text() {
            self.buf.push_str(&n.text);
            return;
        }
        if SKIPPED.contains(&n.tag.as_str()) {
            return;
        }
        let block = BLOCKS.contains(&n.tag.as_str());
        if block {
            self.flush();
        } else {
            // Inline boundaries must not glue words together.
            self.buf.push(' ');
        }
        for c in &n.children {
            self.walk(c);
        }
        if block {
            self.flush();
        } else {
            self.buf.push(' ');
        }
    }
}

pub fn extract_main_text(dom: &DomNode) -> MainText {
    let mut c = Collector {
        buf: String::new(),
        out: Vec::new(),
    };
    if let Some(body) = dom.body() {
        c.walk(body);
    }
    c.flush();
    MainText { paragraphs: c.out }
}
