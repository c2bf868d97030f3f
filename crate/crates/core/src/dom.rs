//! Error-tolerant HTML parsing into an owned DOM tree.
//!
//! This is a reduced HTML5 tree builder: it case-folds names, knows the void
//! and raw-text elements, auto-closes `p`, `li`, `dd`/`dt`, headings, and table
//! rows and cells, inserts implied `tbody`, and foster-parents stray content
//! out of tables. The adoption agency algorithm for misnested formatting
//! elements is not implemented; such input still yields a tree, just not
//! necessarily the one a browser builds.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DomError {
    #[error("empty document")]
    EmptyDocument,
}

pub const TEXT_TAG: &str = "#text";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DomNode {
    pub tag: String,
    pub children: Vec<DomNode>,
    /// Character data; only set on `#text` nodes.
    pub text: String,
    pub attrs: BTreeMap<String, String>,
}

impl DomNode {
    pub fn is_text(&self) -> bool {
        self.tag == TEXT_TAG
    }

    pub fn element_children(&self) -> impl Iterator<Item = &DomNode> {
        self.children.iter().filter(|c| !c.is_text())
    }

    /// First descendant-or-self element named `tag`, depth first.
    pub fn find(&self, tag: &str) -> Option<&DomNode> {
        if self.tag == tag {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(tag))
    }

    pub fn body(&self) -> Option<&DomNode> {
        self.find("body")
    }

    /// Pre-order traversal including `self`.
    pub fn descendants(&self) -> Vec<&DomNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    /// Concatenated text of the subtree.
    pub fn text_content(&self) -> String {
        let mut s = String::new();
        for n in self.descendants() {
            if n.is_text() {
                s.push_str(&n.text);
            }
        }
        s
    }
}

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "keygen", "link", "meta",
    "param", "source", "track", "wbr",
];
const RAW_TEXT: &[&str] = &["script", "style", "textarea", "title", "xmp", "noembed"];
const HEAD_ONLY: &[&str] = &[
    "base", "basefont", "bgsound", "link", "meta", "noscript", "script", "style", "template",
    "title",
];
const CLOSES_P: &[&str] = &[
    "address", "article", "aside", "blockquote", "center", "dd", "details", "dialog", "dir",
    "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3",
    "h4", "h5", "h6", "header", "hgroup", "hr", "li", "listing", "main", "menu", "nav", "ol",
    "p", "pre", "search", "section", "summary", "table", "ul", "xmp",
];
const HEADINGS: &[&str] = &["h1", "h2", "h3", "h4", "h5", "h6"];
const SCOPE_BOUNDARY: &[&str] = &[
    "applet", "caption", "html", "table", "td", "th", "marquee", "object", "template",
];
const TABLE_CONTEXT: &[&str] = &["table", "tbody", "thead", "tfoot", "tr"];
const IN_TABLE_OK: &[&str] = &[
    "caption", "colgroup", "col", "tbody", "thead", "tfoot", "tr", "td", "th", "script",
    "style", "template", "form", "input",
];
// Elements whose end tag never closes past them when searching for a generic end tag.
const SPECIAL: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "button", "caption", "center", "dd",
    "details", "div", "dl", "dt", "fieldset", "figure", "footer", "form", "h1", "h2", "h3",
    "h4", "h5", "h6", "header", "html", "li", "main", "nav", "ol", "p", "section", "table",
    "tbody", "td", "tfoot", "th", "thead", "tr", "ul",
];

#[derive(Debug, PartialEq)]
enum Token {
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End(String),
    Text(String),
}

fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let end = rest[1..]
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '#'))
            .map(|e| e + 1)
            .unwrap_or(rest.len());
        let name = &rest[1..end];
        let decoded = match name {
            "amp" => Some('&'),
            "lt" => Some('<'),
            "gt" => Some('>'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            "nbsp" => Some('\u{a0}'),
            "copy" => Some('©'),
            "mdash" => Some('—'),
            "ndash" => Some('–'),
            _ => name.strip_prefix('#').and_then(|num| {
                let code = match num.strip_prefix(['x', 'X']) {
                    Some(hex) => u32::from_str_radix(hex, 16).ok(),
                    None => num.parse().ok(),
                };
                code.and_then(char::from_u32)
            }),
        };
        match decoded {
            Some(c) if !name.is_empty() => {
                out.push(c);
                rest = &rest[end..];
                if rest.starts_with(';') {
                    rest = &rest[1..];
                }
            }
            _ => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn tokenize(src: &str) -> Vec<Token> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut text_start = 0;

    let flush = |tokens: &mut Vec<Token>, from: usize, to: usize| {
        if to > from {
            tokens.push(Token::Text(decode_entities(&src[from..to])));
        }
    };

    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        let rest = &src[i..];
        if rest.starts_with("<!--") {
            flush(&mut tokens, text_start, i);
            i = rest[4..].find("-->").map(|e| i + 4 + e + 3).unwrap_or(bytes.len());
            text_start = i;
            continue;
        }
        if rest.starts_with("<!") || rest.starts_with("<?") {
            flush(&mut tokens, text_start, i);
            i = rest.find('>').map(|e| i + e + 1).unwrap_or(bytes.len());
            text_start = i;
            continue;
        }
        let is_end = rest.starts_with("</");
        let name_start = i + if is_end { 2 } else { 1 };
        if !bytes.get(name_start).is_some_and(u8::is_ascii_alphabetic) {
            // Not a tag; `<` is literal text.
            i += 1;
            continue;
        }
        flush(&mut tokens, text_start, i);

        let mut j = name_start;
        while j < bytes.len() && !matches!(bytes[j], b' ' | b'\t' | b'\n' | b'\r' | b'\x0c' | b'/' | b'>') {
            j += 1;
        }
        let name = src[name_start..j].to_ascii_lowercase();

        let mut attrs = Vec::new();
        let mut self_closing = false;
        loop {
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            if j >= bytes.len() {
                break;
            }
            match bytes[j] {
                b'>' => {
                    j += 1;
                    break;
                }
                b'/' => {
                    self_closing = bytes.get(j + 1) == Some(&b'>');
                    j += 1;
                    continue;
                }
                _ => {}
            }
            let a0 = j;
            while j < bytes.len() && !matches!(bytes[j], b' ' | b'\t' | b'\n' | b'\r' | b'\x0c' | b'/' | b'>' | b'=') {
                j += 1;
            }
            let key = src[a0..j].to_ascii_lowercase();
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            let mut value = String::new();
            if bytes.get(j) == Some(&b'=') {
                j += 1;
                while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                    j += 1;
                }
                match bytes.get(j) {
                    Some(&q @ (b'"' | b'\'')) => {
                        let v0 = j + 1;
                        let v1 = src[v0..].find(q as char).map(|e| v0 + e).unwrap_or(bytes.len());
                        value = decode_entities(&src[v0..v1]);
                        j = (v1 + 1).min(bytes.len());
                    }
                    _ => {
                        let v0 = j;
                        while j < bytes.len() && !bytes[j].is_ascii_whitespace() && bytes[j] != b'>' {
                            j += 1;
                        }
                        value = decode_entities(&src[v0..j]);
                    }
                }
            }
            if !key.is_empty() && !attrs.iter().any(|(k, _)| k == &key) {
                attrs.push((key, value));
            }
        }
        i = j;
        text_start = i;

        if is_end {
            tokens.push(Token::End(name));
            continue;
        }
        let raw = RAW_TEXT.contains(&name.as_str()) && !self_closing;
        tokens.push(Token::Start {
            name: name.clone(),
            attrs,
            self_closing,
        });
        if raw {
            let close = format!("</{name}");
            let lower = src[i..].to_ascii_lowercase();
            let end = lower.find(&close).map(|e| i + e).unwrap_or(bytes.len());
            if end > i {
                let body = &src[i..end];
                tokens.push(Token::Text(if name == "textarea" || name == "title" {
                    decode_entities(body)
                } else {
                    body.to_string()
                }));
            }
            i = end;
            text_start = i;
        }
    }
    flush(&mut tokens, text_start, bytes.len());
    tokens
}

struct ArenaNode {
    tag: String,
    text: String,
    attrs: BTreeMap<String, String>,
    children: Vec<usize>,
    parent: usize,
}

struct TreeBuilder {
    nodes: Vec<ArenaNode>,
    stack: Vec<usize>,
    head: usize,
    body: usize,
    in_body: bool,
}

const HTML: usize = 0;

impl TreeBuilder {
    fn new() -> Self {
        let mut b = TreeBuilder {
            nodes: Vec::new(),
            stack: Vec::new(),
            head: 1,
            body: 2,
            in_body: false,
        };
        b.alloc("html", Vec::new(), HTML);
        b.head = b.alloc("head", Vec::new(), HTML);
        b.nodes[HTML].children.push(b.head);
        b.body = b.alloc("body", Vec::new(), HTML);
        b.nodes[HTML].children.push(b.body);
        b.stack = vec![HTML, b.body];
        b
    }

    fn alloc(&mut self, tag: &str, attrs: Vec<(String, String)>, parent: usize) -> usize {
        self.nodes.push(ArenaNode {
            tag: tag.to_string(),
            text: String::new(),
            attrs: attrs.into_iter().collect(),
            children: Vec::new(),
            parent,
        });
        self.nodes.len() - 1
    }

    fn current(&self) -> usize {
        *self.stack.last().expect("stack holds html")
    }

    fn tag(&self, i: usize) -> &str {
        &self.nodes[i].tag
    }

    fn cur_is(&self, set: &[&str]) -> bool {
        set.contains(&self.tag(self.current()))
    }

    fn merge_attrs(&mut self, target: usize, attrs: Vec<(String, String)>) {
        for (k, v) in attrs {
            self.nodes[target].attrs.entry(k).or_insert(v);
        }
    }

    fn append(&mut self, parent: usize, child: usize) {
        self.nodes[child].parent = parent;
        self.nodes[parent].children.push(child);
    }

    fn insert_before(&mut self, parent: usize, before: usize, child: usize) {
        self.nodes[child].parent = parent;
        let kids = &mut self.nodes[parent].children;
        let pos = kids.iter().position(|&k| k == before).unwrap_or(kids.len());
        kids.insert(pos, child);
    }

    fn add_text(&mut self, parent: usize, text: &str, before: Option<usize>) {
        let kids = &self.nodes[parent].children;
        let prev = match before {
            Some(b) => kids.iter().position(|&k| k == b).and_then(|p| p.checked_sub(1)).map(|p| kids[p]),
            None => kids.last().copied(),
        };
        if let Some(p) = prev.filter(|&p| self.nodes[p].tag == TEXT_TAG) {
            self.nodes[p].text.push_str(text);
            return;
        }
        let t = self.alloc(TEXT_TAG, Vec::new(), parent);
        self.nodes[t].text = text.to_string();
        match before {
            Some(b) => self.insert_before(parent, b, t),
            None => self.append(parent, t),
        }
    }

    fn in_scope(&self, tag: &str, extra_boundary: &[&str]) -> bool {
        self.in_scope_bounded(tag, SCOPE_BOUNDARY, extra_boundary)
    }

    fn in_table_scope(&self, tag: &str) -> bool {
        self.in_scope_bounded(tag, &["html", "table", "template"], &[])
    }

    fn in_scope_bounded(&self, tag: &str, boundary: &[&str], extra: &[&str]) -> bool {
        for &i in self.stack.iter().rev() {
            let t = self.tag(i);
            if t == tag {
                return true;
            }
            if boundary.contains(&t) || extra.contains(&t) {
                return false;
            }
        }
        false
    }

    fn pop_until(&mut self, tags: &[&str]) {
        while self.stack.len() > 2 {
            let i = self.stack.pop().expect("non-empty");
            if tags.contains(&self.tag(i)) {
                break;
            }
        }
    }

    fn close_p(&mut self) {
        if self.in_scope("p", &["button"]) {
            self.pop_until(&["p"]);
        }
    }

    /// Innermost open table, if the current insertion point is table context.
    fn foster_target(&self) -> Option<usize> {
        if !self.cur_is(TABLE_CONTEXT) {
            return None;
        }
        self.stack.iter().rev().copied().find(|&i| self.tag(i) == "table")
    }

    fn insert_element(&mut self, name: &str, attrs: Vec<(String, String)>, push: bool) -> usize {
        let parent = self.current();
        let el = self.alloc(name, attrs, parent);
        match self.foster_target().filter(|_| !IN_TABLE_OK.contains(&name)) {
            Some(table) => {
                let tp = self.nodes[table].parent;
                self.insert_before(tp, table, el);
            }
            None => self.append(parent, el),
        }
        if push {
            self.stack.push(el);
        }
        el
    }

    fn text(&mut self, text: String) {
        let cur = self.current();
        if RAW_TEXT.contains(&self.tag(cur)) {
            return self.add_text(cur, &text, None);
        }
        let blank = text.chars().all(char::is_whitespace);
        if !self.in_body {
            if blank {
                return;
            }
            self.in_body = true;
        }
        match self.foster_target() {
            Some(table) if !blank => {
                let tp = self.nodes[table].parent;
                self.add_text(tp, &text, Some(table));
            }
            _ => {
                let cur = self.current();
                self.add_text(cur, &text, None);
            }
        }
    }

    fn start(&mut self, name: String, attrs: Vec<(String, String)>, self_closing: bool) {
        let n = name.as_str();
        match n {
            "html" => return self.merge_attrs(HTML, attrs),
            "head" => return,
            "body" => {
                self.in_body = true;
                let body = self.body;
                return self.merge_attrs(body, attrs);
            }
            _ => {}
        }
        if !self.in_body {
            if HEAD_ONLY.contains(&n) {
                let head = self.head;
                let el = self.alloc(n, attrs, head);
                self.append(head, el);
                if RAW_TEXT.contains(&n) && !self_closing {
                    self.stack.push(el);
                }
                return;
            }
            self.in_body = true;
        }

        if CLOSES_P.contains(&n) {
            match n {
                "li" => self.close_list_item(&["li"], &["ol", "ul"]),
                "dd" | "dt" => self.close_list_item(&["dd", "dt"], &["dl"]),
                _ => {}
            }
            self.close_p();
            if HEADINGS.contains(&n) && self.cur_is(HEADINGS) {
                self.stack.pop();
            }
        }

        match n {
            "tr" if self.in_table_scope("table") => {
                if self.in_table_scope("td") || self.in_table_scope("th") {
                    self.pop_until(&["td", "th"]);
                }
                self.clear_to(&["table", "tbody", "thead", "tfoot"]);
                if self.cur_is(&["table"]) {
                    self.insert_element("tbody", Vec::new(), true);
                }
            }
            "td" | "th" if self.in_table_scope("table") => {
                if self.in_table_scope("td") || self.in_table_scope("th") {
                    self.pop_until(&["td", "th"]);
                }
                self.clear_to(&["table", "tbody", "thead", "tfoot", "tr"]);
                if self.cur_is(&["table"]) {
                    self.insert_element("tbody", Vec::new(), true);
                }
                if !self.cur_is(&["tr"]) {
                    self.insert_element("tr", Vec::new(), true);
                }
            }
            "tbody" | "thead" | "tfoot" | "caption" | "colgroup" if self.in_table_scope("table") => {
                if self.in_table_scope("td") || self.in_table_scope("th") {
                    self.pop_until(&["td", "th"]);
                }
                self.clear_to(&["table"]);
            }
            "a" => {
                if self.stack.iter().any(|&i| self.tag(i) == "a") {
                    self.pop_until(&["a"]);
                }
            }
            "option" | "optgroup" => {
                if self.cur_is(&["option"]) {
                    self.stack.pop();
                }
            }
            _ => {}
        }

        let void = VOID.contains(&n);
        self.insert_element(n, attrs, !(void || self_closing && !RAW_TEXT.contains(&n)));
    }

    fn clear_to(&mut self, stop: &[&str]) {
        while self.stack.len() > 2 && !self.cur_is(stop) {
            self.stack.pop();
        }
    }

    fn close_list_item(&mut self, items: &[&str], lists: &[&str]) {
        for depth in (0..self.stack.len()).rev() {
            let t = self.tag(self.stack[depth]);
            if items.contains(&t) {
                self.stack.truncate(depth.max(2));
                return;
            }
            if lists.contains(&t)
                || (SPECIAL.contains(&t) && !matches!(t, "address" | "div" | "p"))
            {
                return;
            }
        }
    }

    fn end(&mut self, name: String) {
        let n = name.as_str();
        match n {
            "html" | "body" | "head" => {}
            "br" => self.start(name, Vec::new(), false),
            "p" => {
                if self.in_scope("p", &["button"]) {
                    self.pop_until(&["p"]);
                } else {
                    self.in_body = true;
                    self.insert_element("p", Vec::new(), false);
                }
            }
            _ if HEADINGS.contains(&n) => {
                if HEADINGS.iter().any(|h| self.in_scope(h, &[])) {
                    self.pop_until(HEADINGS);
                }
            }
            "table" | "tbody" | "thead" | "tfoot" | "tr" => {
                if self.in_table_scope(n) {
                    self.pop_until(&[n]);
                }
            }
            "li" => {
                if self.in_scope(n, &["ol", "ul"]) {
                    self.pop_until(&[n]);
                }
            }
            _ if SPECIAL.contains(&n) => {
                if self.in_scope(n, &[]) {
                    self.pop_until(&[n]);
                }
            }
            _ => {
                for depth in (2..self.stack.len()).rev() {
                    let t = self.tag(self.stack[depth]);
                    if t == n {
                        self.stack.truncate(depth);
                        return;
                    }
                    if SPECIAL.contains(&t) {
                        return;
                    }
                }
            }
        }
    }

    fn into_tree(self) -> DomNode {
        fn build(nodes: &mut Vec<Option<ArenaNode>>, i: usize) -> DomNode {
            let n = nodes[i].take().expect("each arena node owned once");
            let children = n.children.iter().map(|&c| build(nodes, c)).collect();
            DomNode {
                tag: n.tag,
                children,
                text: n.text,
                attrs: n.attrs,
            }
        }
        let mut nodes: Vec<Option<ArenaNode>> = self.nodes.into_iter().map(Some).collect();
        build(&mut nodes, HTML)
    }
}

/// Parses `html` into a document rooted at `html`, which always has `head` and `body`.
pub fn parse_dom(html: &[u8]) -> Result<DomNode, DomError> {
    if html.is_empty() {
        return Err(DomError::EmptyDocument);
    }
    let src = String::from_utf8_lossy(html);
    let mut b = TreeBuilder::new();
    for tok in tokenize(&src) {
        match tok {
            Token::Text(t) => b.text(t),
            Token::Start {
                name,
                attrs,
                self_closing,
            } => b.start(name, attrs, self_closing),
            Token::End(name) => b.end(name),
        }
    }
    Ok(b.into_tree())
}
