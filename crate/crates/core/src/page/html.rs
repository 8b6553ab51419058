//! Tag-soup tolerant HTML parsing into [`PageSnapshot`] arenas.
//!
//! Not a full HTML5 tree builder: it covers void elements, raw-text
//! elements, the common implied end tags (`p`, `li`, `option`, table cells,
//! definition lists), stray end tags and unclosed elements at EOF. Comments,
//! doctypes and processing instructions are dropped.

use std::collections::BTreeMap;

use super::{Element, Node, PageSnapshot};

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

const RAW_TEXT: &[&str] = &["script", "style", "textarea", "title"];

/// Elements whose text is not visible.
pub(crate) const INVISIBLE: &[&str] = &["script", "style", "template", "head", "noscript"];

const CLOSES_P: &[&str] = &[
    "address", "article", "aside", "blockquote", "div", "dl", "fieldset", "footer", "form", "h1",
    "h2", "h3", "h4", "h5", "h6", "header", "hr", "main", "menu", "nav", "ol", "p", "pre",
    "section", "table", "ul",
];

pub(crate) fn is_void(tag: &str) -> bool {
    VOID.contains(&tag)
}

pub(crate) fn is_raw_text(tag: &str) -> bool {
    RAW_TEXT.contains(&tag)
}

enum Token {
    Text(String),
    Start {
        name: String,
        attrs: BTreeMap<String, String>,
        self_closing: bool,
    },
    End(String),
}

struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
    raw_until: Option<String>,
}

impl<'a> Tokenizer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            raw_until: None,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn next_token(&mut self) -> Option<Token> {
        loop {
            if self.pos >= self.src.len() {
                return None;
            }
            if let Some(tag) = self.raw_until.take() {
                let rest = self.rest();
                let lower = rest.to_ascii_lowercase();
                let close = format!("</{tag}");
                let end = lower.find(&close).unwrap_or(rest.len());
                let body = &rest[..end];
                self.pos += end;
                if !body.is_empty() {
                    let text = if tag == "textarea" || tag == "title" {
                        decode_entities(body)
                    } else {
                        body.to_owned()
                    };
                    return Some(Token::Text(text));
                }
                continue;
            }
            let rest = self.rest();
            if let Some(stripped) = rest.strip_prefix("<!--") {
                let end = stripped.find("-->").map(|i| i + 3).unwrap_or(stripped.len());
                self.pos += 4 + end;
                continue;
            }
            if rest.starts_with("<!") || rest.starts_with("<?") {
                let end = rest.find('>').map(|i| i + 1).unwrap_or(rest.len());
                self.pos += end;
                continue;
            }
            if rest.starts_with("</") {
                let after = &rest[2..];
                if after.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    let end = after.find('>').map(|i| i + 1).unwrap_or(after.len());
                    let name: String = after[..end]
                        .chars()
                        .take_while(|c| c.is_ascii_alphanumeric() || *c == '-')
                        .collect::<String>()
                        .to_ascii_lowercase();
                    self.pos += 2 + end;
                    return Some(Token::End(name));
                }
            }
            if rest.starts_with('<') && rest[1..].starts_with(|c: char| c.is_ascii_alphabetic()) {
                return Some(self.start_tag());
            }
            // Text up to the next plausible markup.
            let mut end = rest.len();
            let mut search = usize::from(rest.starts_with('<'));
            while let Some(i) = rest[search..].find('<') {
                let at = search + i;
                let tail = &rest[at + 1..];
                if tail.starts_with(|c: char| c.is_ascii_alphabetic() || c == '/' || c == '!' || c == '?') {
                    end = at;
                    break;
                }
                search = at + 1;
            }
            let text = &rest[..end];
            self.pos += end;
            return Some(Token::Text(decode_entities(text)));
        }
    }

    fn start_tag(&mut self) -> Token {
        let bytes = self.src.as_bytes();
        let mut i = self.pos + 1;
        let name_start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' && bytes[i] != b'/' {
            i += 1;
        }
        let name = self.src[name_start..i].to_ascii_lowercase();
        let mut attrs = BTreeMap::new();
        let mut self_closing = false;
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i >= bytes.len() {
                break;
            }
            match bytes[i] {
                b'>' => {
                    i += 1;
                    break;
                }
                b'/' => {
                    i += 1;
                    if i < bytes.len() && bytes[i] == b'>' {
                        self_closing = true;
                        i += 1;
                        break;
                    }
                    continue;
                }
                _ => {}
            }
            let an_start = i;
            while i < bytes.len()
                && !bytes[i].is_ascii_whitespace()
                && !matches!(bytes[i], b'>' | b'=' | b'/')
            {
                i += 1;
            }
            if an_start == i {
                // Lone '=' or similar junk.
                i += 1;
                continue;
            }
            let attr_name = self.src[an_start..i].to_ascii_lowercase();
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            let mut value = String::new();
            if j < bytes.len() && bytes[j] == b'=' {
                j += 1;
                while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'"' || bytes[j] == b'\'') {
                    let quote = bytes[j];
                    let v_start = j + 1;
                    let v_end = self.src[v_start..]
                        .bytes()
                        .position(|b| b == quote)
                        .map(|p| v_start + p)
                        .unwrap_or(bytes.len());
                    value = decode_entities(&self.src[v_start..v_end]);
                    i = (v_end + 1).min(bytes.len());
                } else {
                    let v_start = j;
                    while j < bytes.len() && !bytes[j].is_ascii_whitespace() && bytes[j] != b'>' {
                        j += 1;
                    }
                    value = decode_entities(&self.src[v_start..j]);
                    i = j;
                }
            }
            attrs.entry(attr_name).or_insert(value);
        }
        self.pos = i;
        if is_raw_text(&name) && !self_closing {
            self.raw_until = Some(name.clone());
        }
        Token::Start {
            name,
            attrs,
            self_closing,
        }
    }
}

fn decode_entities(text: &str) -> String {
    if !text.contains('&') {
        return text.to_owned();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        let semi = tail[1..].find(';').map(|p| p + 1).filter(|&p| p <= 12);
        let decoded = semi.and_then(|p| {
            let ent = &tail[1..p];
            let ch = if let Some(num) = ent.strip_prefix("#x").or_else(|| ent.strip_prefix("#X")) {
                u32::from_str_radix(num, 16).ok().and_then(char::from_u32)
            } else if let Some(num) = ent.strip_prefix('#') {
                num.parse::<u32>().ok().and_then(char::from_u32)
            } else {
                named_entity(ent)
            };
            ch.map(|c| (c, p + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &tail[len..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn named_entity(name: &str) -> Option<char> {
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "copy" => '©',
        "reg" => '®',
        "hellip" => '…',
        "mdash" => '—',
        "ndash" => '–',
        "laquo" => '«',
        "raquo" => '»',
        "times" => '×',
        _ => return None,
    })
}

/// Implied end tags: which open elements a new `tag` closes, and the
/// elements that bound the search.
fn implied_close(tag: &str) -> Option<(&'static [&'static str], &'static [&'static str])> {
    const SCOPE: &[&str] = &["table", "ul", "ol", "select", "dl", "div", "form", "body", "html"];
    match tag {
        "li" => Some((&["li"], &["ul", "ol"])),
        "option" => Some((&["option"], &["select", "datalist", "optgroup"])),
        "optgroup" => Some((&["option", "optgroup"], &["select"])),
        "dt" | "dd" => Some((&["dt", "dd"], &["dl"])),
        "tr" => Some((&["tr", "td", "th"], &["table", "tbody", "thead", "tfoot"])),
        "td" | "th" => Some((&["td", "th"], &["tr", "table"])),
        "tbody" | "thead" | "tfoot" => Some((&["tbody", "thead", "tfoot", "tr", "td", "th"], &["table"])),
        t if CLOSES_P.contains(&t) => Some((&["p"], SCOPE)),
        _ => None,
    }
}

struct Builder {
    elements: Vec<Element>,
    roots: Vec<Node>,
    stack: Vec<usize>,
}

impl Builder {
    fn push_node(&mut self, node: Node) {
        let children = match self.stack.last() {
            Some(&parent) => &mut self.elements[parent].children,
            None => &mut self.roots,
        };
        if let (Node::Text(t), Some(Node::Text(prev))) = (&node, children.last_mut()) {
            prev.push_str(t);
            return;
        }
        children.push(node);
    }

    fn open(&mut self, tag: String, attrs: BTreeMap<String, String>, self_closing: bool) {
        if let Some((closes, bounds)) = implied_close(&tag) {
            for depth in (0..self.stack.len()).rev() {
                let t = self.elements[self.stack[depth]].tag.as_str();
                if bounds.contains(&t) {
                    break;
                }
                if closes.contains(&t) {
                    self.stack.truncate(depth);
                    break;
                }
            }
        }
        let index = self.elements.len();
        self.elements.push(Element {
            tag: tag.clone(),
            attributes: attrs,
            text: String::new(),
            children: Vec::new(),
            parent: self.stack.last().copied(),
            order_index: index,
            value: None,
        });
        self.push_node(Node::Element(index));
        if !is_void(&tag) && !self_closing {
            self.stack.push(index);
        }
    }

    fn close(&mut self, tag: &str) {
        if let Some(depth) = self.stack.iter().rposition(|&i| self.elements[i].tag == tag) {
            self.stack.truncate(depth);
        }
    }
}

/// Parses `source` into a snapshot for `url`. Never fails; empty input yields
/// an empty document.
pub fn parse_html(source: &str, url: &str) -> PageSnapshot {
    let mut builder = Builder {
        elements: Vec::new(),
        roots: Vec::new(),
        stack: Vec::new(),
    };
    let mut tokens = Tokenizer::new(source);
    while let Some(tok) = tokens.next_token() {
        match tok {
            Token::Text(t) => builder.push_node(Node::Text(t)),
            Token::Start {
                name,
                attrs,
                self_closing,
            } => builder.open(name, attrs, self_closing),
            Token::End(name) => builder.close(&name),
        }
    }
    PageSnapshot::from_parts(url.to_owned(), builder.roots, builder.elements)
}

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
}

fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

/// Serializes the document back to HTML. Parsing the output yields a
/// structurally equal snapshot.
pub fn serialize_html(page: &PageSnapshot) -> String {
    let mut out = String::new();
    for node in page.roots() {
        write_node(page, node, None, &mut out);
    }
    out
}

fn write_node(page: &PageSnapshot, node: &Node, parent_tag: Option<&str>, out: &mut String) {
    match node {
        Node::Text(t) => {
            if parent_tag.is_some_and(|p| is_raw_text(p) && p != "textarea" && p != "title") {
                out.push_str(t);
            } else {
                escape_text(t, out);
            }
        }
        Node::Element(i) => {
            let el = &page.elements()[*i];
            out.push('<');
            out.push_str(&el.tag);
            for (k, v) in &el.attributes {
                out.push(' ');
                out.push_str(k);
                out.push_str("=\"");
                escape_attr(v, out);
                out.push('"');
            }
            out.push('>');
            if is_void(&el.tag) {
                return;
            }
            for child in &el.children {
                write_node(page, child, Some(&el.tag), out);
            }
            out.push_str("</");
            out.push_str(&el.tag);
            out.push('>');
        }
    }
}
