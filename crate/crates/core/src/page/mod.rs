//! Page snapshots, element matching and the simulated browser.

mod browser;
mod fixture;
mod html;
mod matching;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use browser::{
    event_log_jsonl, BrowserBackend, EventDetail, EventRecord, FormField, SimulatedBrowser,
    StepError, StepErrorKind, StepOutcome,
};
pub use fixture::{FixtureError, FormActionOverride, SiteFixture};
pub use html::{parse_html, serialize_html};
pub use matching::{match_element, ElementMatch, MatchWeights};

/// A child slot in the document tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Element(usize),
    Text(String),
}

/// A parsed element. Elements live in the snapshot arena in document order;
/// `order_index` is the arena position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub tag: String,
    pub attributes: BTreeMap<String, String>,
    /// Visible descendant text, whitespace-collapsed and trimmed.
    pub text: String,
    pub children: Vec<Node>,
    pub parent: Option<usize>,
    pub order_index: usize,
    /// Current form value for `input`, `textarea` and `select`.
    pub value: Option<String>,
}

impl Element {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attributes.get(key).map(String::as_str)
    }

    pub fn class_tokens(&self) -> impl Iterator<Item = &str> {
        self.attr("class").unwrap_or_default().split_ascii_whitespace()
    }

    pub fn is_form_field(&self) -> bool {
        matches!(self.tag.as_str(), "input" | "textarea" | "select")
    }
}

/// A parsed page: the observation a skill is matched and executed against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSnapshot {
    url: String,
    roots: Vec<Node>,
    elements: Vec<Element>,
}

/// Collapses runs of ASCII whitespace to one space and trims.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_ascii_whitespace().collect::<Vec<_>>().join(" ")
}

impl PageSnapshot {
    pub(crate) fn from_parts(url: String, roots: Vec<Node>, mut elements: Vec<Element>) -> Self {
        // Children always follow their parent in the arena, so a reverse pass
        // sees every child's raw text before its parent.
        let mut raw = vec![String::new(); elements.len()];
        for i in (0..elements.len()).rev() {
            if html::INVISIBLE.contains(&elements[i].tag.as_str()) {
                continue;
            }
            let mut buf = String::new();
            for child in &elements[i].children {
                match child {
                    Node::Text(t) => buf.push_str(t),
                    Node::Element(c) => buf.push_str(&raw[*c]),
                }
            }
            raw[i] = buf;
        }
        for (el, raw) in elements.iter_mut().zip(&raw) {
            el.text = collapse_whitespace(raw);
        }
        for i in 0..elements.len() {
            elements[i].value = initial_value(&elements, i, &raw[i]);
        }
        Self {
            url,
            roots,
            elements,
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn roots(&self) -> &[Node] {
        &self.roots
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> Option<&Element> {
        self.elements.get(index)
    }

    pub(crate) fn element_mut(&mut self, index: usize) -> Option<&mut Element> {
        self.elements.get_mut(index)
    }

    /// Ancestors of `index`, nearest first.
    pub fn ancestors(&self, index: usize) -> impl Iterator<Item = &Element> {
        let mut cur = self.elements.get(index).and_then(|e| e.parent);
        std::iter::from_fn(move || {
            let i = cur?;
            cur = self.elements[i].parent;
            Some(&self.elements[i])
        })
    }

    /// All elements in the subtree rooted at `index` (excluding it), in
    /// document order.
    pub fn descendants(&self, index: usize) -> impl Iterator<Item = &Element> {
        self.elements[index + 1..]
            .iter()
            .take_while(move |e| self.is_ancestor(index, e.order_index))
    }

    fn is_ancestor(&self, ancestor: usize, mut index: usize) -> bool {
        while let Some(p) = self.elements[index].parent {
            if p == ancestor {
                return true;
            }
            index = p;
        }
        false
    }

    /// The nearest enclosing `form` element.
    pub fn enclosing_form(&self, index: usize) -> Option<&Element> {
        self.ancestors(index).find(|e| e.tag == "form")
    }
}

pub(crate) fn option_value(option: &Element) -> String {
    option
        .attr("value")
        .map(str::to_owned)
        .unwrap_or_else(|| option.text.clone())
}

fn initial_value(elements: &[Element], i: usize, raw_text: &str) -> Option<String> {
    let el = &elements[i];
    match el.tag.as_str() {
        "input" => Some(el.attr("value").unwrap_or_default().to_owned()),
        "textarea" => Some(raw_text.to_owned()),
        "select" => {
            let options: Vec<&Element> = elements[i + 1..]
                .iter()
                .take_while(|e| {
                    let mut p = e.parent;
                    while let Some(pi) = p {
                        if pi == i {
                            return true;
                        }
                        p = elements[pi].parent;
                    }
                    false
                })
                .filter(|e| e.tag == "option")
                .collect();
            let chosen = options
                .iter()
                .find(|o| o.attributes.contains_key("selected"))
                .or(options.first());
            Some(chosen.map(|o| option_value(o)).unwrap_or_default())
        }
        _ => None,
    }
}
