//! Heuristic resolution of an [`ElementRef`] against a page.

use serde::{Deserialize, Serialize};

use super::{collapse_whitespace, Element, PageSnapshot};
use crate::skill::ElementRef;

/// Scoring constants for [`match_element`]. Only elements whose tag equals
/// the reference's `tag_name` are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchWeights {
    pub id: u32,
    pub name: u32,
    /// Per exact match of `aria-label`, `placeholder`, `type` or `href`.
    pub secondary_attr: u32,
    /// Any shared class token.
    pub class_overlap: u32,
    pub text_equal: u32,
    pub text_contains: u32,
    /// Minimum score for a match.
    pub threshold: u32,
}

impl Default for MatchWeights {
    fn default() -> Self {
        Self {
            id: 4,
            name: 3,
            secondary_attr: 2,
            class_overlap: 1,
            text_equal: 3,
            text_contains: 1,
            threshold: 3,
        }
    }
}

const SECONDARY: [&str; 4] = ["aria-label", "placeholder", "type", "href"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementMatch {
    pub order_index: usize,
    pub score: u32,
}

impl MatchWeights {
    /// Score of `element` against `reference`, ignoring the tag gate.
    pub fn score(&self, reference: &ElementRef, element: &Element) -> u32 {
        let mut score = 0;
        let same = |key: &str| match (reference.attr(key), element.attr(key)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        if same("id") {
            score += self.id;
        }
        if same("name") {
            score += self.name;
        }
        score += SECONDARY.iter().filter(|k| same(k)).count() as u32 * self.secondary_attr;
        if let Some(ref_class) = reference.attr("class") {
            let overlap = ref_class
                .split_ascii_whitespace()
                .any(|t| element.class_tokens().any(|e| e == t));
            if overlap {
                score += self.class_overlap;
            }
        }
        if let Some(text) = reference.text_content.as_deref() {
            let want = collapse_whitespace(text);
            if !want.is_empty() {
                if element.text == want {
                    score += self.text_equal;
                } else if element.text.to_lowercase().contains(&want.to_lowercase()) {
                    score += self.text_contains;
                }
            }
        }
        score
    }
}

/// Best-scoring element for `reference`, or `None` when no element of the
/// right tag reaches the threshold. Ties go to the earliest element.
pub fn match_element(
    page: &PageSnapshot,
    reference: &ElementRef,
    weights: &MatchWeights,
) -> Option<ElementMatch> {
    let mut best: Option<ElementMatch> = None;
    for el in page.elements().iter().filter(|e| e.tag == reference.tag_name) {
        let score = weights.score(reference, el);
        if score < weights.threshold {
            continue;
        }
        if best.is_none_or(|b| score > b.score) {
            best = Some(ElementMatch {
                order_index: el.order_index,
                score,
            });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::page::parse_html;

    fn search_ref() -> ElementRef {
        ElementRef::new("input")
            .with_attr("id", "search")
            .with_attr("name", "q")
            .with_attr("placeholder", "Search entire store here...")
    }

    #[test]
    fn reference_search_box_scores_nine() {
        let page = parse_html(
            r#"<form><input id="search" name="q" placeholder="Search entire store here..." class="input-text"><button type="submit" aria-label="Search">Search</button></form>"#,
            "u",
        );
        let m = match_element(&page, &search_ref(), &MatchWeights::default()).unwrap();
        assert_eq!(m, ElementMatch { order_index: 1, score: 9 });
    }

    #[test]
    fn tag_gate() {
        let page = parse_html(r#"<div id="search" name="q"></div>"#, "u");
        assert!(match_element(&page, &search_ref(), &MatchWeights::default()).is_none());
    }

    #[test]
    fn tie_goes_to_earlier_element() {
        let page = parse_html("<button>Go</button><button>Go</button>", "u");
        let r = ElementRef::new("button").with_text("Go");
        let m = match_element(&page, &r, &MatchWeights::default()).unwrap();
        assert_eq!(m.order_index, 0);
    }

    #[test]
    fn below_threshold_is_no_match() {
        let page = parse_html(r#"<button type="submit">Subscribe</button>"#, "u");
        let r = ElementRef::new("button")
            .with_text("Search")
            .with_attr("type", "submit")
            .with_attr("aria-label", "Search");
        assert!(match_element(&page, &r, &MatchWeights::default()).is_none());
    }

    #[test]
    fn text_rules() {
        let w = MatchWeights::default();
        let page = parse_html("<a class='nav big'>Sign In Now</a>", "u");
        let el = &page.elements()[0];
        assert_eq!(w.score(&ElementRef::new("a").with_text("Sign In Now"), el), 3);
        assert_eq!(w.score(&ElementRef::new("a").with_text("sign in"), el), 1);
        assert_eq!(w.score(&ElementRef::new("a").with_text("sign  in  now "), el), 1);
        assert_eq!(w.score(&ElementRef::new("a").with_attr("class", "big other"), el), 1);
    }
}
