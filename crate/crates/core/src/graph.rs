//! URL-pattern skill graph.
//!
//! Nodes are generalized URL patterns such as `shopping/catalogsearch/*`; each
//! node holds the skills applicable on pages matching it. Retrieval for a
//! page URL takes the exact-match node first, then every matching wildcard
//! node by descending specificity, merges their skills (first occurrence of a
//! name wins), optionally drops skills whose target elements are absent from
//! the page, and truncates to the retrieval cap.
//!
//! `*` has full glob semantics: it matches any character sequence, including
//! `/`. Path structure is expressed through specificity only.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deploy::filter_by_presence;
use crate::page::PageSnapshot;
use crate::skill::Skill;

/// Default number of skills surfaced per page.
pub const DEFAULT_RETRIEVAL_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UrlError {
    #[error("unparseable URL {0:?}")]
    Unparseable(String),
    #[error("empty URL pattern")]
    EmptyPattern,
    #[error("URL pattern {0:?} must not contain a scheme")]
    PatternScheme(String),
    #[error("URL pattern {0:?} must not contain a query string or fragment")]
    PatternQuery(String),
}

/// A generalized URL pattern used as a graph node key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct UrlPattern {
    pattern: String,
    specificity: usize,
}

impl UrlPattern {
    pub fn new(pattern: impl Into<String>) -> Result<Self, UrlError> {
        let pattern = pattern.into();
        if pattern.is_empty() {
            return Err(UrlError::EmptyPattern);
        }
        if pattern.contains("://") {
            return Err(UrlError::PatternScheme(pattern));
        }
        if pattern.contains('?') || pattern.contains('#') {
            return Err(UrlError::PatternQuery(pattern));
        }
        let specificity = specificity(&pattern);
        Ok(Self {
            pattern,
            specificity,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.pattern
    }

    /// Number of `/`-separated segments containing no `*`.
    pub fn specificity(&self) -> usize {
        self.specificity
    }

    pub fn is_wildcard(&self) -> bool {
        self.pattern.contains('*')
    }

    pub fn matches(&self, normalized: &str) -> bool {
        pattern_matches(&self.pattern, normalized)
    }
}

impl fmt::Display for UrlPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern)
    }
}

impl TryFrom<String> for UrlPattern {
    type Error = UrlError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<UrlPattern> for String {
    fn from(p: UrlPattern) -> Self {
        p.pattern
    }
}

fn specificity(pattern: &str) -> usize {
    pattern.split('/').filter(|seg| !seg.contains('*')).count()
}

/// Host (and port) to site-prefix mapping, e.g. `localhost:7770 -> shopping`.
pub type SiteAliases = BTreeMap<String, String>;

/// Normalizes a page URL into the path form graph patterns are written in.
///
/// The scheme, query string, fragment and trailing slash are dropped and the
/// host is lowercased. When `host[:port]` (or the bare host) has an alias the
/// host is replaced by that prefix. Inputs without a scheme are treated as
/// already in `host/path` form; a leading `/` marks a host-relative path.
pub fn normalize_url(raw: &str, aliases: &SiteAliases) -> Result<String, UrlError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(UrlError::Unparseable(raw.into()));
    }

    if trimmed.contains("://") {
        let url = url::Url::parse(trimmed).map_err(|_| UrlError::Unparseable(raw.into()))?;
        let host = url
            .host_str()
            .ok_or_else(|| UrlError::Unparseable(raw.into()))?
            .to_ascii_lowercase();
        let host_port = match url.port() {
            Some(p) => format!("{host}:{p}"),
            None => host.clone(),
        };
        let prefix = aliases
            .get(&host_port)
            .or_else(|| aliases.get(&host))
            .cloned()
            .unwrap_or(host_port);
        let path = url.path().trim_end_matches('/');
        return Ok(join_prefix(&prefix, path));
    }

    let without_fragment = trimmed.split('#').next().unwrap_or_default();
    let without_query = without_fragment.split('?').next().unwrap_or_default();
    if let Some(rel) = without_query.strip_prefix('/') {
        let rel = rel.trim_start_matches('/').trim_end_matches('/');
        if rel.is_empty() {
            return Err(UrlError::Unparseable(raw.into()));
        }
        return Ok(rel.to_owned());
    }
    let body = without_query.trim_end_matches('/');
    let (host, path) = match body.find('/') {
        Some(i) => body.split_at(i),
        None => (body, ""),
    };
    if host.is_empty() {
        return Err(UrlError::Unparseable(raw.into()));
    }
    let host = host.to_ascii_lowercase();
    let bare = host.split(':').next().unwrap_or_default();
    let prefix = aliases
        .get(&host)
        .or_else(|| aliases.get(bare))
        .cloned()
        .unwrap_or(host);
    Ok(join_prefix(&prefix, path))
}

fn join_prefix(prefix: &str, path: &str) -> String {
    if path.is_empty() || path == "/" {
        prefix.to_owned()
    } else if path.starts_with('/') {
        format!("{prefix}{path}")
    } else {
        format!("{prefix}/{path}")
    }
}

/// Whole-string glob match where `*` matches any (possibly empty) sequence,
/// separators included. Case-sensitive.
pub fn pattern_matches(pattern: &str, normalized: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let s: Vec<char> = normalized.chars().collect();
    let (mut pi, mut si) = (0usize, 0usize);
    // Position of the last `*` seen and the input index it is currently
    // assumed to have consumed up to.
    let mut backtrack: Option<(usize, usize)> = None;
    while si < s.len() {
        if pi < p.len() && p[pi] == '*' {
            backtrack = Some((pi, si));
            pi += 1;
        } else if pi < p.len() && p[pi] == s[si] {
            pi += 1;
            si += 1;
        } else if let Some((star, consumed)) = backtrack {
            pi = star + 1;
            si = consumed + 1;
            backtrack = Some((star, consumed + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// Skills grouped by generalized URL pattern.
#[derive(Debug, Clone)]
pub struct SkillGraph {
    nodes: BTreeMap<UrlPattern, Vec<Skill>>,
    aliases: SiteAliases,
    retrieval_cap: usize,
}

impl Default for SkillGraph {
    fn default() -> Self {
        Self::new(SiteAliases::new())
    }
}

/// Aggregate shape of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub skill_count: usize,
    pub node_count: usize,
    pub mean_skills_per_node: f64,
}

impl SkillGraph {
    pub fn new(aliases: SiteAliases) -> Self {
        Self {
            nodes: BTreeMap::new(),
            aliases,
            retrieval_cap: DEFAULT_RETRIEVAL_CAP,
        }
    }

    pub fn with_retrieval_cap(mut self, cap: usize) -> Self {
        assert!(cap > 0, "retrieval cap must be positive");
        self.retrieval_cap = cap;
        self
    }

    /// Builds a graph by inserting `skills` in order.
    pub fn from_skills<'a>(
        skills: impl IntoIterator<Item = &'a Skill>,
        aliases: SiteAliases,
    ) -> Self {
        let mut graph = Self::new(aliases);
        for s in skills {
            graph.insert(s.clone());
        }
        graph
    }

    pub fn aliases(&self) -> &SiteAliases {
        &self.aliases
    }

    pub fn retrieval_cap(&self) -> usize {
        self.retrieval_cap
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&UrlPattern, &[Skill])> {
        self.nodes.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Adds `skill` to the node keyed by its `meta_url`, replacing a
    /// same-named skill already in that node.
    pub fn insert(&mut self, skill: Skill) {
        // meta_url is validated as a pattern when the skill is parsed.
        let key = UrlPattern::new(skill.meta_url.clone()).expect("validated meta_url");
        let node = self.nodes.entry(key).or_default();
        match node.iter_mut().find(|s| s.name == skill.name) {
            Some(slot) => *slot = skill,
            None => node.push(skill),
        }
    }

    /// Patterns matching `normalized` in priority order: the exact node
    /// first, then wildcard nodes by descending specificity with ties broken
    /// by pattern text.
    pub fn matching_nodes(&self, normalized: &str) -> Vec<&UrlPattern> {
        let mut exact = None;
        let mut wildcard = Vec::new();
        for pattern in self.nodes.keys() {
            if pattern.as_str() == normalized {
                exact = Some(pattern);
            } else if pattern.is_wildcard() && pattern.matches(normalized) {
                wildcard.push(pattern);
            }
        }
        wildcard.sort_by(|a, b| {
            b.specificity()
                .cmp(&a.specificity())
                .then_with(|| a.as_str().cmp(b.as_str()))
        });
        exact.into_iter().chain(wildcard).collect()
    }

    /// Context-aware retrieval for the page at `current_url`.
    pub fn retrieve(
        &self,
        current_url: &str,
        page: Option<&PageSnapshot>,
    ) -> Result<Vec<&Skill>, UrlError> {
        let normalized = normalize_url(current_url, &self.aliases)?;
        let mut merged: Vec<&Skill> = Vec::new();
        for pattern in self.matching_nodes(&normalized) {
            for skill in &self.nodes[pattern] {
                if !merged.iter().any(|s| s.name == skill.name) {
                    merged.push(skill);
                }
            }
        }
        if let Some(page) = page {
            merged = filter_by_presence(merged, page);
        }
        merged.truncate(self.retrieval_cap);
        Ok(merged)
    }

    pub fn stats(&self) -> GraphStats {
        let skill_count: usize = self.nodes.values().map(Vec::len).sum();
        let node_count = self.nodes.len();
        let mean_skills_per_node = if node_count == 0 {
            0.0
        } else {
            skill_count as f64 / node_count as f64
        };
        GraphStats {
            skill_count,
            node_count,
            mean_skills_per_node,
        }
    }
}

/// Graph-free retrieval used when the skill graph is ablated: every skill is
/// a candidate, ranked by element presence on `page` (present first) and
/// then by name, truncated to `cap`.
pub fn retrieve_flat<'a>(
    skills: impl IntoIterator<Item = &'a Skill>,
    page: Option<&PageSnapshot>,
    cap: usize,
) -> Vec<&'a Skill> {
    let mut ranked: Vec<(bool, &Skill)> = skills
        .into_iter()
        .map(|s| {
            let present = page.is_none_or(|p| !filter_by_presence(vec![s], p).is_empty());
            (present, s)
        })
        .collect();
    ranked.sort_by(|(pa, a), (pb, b)| pb.cmp(pa).then_with(|| a.name.cmp(&b.name)));
    ranked.dedup_by(|(_, a), (_, b)| a.name == b.name);
    ranked.into_iter().map(|(_, s)| s).take(cap).collect()
}
