//! Closed-world site fixtures backing the simulated browser.
//!
//! A fixture directory holds UTF-8 HTML files and a `sitemap.json`:
//!
//! ```json
//! {
//!   "pages": {"http://shop.test/": "home.html"},
//!   "form_actions": [{"page": "http://shop.test/", "form_id": "search", "action": "http://shop.test/result/"}],
//!   "external": ["https://help.example/"]
//! }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use super::{parse_html, PageSnapshot};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid sitemap {path}: {source}")]
    Sitemap {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid page URL {0:?}")]
    BadUrl(String),
}

/// Replaces the submit target of a form on a given page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormActionOverride {
    pub page: String,
    /// `id` of the form; `None` applies to every form on the page.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form_id: Option<String>,
    pub action: String,
}

#[derive(Debug, Deserialize)]
struct Sitemap {
    pages: BTreeMap<String, String>,
    #[serde(default)]
    form_actions: Vec<FormActionOverride>,
    #[serde(default)]
    external: Vec<String>,
}

/// A set of pages keyed by canonical absolute URL.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiteFixture {
    pages: BTreeMap<String, String>,
    form_actions: Vec<FormActionOverride>,
    external: Vec<String>,
}

fn canonical(url: &str) -> Option<Url> {
    Url::parse(url).ok()
}

impl SiteFixture {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a page. The URL must be absolute.
    pub fn with_page(mut self, url: &str, html: impl Into<String>) -> Result<Self, FixtureError> {
        let key = canonical(url).ok_or_else(|| FixtureError::BadUrl(url.into()))?;
        self.pages.insert(key.to_string(), html.into());
        Ok(self)
    }

    pub fn with_form_action(mut self, ov: FormActionOverride) -> Self {
        self.form_actions.push(ov);
        self
    }

    pub fn with_external(mut self, prefix: impl Into<String>) -> Self {
        self.external.push(prefix.into());
        self
    }

    pub fn load(dir: &Path) -> Result<Self, FixtureError> {
        let map_path = dir.join("sitemap.json");
        let text = std::fs::read_to_string(&map_path).map_err(|source| FixtureError::Io {
            path: map_path.clone(),
            source,
        })?;
        let sitemap: Sitemap = serde_json::from_str(&text).map_err(|source| FixtureError::Sitemap {
            path: map_path.clone(),
            source,
        })?;
        let mut fixture = SiteFixture {
            form_actions: sitemap.form_actions,
            external: sitemap.external,
            ..Default::default()
        };
        for (url, file) in sitemap.pages {
            let path = dir.join(&file);
            let html = std::fs::read_to_string(&path)
                .map_err(|source| FixtureError::Io { path, source })?;
            fixture = fixture.with_page(&url, html)?;
        }
        Ok(fixture)
    }

    pub fn page_urls(&self) -> impl Iterator<Item = &str> {
        self.pages.keys().map(String::as_str)
    }

    /// The page key serving `url`: an exact match, else the URL without its
    /// query and fragment, else with the trailing slash toggled.
    pub fn resolve(&self, url: &str) -> Option<&str> {
        let parsed = canonical(url)?;
        let exact = parsed.to_string();
        if let Some((k, _)) = self.pages.get_key_value(&exact) {
            return Some(k);
        }
        let mut bare = parsed;
        bare.set_query(None);
        bare.set_fragment(None);
        let bare = bare.to_string();
        let toggled = match bare.strip_suffix('/') {
            Some(s) => s.to_owned(),
            None => format!("{bare}/"),
        };
        [bare, toggled]
            .into_iter()
            .find_map(|k| self.pages.get_key_value(&k).map(|(k, _)| k.as_str()))
    }

    pub fn html(&self, page_key: &str) -> Option<&str> {
        self.pages.get(page_key).map(String::as_str)
    }

    /// Parses the page serving `url`. The snapshot keeps the requested URL.
    pub fn snapshot(&self, url: &str) -> Option<PageSnapshot> {
        let key = self.resolve(url)?;
        let display = canonical(url).map(|u| u.to_string()).unwrap_or_else(|| url.into());
        Some(parse_html(&self.pages[key], &display))
    }

    pub fn is_external(&self, url: &str) -> bool {
        self.external.iter().any(|p| url.starts_with(p.as_str()))
    }

    pub fn form_action_override(&self, page_url: &str, form_id: Option<&str>) -> Option<&str> {
        let page_key = self.resolve(page_url)?;
        self.form_actions
            .iter()
            .filter(|o| self.resolve(&o.page) == Some(page_key))
            .find(|o| o.form_id.is_none() || o.form_id.as_deref() == form_id)
            .map(|o| o.action.as_str())
    }

    /// Anchor targets per page, resolved to absolute URLs.
    pub fn link_map(&self) -> BTreeMap<String, Vec<String>> {
        self.pages
            .keys()
            .map(|page| {
                let snap = parse_html(&self.pages[page], page);
                let base = Url::parse(page).expect("page keys are absolute");
                let links = snap
                    .elements()
                    .iter()
                    .filter(|e| e.tag == "a")
                    .filter_map(|e| e.attr("href"))
                    .filter(|h| !h.starts_with('#') && !h.starts_with("javascript:"))
                    .filter_map(|h| base.join(h).ok())
                    .map(|u| u.to_string())
                    .collect();
                (page.clone(), links)
            })
            .collect()
    }

    /// Links that resolve neither to a fixture page nor to an external prefix.
    pub fn dangling_links(&self) -> Vec<(String, String)> {
        self.link_map()
            .into_iter()
            .flat_map(|(page, links)| links.into_iter().map(move |l| (page.clone(), l)))
            .filter(|(_, l)| self.resolve(l).is_none() && !self.is_external(l))
            .collect()
    }
}
