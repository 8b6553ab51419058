//! Browser backend interface and the deterministic simulated implementation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use super::{collapse_whitespace, match_element, option_value, MatchWeights, PageSnapshot, SiteFixture};
use crate::skill::{placeholders, ActionStep, ActionType};

/// Machine-readable failure class of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepErrorKind {
    /// The step's element reference resolves to nothing on the page.
    NoMatch,
    /// Navigation target outside the known site.
    UnknownTarget,
    /// No `<option>` with the requested visible text.
    OptionNotFound,
    /// Typing into or selecting on an element that cannot hold a value.
    NotEditable,
    /// Missing or malformed step params, including unresolved placeholders.
    InvalidParam,
    /// No page is loaded.
    NoPage,
}

impl StepErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepErrorKind::NoMatch => "no-match",
            StepErrorKind::UnknownTarget => "unknown-target",
            StepErrorKind::OptionNotFound => "option-not-found",
            StepErrorKind::NotEditable => "not-editable",
            StepErrorKind::InvalidParam => "invalid-param",
            StepErrorKind::NoPage => "no-page",
        }
    }
}

impl std::fmt::Display for StepErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("step {step_index}: {kind}: {message}")]
pub struct StepError {
    pub step_index: usize,
    pub kind: StepErrorKind,
    pub message: String,
}

/// Result of applying one action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Ok { page_changed: bool },
    Error(StepError),
}

impl StepOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, StepOutcome::Ok { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormField {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventDetail {
    /// Click with no navigation effect.
    Click,
    FollowLink { url: String },
    Submit {
        action: String,
        method: String,
        fields: Vec<FormField>,
        url: String,
    },
    Input { value: String },
    Select { text: String, value: String },
    Scroll { direction: String, pages: f64, offset: f64 },
    Keys { keys: String },
    Navigate { url: String, new_tab: bool },
    /// Navigation to a URL flagged external by the fixture; the page stays.
    External { url: String },
    Wait { seconds: f64, clock: f64 },
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub step_index: usize,
    pub action_type: ActionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_order_index: Option<usize>,
    pub detail: EventDetail,
}

impl EventRecord {
    pub fn submitted_field(&self, name: &str) -> Option<&str> {
        match &self.detail {
            EventDetail::Submit { fields, .. } => fields
                .iter()
                .find(|f| f.name == name)
                .map(|f| f.value.as_str()),
            _ => None,
        }
    }
}

/// Serializes events as line-delimited JSON.
pub fn event_log_jsonl(events: &[EventRecord]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
        .collect()
}

/// A browser session that applies resolved action steps one at a time.
pub trait BrowserBackend {
    fn load(&mut self, url: &str) -> Result<PageSnapshot, StepError>;
    /// Applies a fully substituted step.
    fn apply(&mut self, step_index: usize, step: &ActionStep) -> StepOutcome;
    /// Copy of the current page.
    fn current(&self) -> Option<PageSnapshot>;
    fn events(&self) -> &[EventRecord];
}

/// Deterministic browser over a [`SiteFixture`].
#[derive(Debug, Clone)]
pub struct SimulatedBrowser {
    fixture: Arc<SiteFixture>,
    weights: MatchWeights,
    page: Option<PageSnapshot>,
    focus: Option<usize>,
    scroll_y: f64,
    scroll_x: f64,
    clock: f64,
    events: Vec<EventRecord>,
}

type StepResult = Result<bool, (StepErrorKind, String)>;

impl SimulatedBrowser {
    pub fn new(fixture: Arc<SiteFixture>) -> Self {
        Self::with_weights(fixture, MatchWeights::default())
    }

    pub fn with_weights(fixture: Arc<SiteFixture>, weights: MatchWeights) -> Self {
        Self {
            fixture,
            weights,
            page: None,
            focus: None,
            scroll_y: 0.0,
            scroll_x: 0.0,
            clock: 0.0,
            events: Vec::new(),
        }
    }

    pub fn page(&self) -> Option<&PageSnapshot> {
        self.page.as_ref()
    }

    pub fn current_url(&self) -> Option<&str> {
        self.page.as_ref().map(PageSnapshot::url)
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn scroll_offset(&self) -> (f64, f64) {
        (self.scroll_x, self.scroll_y)
    }

    fn record(&mut self, step_index: usize, action_type: ActionType, target: Option<usize>, detail: EventDetail) {
        self.events.push(EventRecord {
            step_index,
            action_type,
            target_order_index: target,
            detail,
        });
    }

    fn absolute(&self, target: &str) -> Option<String> {
        match Url::parse(target) {
            Ok(u) => Some(u.to_string()),
            Err(_) => {
                let base = Url::parse(self.page.as_ref()?.url()).ok()?;
                base.join(target).ok().map(|u| u.to_string())
            }
        }
    }

    fn goto(&mut self, url: &str) -> Result<(), (StepErrorKind, String)> {
        let snapshot = self
            .fixture
            .snapshot(url)
            .ok_or_else(|| (StepErrorKind::UnknownTarget, format!("no fixture page for {url}")))?;
        self.page = Some(snapshot);
        self.focus = None;
        self.scroll_x = 0.0;
        self.scroll_y = 0.0;
        Ok(())
    }

    /// Navigates to `target` or records it as external. Returns whether the
    /// page changed.
    fn navigate(
        &mut self,
        step_index: usize,
        action_type: ActionType,
        target_el: Option<usize>,
        target: &str,
        follow: bool,
        new_tab: bool,
    ) -> StepResult {
        let url = self
            .absolute(target)
            .ok_or_else(|| (StepErrorKind::UnknownTarget, format!("unresolvable URL {target:?}")))?;
        if self.fixture.resolve(&url).is_none() && self.fixture.is_external(&url) {
            self.record(step_index, action_type, target_el, EventDetail::External { url });
            return Ok(false);
        }
        self.goto(&url)?;
        let detail = if follow {
            EventDetail::FollowLink { url }
        } else {
            EventDetail::Navigate { url, new_tab }
        };
        self.record(step_index, action_type, target_el, detail);
        Ok(true)
    }

    fn resolve_target(&self, step: &ActionStep) -> Result<usize, (StepErrorKind, String)> {
        let page = self.page.as_ref().ok_or((StepErrorKind::NoPage, "no page loaded".into()))?;
        let reference = step
            .element_ref
            .as_ref()
            .ok_or((StepErrorKind::InvalidParam, "step has no element_ref".into()))?;
        match_element(page, reference, &self.weights)
            .map(|m| m.order_index)
            .ok_or_else(|| {
                (
                    StepErrorKind::NoMatch,
                    format!("no <{}> matching the element reference", reference.tag_name),
                )
            })
    }

    fn is_submit_control(page: &PageSnapshot, index: usize) -> bool {
        let el = &page.elements()[index];
        let ty = el.attr("type").map(str::to_ascii_lowercase);
        match el.tag.as_str() {
            "button" => ty.as_deref().is_none_or(|t| t == "submit"),
            "input" => matches!(ty.as_deref(), Some("submit" | "image")),
            _ => false,
        }
    }

    fn submit_form(&mut self, step_index: usize, action_type: ActionType, control: usize) -> StepResult {
        let page = self.page.as_ref().ok_or((StepErrorKind::NoPage, "no page loaded".into()))?;
        let form = page
            .enclosing_form(control)
            .ok_or((StepErrorKind::InvalidParam, "control is not inside a form".into()))?;
        let form_index = form.order_index;
        let form_id = form.attr("id");
        let action = match self.fixture.form_action_override(page.url(), form_id) {
            Some(a) => a.to_owned(),
            None => {
                let raw = form.attr("action").unwrap_or_default();
                let base = Url::parse(page.url())
                    .map_err(|_| (StepErrorKind::UnknownTarget, "page URL is not absolute".into()))?;
                let mut target = base
                    .join(raw)
                    .map_err(|_| (StepErrorKind::UnknownTarget, format!("bad form action {raw:?}")))?;
                if raw.is_empty() {
                    target.set_query(None);
                    target.set_fragment(None);
                }
                target.to_string()
            }
        };
        let method = form
            .attr("method")
            .map(str::to_ascii_lowercase)
            .unwrap_or_else(|| "get".into());

        let fields: Vec<FormField> = page
            .descendants(form_index)
            .filter(|e| e.is_form_field() && !e.attributes.contains_key("disabled"))
            .filter_map(|e| {
                let name = e.attr("name")?;
                if e.tag == "input" {
                    let ty = e.attr("type").unwrap_or("text").to_ascii_lowercase();
                    if matches!(ty.as_str(), "submit" | "button" | "reset" | "image" | "file") {
                        return None;
                    }
                    if matches!(ty.as_str(), "checkbox" | "radio") && !e.attributes.contains_key("checked") {
                        return None;
                    }
                }
                Some(FormField {
                    name: name.to_owned(),
                    value: e.value.clone().unwrap_or_default(),
                })
            })
            .collect();

        let mut url = Url::parse(&action)
            .map_err(|_| (StepErrorKind::UnknownTarget, format!("bad form action {action:?}")))?;
        if method != "post" {
            let query: String = url::form_urlencoded::Serializer::new(String::new())
                .extend_pairs(fields.iter().map(|f| (&f.name, &f.value)))
                .finish();
            url.set_query(if query.is_empty() { None } else { Some(&query) });
        }
        let url = url.to_string();
        if self.fixture.resolve(&url).is_none() {
            return Err((StepErrorKind::UnknownTarget, format!("no fixture page for {url}")));
        }
        self.record(
            step_index,
            action_type,
            Some(control),
            EventDetail::Submit {
                action,
                method,
                fields,
                url: url.clone(),
            },
        );
        self.goto(&url)?;
        Ok(true)
    }

    fn click(&mut self, step_index: usize, step: &ActionStep) -> StepResult {
        let target = self.resolve_target(step)?;
        self.focus = Some(target);
        let page = self.page.as_ref().expect("resolved against a page");
        let el = &page.elements()[target];
        if el.tag == "a" {
            if let Some(href) = el.attr("href") {
                if !href.is_empty() && !href.starts_with('#') && !href.starts_with("javascript:") {
                    let href = href.to_owned();
                    return self.navigate(step_index, ActionType::Click, Some(target), &href, true, false);
                }
            }
        }
        if Self::is_submit_control(page, target) && page.enclosing_form(target).is_some() {
            return self.submit_form(step_index, ActionType::Click, target);
        }
        self.record(step_index, ActionType::Click, Some(target), EventDetail::Click);
        Ok(false)
    }

    fn input(&mut self, step_index: usize, step: &ActionStep) -> StepResult {
        let text = step
            .param_text("text")
            .ok_or((StepErrorKind::InvalidParam, "input requires params.text".into()))?;
        let clear = match step.param("clear") {
            None => true,
            Some(v) => parse_bool(v).ok_or((StepErrorKind::InvalidParam, format!("bad clear flag {v}")))?,
        };
        let target = self.resolve_target(step)?;
        let page = self.page.as_mut().expect("resolved against a page");
        let el = page.element_mut(target).expect("matched index exists");
        let editable = match el.tag.as_str() {
            "textarea" => true,
            "input" => !matches!(
                el.attr("type").unwrap_or("text").to_ascii_lowercase().as_str(),
                "submit" | "button" | "reset" | "image" | "checkbox" | "radio" | "file" | "hidden"
            ),
            _ => false,
        };
        if !editable {
            return Err((StepErrorKind::NotEditable, format!("<{}> does not accept text", el.tag)));
        }
        let value = if clear {
            text
        } else {
            format!("{}{}", el.value.as_deref().unwrap_or_default(), text)
        };
        el.value = Some(value.clone());
        self.focus = Some(target);
        self.record(step_index, ActionType::Input, Some(target), EventDetail::Input { value });
        Ok(false)
    }

    fn select(&mut self, step_index: usize, step: &ActionStep) -> StepResult {
        let text = step
            .param_text("text")
            .ok_or((StepErrorKind::InvalidParam, "select_dropdown requires params.text".into()))?;
        let want = collapse_whitespace(&text);
        let target = self.resolve_target(step)?;
        let page = self.page.as_ref().expect("resolved against a page");
        if page.elements()[target].tag != "select" {
            return Err((StepErrorKind::NotEditable, "target is not a <select>".into()));
        }
        let value = page
            .descendants(target)
            .find(|o| o.tag == "option" && o.text == want)
            .map(option_value)
            .ok_or_else(|| (StepErrorKind::OptionNotFound, format!("no option {want:?}")))?;
        let page = self.page.as_mut().expect("page present");
        page.element_mut(target).expect("matched index exists").value = Some(value.clone());
        self.focus = Some(target);
        self.record(step_index, ActionType::SelectDropdown, Some(target), EventDetail::Select { text: want, value });
        Ok(false)
    }

    fn scroll(&mut self, step_index: usize, step: &ActionStep) -> StepResult {
        let direction = step.param_text("direction").unwrap_or_else(|| "down".into());
        let pages = match step.param("pages") {
            None => 1.0,
            Some(v) => parse_f64(v).ok_or((StepErrorKind::InvalidParam, format!("bad pages {v}")))?,
        };
        let offset = match direction.as_str() {
            "down" => {
                self.scroll_y += pages;
                self.scroll_y
            }
            "up" => {
                self.scroll_y = (self.scroll_y - pages).max(0.0);
                self.scroll_y
            }
            "right" => {
                self.scroll_x += pages;
                self.scroll_x
            }
            "left" => {
                self.scroll_x = (self.scroll_x - pages).max(0.0);
                self.scroll_x
            }
            other => return Err((StepErrorKind::InvalidParam, format!("bad scroll direction {other:?}"))),
        };
        self.record(step_index, ActionType::Scroll, None, EventDetail::Scroll { direction, pages, offset });
        Ok(false)
    }

    fn send_keys(&mut self, step_index: usize, step: &ActionStep) -> StepResult {
        let keys = step
            .param_text("keys")
            .ok_or((StepErrorKind::InvalidParam, "send_keys requires params.keys".into()))?;
        self.record(step_index, ActionType::SendKeys, self.focus, EventDetail::Keys { keys: keys.clone() });
        if keys.trim() == "Enter" {
            if let (Some(focus), Some(page)) = (self.focus, self.page.as_ref()) {
                let el = &page.elements()[focus];
                if el.tag == "input" && page.enclosing_form(focus).is_some() {
                    return self.submit_form(step_index, ActionType::SendKeys, focus);
                }
            }
        }
        Ok(false)
    }

    fn apply_inner(&mut self, step_index: usize, step: &ActionStep) -> StepResult {
        if let Some(key) = step
            .params
            .iter()
            .find(|(_, v)| v.as_str().is_some_and(|s| placeholders(s).next().is_some()))
            .map(|(k, _)| k)
        {
            return Err((StepErrorKind::InvalidParam, format!("unresolved placeholder in params.{key}")));
        }
        if self.page.is_none() {
            return Err((StepErrorKind::NoPage, "no page loaded".into()));
        }
        match step.action_type {
            ActionType::Click => self.click(step_index, step),
            ActionType::Input => self.input(step_index, step),
            ActionType::SelectDropdown => self.select(step_index, step),
            ActionType::Scroll => self.scroll(step_index, step),
            ActionType::SendKeys => self.send_keys(step_index, step),
            ActionType::Navigate => {
                let url = step
                    .param_text("url")
                    .ok_or((StepErrorKind::InvalidParam, "navigate requires params.url".into()))?;
                let new_tab = step.param("new_tab").and_then(parse_bool).unwrap_or(false);
                self.navigate(step_index, ActionType::Navigate, None, &url, false, new_tab)
            }
            ActionType::Wait => {
                let seconds = match step.param("seconds") {
                    None => 1.0,
                    Some(v) => parse_f64(v).ok_or((StepErrorKind::InvalidParam, format!("bad seconds {v}")))?,
                };
                self.clock += seconds;
                let clock = self.clock;
                self.record(step_index, ActionType::Wait, None, EventDetail::Wait { seconds, clock });
                Ok(false)
            }
        }
    }
}

fn parse_bool(v: &serde_json::Value) -> Option<bool> {
    match v {
        serde_json::Value::Bool(b) => Some(*b),
        serde_json::Value::String(s) => match s.trim() {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        },
        _ => None,
    }
}

fn parse_f64(v: &serde_json::Value) -> Option<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
    .filter(|f: &f64| f.is_finite() && *f >= 0.0)
}

impl BrowserBackend for SimulatedBrowser {
    fn load(&mut self, url: &str) -> Result<PageSnapshot, StepError> {
        self.goto(url).map_err(|(kind, message)| StepError {
            step_index: 0,
            kind,
            message,
        })?;
        Ok(self.page.clone().expect("just loaded"))
    }

    fn apply(&mut self, step_index: usize, step: &ActionStep) -> StepOutcome {
        match self.apply_inner(step_index, step) {
            Ok(page_changed) => StepOutcome::Ok { page_changed },
            Err((kind, message)) => StepOutcome::Error(StepError {
                step_index,
                kind,
                message,
            }),
        }
    }

    fn current(&self) -> Option<PageSnapshot> {
        self.page.clone()
    }

    fn events(&self) -> &[EventRecord] {
        &self.events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skill::ElementRef;
    use serde_json::json;

    const HOME: &str = r#"<html><body>
        <form id="search_mini_form" action="/catalogsearch/result/" method="get">
          <input id="search" name="q" placeholder="Search entire store here..." value="">
          <button type="submit" aria-label="Search">Search</button>
        </form>
        <select id="sorter"><option value="name">Product Name</option><option value="price">Price</option></select>
        <div class="overlay">Close menu</div>
        <a href="/gear">Gear</a><a href="https://help.example/faq">Help</a><a href="/missing">Broken</a>
        <textarea name="note">x</textarea>
    </body></html>"#;

    fn browser() -> SimulatedBrowser {
        let fixture = SiteFixture::new()
            .with_page("http://shop.test/", HOME)
            .unwrap()
            .with_page("http://shop.test/catalogsearch/result/", "<h1>Results</h1>")
            .unwrap()
            .with_page("http://shop.test/gear", "<h1>Gear</h1>")
            .unwrap()
            .with_external("https://help.example/");
        let mut b = SimulatedBrowser::new(Arc::new(fixture));
        b.load("http://shop.test/").unwrap();
        b
    }

    fn step(action: ActionType, el: Option<ElementRef>, params: serde_json::Value) -> ActionStep {
        ActionStep {
            guidance: "g".into(),
            action_type: action,
            element_ref: el,
            params: serde_json::from_value(params).unwrap(),
        }
    }

    fn search_box() -> ElementRef {
        ElementRef::new("input").with_attr("id", "search").with_attr("name", "q")
    }

    #[test]
    fn input_then_enter_submits() {
        let mut b = browser();
        let out = b.apply(0, &step(ActionType::Input, Some(search_box()), json!({"text": "laptop"})));
        assert_eq!(out, StepOutcome::Ok { page_changed: false });
        let out = b.apply(1, &step(ActionType::SendKeys, None, json!({"keys": "Enter"})));
        assert_eq!(out, StepOutcome::Ok { page_changed: true });
        assert_eq!(b.current_url(), Some("http://shop.test/catalogsearch/result/?q=laptop"));
        let submit = b.events().iter().find(|e| matches!(e.detail, EventDetail::Submit { .. })).unwrap();
        assert_eq!(submit.submitted_field("q"), Some("laptop"));
    }

    #[test]
    fn input_append_when_clear_false() {
        let mut b = browser();
        b.apply(0, &step(ActionType::Input, Some(search_box()), json!({"text": "lap"})));
        b.apply(1, &step(ActionType::Input, Some(search_box()), json!({"text": "top", "clear": false})));
        let page = b.current().unwrap();
        let el = page.elements().iter().find(|e| e.attr("id") == Some("search")).unwrap();
        assert_eq!(el.value.as_deref(), Some("laptop"));
    }

    #[test]
    fn navigate_unknown_target() {
        let mut b = browser();
        let out = b.apply(0, &step(ActionType::Navigate, None, json!({"url": "http://shop.test/nope"})));
        match out {
            StepOutcome::Error(e) => assert_eq!(e.kind, StepErrorKind::UnknownTarget),
            other => panic!("{other:?}"),
        }
        let out = b.apply(1, &step(ActionType::Click, Some(ElementRef::new("a").with_text("Broken")), json!({})));
        assert!(matches!(out, StepOutcome::Error(StepError { kind: StepErrorKind::UnknownTarget, .. })));
    }

    #[test]
    fn click_non_interactive_is_benign() {
        let mut b = browser();
        let before = b.current().unwrap();
        let out = b.apply(0, &step(ActionType::Click, Some(ElementRef::new("div").with_text("Close menu")), json!({})));
        assert_eq!(out, StepOutcome::Ok { page_changed: false });
        assert_eq!(b.current().unwrap(), before);
        assert_eq!(b.events()[0].detail, EventDetail::Click);
    }

    #[test]
    fn links_and_external() {
        let mut b = browser();
        let out = b.apply(0, &step(ActionType::Click, Some(ElementRef::new("a").with_text("Help")), json!({})));
        assert_eq!(out, StepOutcome::Ok { page_changed: false });
        assert!(matches!(b.events()[0].detail, EventDetail::External { .. }));
        let out = b.apply(1, &step(ActionType::Click, Some(ElementRef::new("a").with_attr("href", "/gear").with_text("Gear")), json!({})));
        assert_eq!(out, StepOutcome::Ok { page_changed: true });
        assert_eq!(b.current_url(), Some("http://shop.test/gear"));
    }

    #[test]
    fn select_dropdown_rules() {
        let mut b = browser();
        let sorter = ElementRef::new("select").with_attr("id", "sorter");
        assert!(b.apply(0, &step(ActionType::SelectDropdown, Some(sorter.clone()), json!({"text": "Price"}))).is_ok());
        let page = b.current().unwrap();
        assert_eq!(page.elements().iter().find(|e| e.tag == "select").unwrap().value.as_deref(), Some("price"));
        let out = b.apply(1, &step(ActionType::SelectDropdown, Some(sorter), json!({"text": "Rating"})));
        assert!(matches!(out, StepOutcome::Error(StepError { kind: StepErrorKind::OptionNotFound, .. })));
    }

    #[test]
    fn scroll_wait_and_bad_params() {
        let mut b = browser();
        assert!(b.apply(0, &step(ActionType::Scroll, None, json!({"direction": "down", "pages": 2}))).is_ok());
        assert!(b.apply(1, &step(ActionType::Scroll, None, json!({"direction": "up", "pages": "0.5"}))).is_ok());
        assert_eq!(b.scroll_offset(), (0.0, 1.5));
        assert!(b.apply(2, &step(ActionType::Wait, None, json!({"seconds": 2}))).is_ok());
        assert_eq!(b.clock(), 2.0);
        let out = b.apply(3, &step(ActionType::Scroll, None, json!({"direction": "sideways"})));
        assert!(matches!(out, StepOutcome::Error(StepError { kind: StepErrorKind::InvalidParam, .. })));
        let out = b.apply(4, &step(ActionType::SendKeys, None, json!({"keys": "{{k}}"})));
        assert!(matches!(out, StepOutcome::Error(StepError { kind: StepErrorKind::InvalidParam, .. })));
    }

    #[test]
    fn input_into_button_is_not_editable() {
        let mut b = browser();
        let out = b.apply(0, &step(ActionType::Input, Some(ElementRef::new("button").with_text("Search")), json!({"text": "x"})));
        assert!(matches!(out, StepOutcome::Error(StepError { kind: StepErrorKind::NotEditable, .. })));
    }

    #[test]
    fn event_log_is_line_delimited() {
        let mut b = browser();
        b.apply(0, &step(ActionType::Wait, None, json!({"seconds": 1})));
        b.apply(1, &step(ActionType::Click, Some(ElementRef::new("div").with_text("Close menu")), json!({})));
        let log = event_log_jsonl(b.events());
        let lines: Vec<_> = log.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first["action_type"], "wait");
        assert!(first.get("target_order_index").is_none());
        let second: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(second["detail"]["kind"], "click");
        assert!(second["target_order_index"].is_u64());
    }
}
