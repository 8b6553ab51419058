//! Skill deployment: presence filtering, tool registration, grounded
//! execution and guided rendering.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::page::{
    collapse_whitespace, match_element, BrowserBackend, EventRecord, MatchWeights, PageSnapshot, StepErrorKind, StepOutcome,
};
use crate::skill::{ActionStep, ActionType, ElementRef, ParamType, Skill};

/// Prefix separating skill tools from primitive browser actions.
pub const TOOL_PREFIX: &str = "fg_";

/// Action rules appended to the agent system prompt in grounded mode.
pub const GROUNDED_ACTION_RULES: &str = include_str!("../templates/grounded_rules.txt");

/// Skill-mode section appended to the agent system prompt in guided mode.
pub const GUIDED_SYSTEM_PROMPT: &str = include_str!("../templates/guided_system.txt");

/// Keeps a skill iff the first step with an element reference resolves on
/// `page`. Skills without any element reference are always kept.
pub fn filter_by_presence<'a>(skills: Vec<&'a Skill>, page: &PageSnapshot) -> Vec<&'a Skill> {
    let weights = MatchWeights::default();
    skills
        .into_iter()
        .filter(|s| {
            s.first_element_ref()
                .is_none_or(|r| match_element(page, r, &weights).is_some())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Grounded tools

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolDescriptor {
    pub tool_name: String,
    pub description: String,
    /// JSON Schema of the keyword arguments.
    pub parameters: Value,
}

impl ToolDescriptor {
    /// The "Tool name / Description" listing shown to the agent.
    pub fn render(&self) -> String {
        format!("Tool name: {}\nDescription: {}\n", self.tool_name, self.description)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistrationError {
    #[error("duplicate skill name {0:?}")]
    DuplicateName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToolOptions {
    /// Include the per-step "Action Steps:" block.
    pub include_guidance: bool,
}

impl Default for ToolOptions {
    fn default() -> Self {
        Self { include_guidance: true }
    }
}

const GROUNDED_ATTRS: [&str; 7] = ["id", "type", "placeholder", "aria-label", "href", "title", "role"];
const GUIDED_ATTRS: [&str; 7] = ["placeholder", "id", "type", "aria-label", "href", "title", "role"];
const MAX_DESCRIPTORS: usize = 2;

fn quoted(v: &Value) -> String {
    match v {
        Value::String(s) => format!("\"{s}\""),
        other => other.to_string(),
    }
}

/// `<tag attr="v" ...>` with at most two identifying attributes.
pub fn grounded_element(r: &ElementRef) -> String {
    let mut attrs: Vec<(&str, &str)> = GROUNDED_ATTRS
        .iter()
        .filter_map(|k| r.attr(k).map(|v| (*k, v)))
        .take(MAX_DESCRIPTORS)
        .collect();
    if attrs.is_empty() {
        attrs.extend(r.attr("name").map(|v| ("name", v)));
    }
    let mut out = format!("<{}", r.tag_name);
    for (k, v) in attrs {
        let _ = write!(out, " {k}=\"{v}\"");
    }
    out.push('>');
    out
}

/// Compact action rendering used in tool descriptions, e.g.
/// `input <input id="search"> with text="{{query}}"`.
pub fn grounded_action(step: &ActionStep) -> String {
    let mut out = step.action_type.as_str().to_owned();
    if let Some(r) = &step.element_ref {
        out.push(' ');
        out.push_str(&grounded_element(r));
    }
    let params: Vec<String> = step
        .params
        .iter()
        .filter(|(k, _)| !(step.action_type == ActionType::Input && *k == "clear"))
        .map(|(k, v)| format!("{k}={}", quoted(v)))
        .collect();
    if !params.is_empty() {
        out.push_str(" with ");
        out.push_str(&params.join(", "));
    }
    out
}

fn parameter_line(p: &crate::skill::ParameterSpec) -> String {
    let mut flags = if p.required { "required".to_owned() } else { "optional".to_owned() };
    if let Some(d) = &p.default {
        let _ = write!(flags, ", default={}", quoted(d));
    }
    let mut line = format!("  - {}: {} ({flags})", p.name, p.param_type);
    if !p.description.is_empty() {
        let _ = write!(line, " - {}", collapse_whitespace(&p.description));
    }
    line
}

/// Description text for a skill tool.
pub fn tool_description(skill: &Skill, options: ToolOptions) -> String {
    let mut out = collapse_whitespace(&skill.description);
    if options.include_guidance {
        out.push_str("\n\nAction Steps:");
        for (i, step) in skill.action_steps.iter().enumerate() {
            let _ = write!(
                out,
                "\n  Step {}: {} -> {}",
                i + 1,
                collapse_whitespace(&step.guidance),
                grounded_action(step)
            );
        }
    }
    out.push_str("\n\nParameters (pass as kwargs_json):");
    if skill.parameters.is_empty() {
        out.push_str("\n  (none)");
    }
    for p in &skill.parameters {
        out.push('\n');
        out.push_str(&parameter_line(p));
    }
    out
}

fn json_type(t: ParamType) -> &'static str {
    match t {
        ParamType::Str => "string",
        ParamType::Int => "integer",
        ParamType::Float => "number",
        ParamType::Bool => "boolean",
    }
}

/// JSON Schema object for a skill's parameters.
pub fn parameter_schema(skill: &Skill) -> Value {
    let mut properties = Map::new();
    for p in &skill.parameters {
        let mut prop = json!({"type": json_type(p.param_type), "description": p.description});
        if let Some(d) = &p.default {
            prop["default"] = d.clone();
        }
        properties.insert(p.name.clone(), prop);
    }
    let required: Vec<&str> = skill
        .parameters
        .iter()
        .filter(|p| p.required)
        .map(|p| p.name.as_str())
        .collect();
    json!({
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": false,
    })
}

pub fn tool_descriptor(skill: &Skill, options: ToolOptions) -> ToolDescriptor {
    ToolDescriptor {
        tool_name: format!("{TOOL_PREFIX}{}", skill.name),
        description: tool_description(skill, options),
        parameters: parameter_schema(skill),
    }
}

/// One tool per skill, in input order.
pub fn register_tools<'a>(
    skills: impl IntoIterator<Item = &'a Skill>,
    options: ToolOptions,
) -> Result<Vec<ToolDescriptor>, RegistrationError> {
    let mut seen = BTreeSet::new();
    let mut tools = Vec::new();
    for skill in skills {
        if !seen.insert(skill.name.as_str()) {
            return Err(RegistrationError::DuplicateName(skill.name.clone()));
        }
        tools.push(tool_descriptor(skill, options));
    }
    Ok(tools)
}

// ---------------------------------------------------------------------------
// Grounded execution

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExecutionStatus {
    Success,
    Partial { step_index: usize },
    Failed { step_index: usize },
}

impl fmt::Display for ExecutionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecutionStatus::Success => f.write_str("success"),
            ExecutionStatus::Partial { step_index } => write!(f, "partial({step_index})"),
            ExecutionStatus::Failed { step_index } => write!(f, "failed({step_index})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub action_type: ActionType,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<StepErrorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub skill: String,
    pub status: ExecutionStatus,
    pub steps: Vec<StepReport>,
    pub final_url: Option<String>,
    /// Set when arguments could not be bound; no step ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substitution_error: Option<String>,
    /// Browser events emitted during this execution.
    pub events: Vec<EventRecord>,
}

impl ExecutionReport {
    pub fn is_success(&self) -> bool {
        self.status == ExecutionStatus::Success
    }

    /// First failing step and its error kind.
    pub fn first_error(&self) -> Option<(usize, StepErrorKind)> {
        self.steps
            .iter()
            .find_map(|s| s.error_kind.map(|k| (s.index, k)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Binds `args`, then applies each step in order, stopping at the first
/// error.
pub fn execute_grounded(
    backend: &mut dyn BrowserBackend,
    skill: &Skill,
    args: &Map<String, Value>,
) -> ExecutionReport {
    let events_before = backend.events().len();
    let final_url = |b: &dyn BrowserBackend| b.current().map(|p| p.url().to_owned());
    let steps = match skill.substitute_params(args) {
        Ok(steps) => steps,
        Err(e) => {
            return ExecutionReport {
                skill: skill.name.clone(),
                status: ExecutionStatus::Failed { step_index: 0 },
                steps: Vec::new(),
                final_url: final_url(backend),
                substitution_error: Some(e.to_string()),
                events: Vec::new(),
            }
        }
    };
    let mut reports = Vec::with_capacity(steps.len());
    let mut status = ExecutionStatus::Success;
    for (i, step) in steps.iter().enumerate() {
        match backend.apply(i, step) {
            StepOutcome::Ok { .. } => reports.push(StepReport {
                index: i,
                action_type: step.action_type,
                ok: true,
                error_kind: None,
                message: None,
            }),
            StepOutcome::Error(e) => {
                tracing::debug!(skill = %skill.name, step = i, kind = %e.kind, "step failed");
                reports.push(StepReport {
                    index: i,
                    action_type: step.action_type,
                    ok: false,
                    error_kind: Some(e.kind),
                    message: Some(e.message),
                });
                status = if i > 0 {
                    ExecutionStatus::Partial { step_index: i }
                } else {
                    ExecutionStatus::Failed { step_index: 0 }
                };
                break;
            }
        }
    }
    ExecutionReport {
        skill: skill.name.clone(),
        status,
        steps: reports,
        final_url: final_url(backend),
        substitution_error: None,
        events: backend.events()[events_before..].to_vec(),
    }
}

// ---------------------------------------------------------------------------
// Guided rendering

/// `<tag> k="v" k2="v2"` with at most two descriptors, text first.
pub fn guided_element(r: &ElementRef) -> String {
    let mut descriptors: Vec<(&str, String)> = Vec::new();
    if let Some(t) = r.text_content.as_deref().map(collapse_whitespace).filter(|t| !t.is_empty()) {
        descriptors.push(("text", t));
    }
    descriptors.extend(
        GUIDED_ATTRS
            .iter()
            .filter_map(|k| r.attr(k).map(|v| (*k, v.to_owned()))),
    );
    descriptors.truncate(MAX_DESCRIPTORS);
    if descriptors.is_empty() {
        descriptors.extend(r.attr("name").map(|v| ("name", v.to_owned())));
    }
    let mut out = format!("<{}>", r.tag_name);
    for (k, v) in descriptors {
        let _ = write!(out, " {k}=\"{v}\"");
    }
    out
}

/// Natural-language example of one step, placeholders left intact.
pub fn guided_action(step: &ActionStep) -> String {
    let el = step.element_ref.as_ref().map(guided_element).unwrap_or_default();
    let text = |k: &str| step.param_text(k).unwrap_or_default();
    match step.action_type {
        ActionType::Click => format!("click on {el}"),
        ActionType::Input => format!("input \"{}\" into {el}", text("text")),
        ActionType::SelectDropdown => format!("select \"{}\" from {el}", text("text")),
        ActionType::Scroll => {
            let dir = step.param_text("direction").unwrap_or_else(|| "down".into());
            let pages = step.param_text("pages").unwrap_or_else(|| "1".into());
            let unit = if pages == "1" { "page" } else { "pages" };
            format!("scroll {dir} by {pages} {unit}")
        }
        ActionType::SendKeys => format!("press \"{}\"", text("keys")),
        ActionType::Navigate => format!("navigate to \"{}\"", text("url")),
        ActionType::Wait => {
            let secs = step.param_text("seconds").unwrap_or_else(|| "1".into());
            let unit = if secs == "1" { "second" } else { "seconds" };
            format!("wait {secs} {unit}")
        }
    }
}

/// The `<available_skills>` listing.
pub fn render_available_skills<'a>(skills: impl IntoIterator<Item = &'a Skill>) -> String {
    let mut out = String::from(
        "<available_skills>\n\
         Skills are pre-defined step-by-step workflow guides.\n\
         Call use_skill(skill_name=\"...\") to activate a skill.\n\
         Call clear_skill() when finished.\n",
    );
    let mut first = true;
    for (i, skill) in skills.into_iter().enumerate() {
        if first {
            out.push('\n');
            first = false;
        }
        let _ = writeln!(out, "{}. {}: {}", i + 1, skill.name, collapse_whitespace(&skill.description));
    }
    out.push_str("</available_skills>\n");
    out
}

/// The `<activated_skill_guidance>` block injected after `use_skill`.
pub fn render_activated_guidance(skill: &Skill) -> String {
    let mut out = String::from("<activated_skill_guidance>\n");
    let _ = writeln!(out, "Skill: \"{}\"", skill.name);
    let _ = writeln!(out, "Description: {}", collapse_whitespace(&skill.description));
    out.push_str("\nFollow these steps using your browser actions:\n\n");
    for (i, step) in skill.action_steps.iter().enumerate() {
        let _ = writeln!(out, "Step {}: {}", i + 1, collapse_whitespace(&step.guidance));
        let _ = writeln!(out, "  Example: {}", guided_action(step));
    }
    out.push_str(
        "\nIMPORTANT:\n\
         - Use native browser actions to execute each step\n\
         - If a step fails, adapt and continue\n\
         - Call clear_skill() when finished\n\
         </activated_skill_guidance>\n",
    );
    out
}

// ---------------------------------------------------------------------------
// Deployment surface

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeploymentMode {
    Grounded,
    Guided,
    Mix,
}

impl DeploymentMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "grounded" => Some(Self::Grounded),
            "guided" => Some(Self::Guided),
            "mix" => Some(Self::Mix),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Grounded => "grounded",
            Self::Guided => "guided",
            Self::Mix => "mix",
        }
    }

    fn has_tools(self) -> bool {
        matches!(self, Self::Grounded | Self::Mix)
    }

    fn has_blocks(self) -> bool {
        matches!(self, Self::Guided | Self::Mix)
    }
}

impl fmt::Display for DeploymentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What the agent sees for one page under a deployment mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentSurface {
    pub mode: DeploymentMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tools: Option<Vec<ToolDescriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_rules: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub available_skills: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_prompt: Option<String>,
}

impl DeploymentSurface {
    /// Plain-text rendering; tools come first in mix mode.
    pub fn render(&self) -> String {
        let mut sections: Vec<String> = Vec::new();
        if let Some(rules) = &self.action_rules {
            sections.push(rules.clone());
        }
        if let Some(tools) = &self.tools {
            sections.extend(tools.iter().map(ToolDescriptor::render));
        }
        if let Some(prompt) = &self.system_prompt {
            sections.push(prompt.clone());
        }
        if let Some(block) = &self.available_skills {
            sections.push(block.clone());
        }
        sections.join("\n")
    }
}

/// Builds the surface for `skills`; when `page` is given, skills whose
/// target elements are absent are dropped first.
pub fn deployment_surface(
    mode: DeploymentMode,
    skills: &[&Skill],
    page: Option<&PageSnapshot>,
    options: ToolOptions,
) -> Result<DeploymentSurface, RegistrationError> {
    let skills = match page {
        Some(p) => filter_by_presence(skills.to_vec(), p),
        None => skills.to_vec(),
    };
    let (tools, action_rules) = if mode.has_tools() {
        (
            Some(register_tools(skills.iter().copied(), options)?),
            Some(GROUNDED_ACTION_RULES.to_owned()),
        )
    } else {
        (None, None)
    };
    let (available_skills, system_prompt) = if mode.has_blocks() {
        (
            Some(render_available_skills(skills.iter().copied())),
            Some(GUIDED_SYSTEM_PROMPT.to_owned()),
        )
    } else {
        (None, None)
    };
    Ok(DeploymentSurface {
        mode,
        tools,
        action_rules,
        available_skills,
        system_prompt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::page::{parse_html, SimulatedBrowser, SiteFixture};
    use crate::test_support::search_skill;
    use std::sync::Arc;

    const HOME: &str = r#"<form id="search_mini_form" action="/catalogsearch/result/" method="get">
        <input id="search" name="q" placeholder="Search entire store here...">
        <button type="submit" aria-label="Search">Search</button></form>"#;

    fn fixture(home: &str) -> Arc<SiteFixture> {
        Arc::new(
            SiteFixture::new()
                .with_page("http://shop.test/", home)
                .unwrap()
                .with_page("http://shop.test/catalogsearch/result/", "<h1>Results</h1>")
                .unwrap(),
        )
    }

    fn args(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn grounded_execution_success_and_partial() {
        let skill = search_skill();
        let mut b = SimulatedBrowser::new(fixture(HOME));
        b.load("http://shop.test/").unwrap();
        let report = execute_grounded(&mut b, &skill, &args(json!({"query": "laptop"})));
        assert_eq!(report.status, ExecutionStatus::Success);
        assert_eq!(report.steps.len(), 3);
        assert_eq!(
            report.final_url.as_deref(),
            Some("http://shop.test/catalogsearch/result/?q=laptop")
        );
        assert!(report.events.iter().any(|e| e.submitted_field("q") == Some("laptop")));

        let no_button = HOME.replace(r#"<button type="submit" aria-label="Search">Search</button>"#, "");
        let mut b = SimulatedBrowser::new(fixture(&no_button));
        b.load("http://shop.test/").unwrap();
        let report = execute_grounded(&mut b, &skill, &args(json!({"query": "laptop"})));
        assert_eq!(report.status, ExecutionStatus::Partial { step_index: 2 });
        assert_eq!(report.first_error(), Some((2, StepErrorKind::NoMatch)));
        assert_eq!(report.status.to_string(), "partial(2)");
    }

    #[test]
    fn substitution_failure_runs_nothing() {
        let skill = search_skill();
        let mut b = SimulatedBrowser::new(fixture(HOME));
        b.load("http://shop.test/").unwrap();
        let report = execute_grounded(&mut b, &skill, &Map::new());
        assert_eq!(report.status, ExecutionStatus::Failed { step_index: 0 });
        assert!(report.steps.is_empty());
        assert!(b.events().is_empty());
        assert_eq!(
            report.substitution_error.as_deref(),
            Some("missing required argument: query")
        );
    }

    #[test]
    fn presence_filter() {
        let skill = search_skill();
        let home = parse_html(HOME, "http://shop.test/");
        let bare = parse_html("<p>nothing</p>", "http://shop.test/");
        assert_eq!(filter_by_presence(vec![&skill], &home).len(), 1);
        assert!(filter_by_presence(vec![&skill], &bare).is_empty());
        let nav: Skill = serde_json::from_value(json!({
            "name": "go_home", "description": "d", "meta_url": "shopping/*",
            "parameters": [], "action_steps": [{"guidance": "g", "action_type": "navigate", "params": {"url": "http://shop.test/"}}]
        }))
        .unwrap();
        assert_eq!(filter_by_presence(vec![&nav], &bare).len(), 1);
    }

    #[test]
    fn tool_layout() {
        let tools = register_tools([&search_skill()], ToolOptions::default()).unwrap();
        assert_eq!(tools[0].tool_name, "fg_search_products_from_homepage");
        let d = &tools[0].description;
        assert!(d.contains(
            "\n\nAction Steps:\n  Step 1: Focus the main site search input. -> click <input id=\"search\" placeholder=\"Search entire store here...\">\n"
        ));
        assert!(d.contains("  Step 2: Type the search query, clearing existing text. -> input <input id=\"search\"> with text=\"{{query}}\"\n"));
        assert!(d.contains("-> click <button type=\"submit\" aria-label=\"Search\">\n"));
        assert!(d.ends_with(
            "\n\nParameters (pass as kwargs_json):\n  - query: str (required) - Product search query to enter."
        ));
        assert_eq!(tools[0].parameters["required"], json!(["query"]));

        let bare = register_tools([&search_skill()], ToolOptions { include_guidance: false }).unwrap();
        assert!(!bare[0].description.contains("Action Steps:"));
        assert!(register_tools(Vec::<&Skill>::new(), ToolOptions::default()).unwrap().is_empty());
        let s = search_skill();
        assert_eq!(
            register_tools([&s, &s], ToolOptions::default()),
            Err(RegistrationError::DuplicateName(s.name.clone()))
        );
    }

    #[test]
    fn guided_examples() {
        let g = render_activated_guidance(&search_skill());
        assert!(g.contains("  Example: click on <input> placeholder=\"Search entire store here...\" id=\"search\"\n"));
        assert!(g.contains("  Example: input \"{{query}}\" into <input> id=\"search\"\n"));
        assert!(g.contains("  Example: click on <button> text=\"Search\" type=\"submit\"\n"));
    }

    #[test]
    fn guidance_newlines_collapse() {
        let mut s = search_skill();
        s.action_steps[0].guidance = "Focus the\n  search input.".into();
        assert!(render_activated_guidance(&s).contains("Step 1: Focus the search input.\n"));
    }

    #[test]
    fn available_skills_empty() {
        assert_eq!(
            render_available_skills(Vec::<&Skill>::new()),
            "<available_skills>\nSkills are pre-defined step-by-step workflow guides.\nCall use_skill(skill_name=\"...\") to activate a skill.\nCall clear_skill() when finished.\n</available_skills>\n"
        );
    }

    #[test]
    fn surface_modes() {
        let s = search_skill();
        let grounded = deployment_surface(DeploymentMode::Grounded, &[&s], None, ToolOptions::default()).unwrap();
        assert_eq!(grounded.tools.as_ref().map(Vec::len), Some(1));
        assert!(grounded.available_skills.is_none());
        let guided = deployment_surface(DeploymentMode::Guided, &[&s], None, ToolOptions::default()).unwrap();
        assert!(guided.tools.is_none());
        assert!(guided.available_skills.unwrap().contains("1. search_products_from_homepage: "));
        let mix = deployment_surface(DeploymentMode::Mix, &[&s], None, ToolOptions::default()).unwrap();
        let text = mix.render();
        let tool_at = text.find("Tool name: fg_search_products_from_homepage").unwrap();
        let block_at = text.find("<available_skills>").unwrap();
        assert!(tool_at < block_at);
    }

    #[test]
    fn other_action_renderings() {
        let step = |t: ActionType, el: Option<ElementRef>, p: Value| ActionStep {
            guidance: "g".into(),
            action_type: t,
            element_ref: el,
            params: serde_json::from_value(p).unwrap(),
        };
        let sel = ElementRef::new("select").with_attr("id", "sorter").with_attr("name", "order");
        assert_eq!(
            guided_action(&step(ActionType::SelectDropdown, Some(sel.clone()), json!({"text": "Price"}))),
            "select \"Price\" from <select> id=\"sorter\""
        );
        assert_eq!(
            grounded_action(&step(ActionType::SelectDropdown, Some(sel), json!({"text": "Price"}))),
            "select_dropdown <select id=\"sorter\"> with text=\"Price\""
        );
        assert_eq!(
            grounded_action(&step(ActionType::Scroll, None, json!({"direction": "down", "pages": 2}))),
            "scroll with direction=\"down\", pages=2"
        );
        assert_eq!(guided_action(&step(ActionType::Scroll, None, json!({"pages": 2}))), "scroll down by 2 pages");
        assert_eq!(guided_action(&step(ActionType::SendKeys, None, json!({"keys": "Enter"}))), "press \"Enter\"");
        assert_eq!(guided_action(&step(ActionType::Wait, None, json!({"seconds": 3}))), "wait 3 seconds");
        assert_eq!(
            guided_element(&ElementRef::new("input").with_attr("name", "q")),
            "<input> name=\"q\""
        );
    }
}
