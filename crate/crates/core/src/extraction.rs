//! Skill extraction from agent trajectories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::curation::{CurationConfig, DecisionOutcome, SkillId, SkillLibrary};
use crate::embedding::{EmbeddingError, EmbeddingProvider};
use crate::llm::{GenerationSettings, LlmClient, LlmError};
use crate::skill::{parse_skill, Skill};

const PROMPT_TEMPLATE: &str = include_str!("../templates/extraction_prompt.txt");

/// Upper bound on steps in an extracted skill.
pub const MAX_SKILL_STEPS: usize = 6;
pub const DEFAULT_STEP_THRESHOLD: usize = 2;

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("no JSON object with an \"extractions\" array in response")]
    Envelope,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

// ---------------------------------------------------------------------------
// Trajectories

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementDescriptor {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryAction {
    /// Any recorded action name; read-only extras are kept as-is.
    pub action_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementDescriptor>,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thinking: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_goal: Option<String>,
    #[serde(default)]
    pub actions: Vec<TrajectoryAction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub task: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
    pub steps: Vec<TrajectoryStep>,
}

/// Parses line-delimited trajectories; blank lines are ignored.
pub fn parse_corpus(text: &str) -> Result<Vec<Trajectory>, ExtractionError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let corpus_err = |message: String| ExtractionError::Corpus { line: i + 1, message };
        let t: Trajectory = serde_json::from_str(line).map_err(|e| corpus_err(e.to_string()))?;
        if t.steps.is_empty() {
            return Err(corpus_err("trajectory has no steps".into()));
        }
        out.push(t);
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Trajectory>, ExtractionError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExtractionError::Io {
        path: path.into(),
        source,
    })?;
    parse_corpus(&text)
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn format_action(a: &TrajectoryAction) -> String {
    let mut line = format!("- {}", a.action_type);
    if let Some(el) = &a.element {
        let _ = write!(line, " {}", el.tag);
        if let Some(text) = el.text.as_deref().map(one_line).filter(|t| !t.is_empty()) {
            let _ = write!(line, " '{text}'");
        }
        if !el.attributes.is_empty() {
            let attrs: Vec<String> = el.attributes.iter().map(|(k, v)| format!("{k}=\"{v}\"")).collect();
            let _ = write!(line, " {{{}}}", attrs.join(", "));
        }
    }
    let _ = write!(line, " params={}", Value::Object(a.params.clone()));
    line
}

/// Text rendering of a trajectory for the extraction prompt.
pub fn format_trajectory(t: &Trajectory) -> String {
    let outcome = match t.success {
        Some(true) => "success",
        Some(false) => "failure",
        None => "unknown",
    };
    let mut out = format!("Task: {}\nOutcome: {outcome}\n", one_line(&t.task));
    for (i, step) in t.steps.iter().enumerate() {
        let mut header = format!("Step {} | URL: {}", i + 1, step.url);
        for (label, field) in [("Thinking", &step.thinking), ("Goal", &step.next_goal)] {
            if let Some(v) = field.as_deref().map(one_line).filter(|v| !v.is_empty()) {
                let _ = write!(header, " | {label}: {v}");
            }
        }
        out.push_str(&header);
        out.push('\n');
        for a in &step.actions {
            out.push_str(&format_action(a));
            out.push('\n');
        }
    }
    out
}

/// Text used to look up library neighbors for a trajectory: the task and
/// every stated goal.
pub fn trajectory_query_text(t: &Trajectory) -> String {
    std::iter::once(t.task.as_str())
        .chain(t.steps.iter().filter_map(|s| s.next_goal.as_deref()))
        .map(one_line)
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------------
// Prompt

#[derive(Debug, Clone, Copy)]
pub struct PromptNeighbor<'a> {
    pub id: SkillId,
    pub skill: &'a Skill,
    pub similarity: f64,
}

fn existing_skills_section(neighbors: &[PromptNeighbor<'_>]) -> String {
    if neighbors.is_empty() {
        return "(none)".into();
    }
    neighbors
        .iter()
        .map(|n| {
            format!(
                "[{}] similarity_score: {:.2}\n{}",
                n.id,
                n.similarity,
                serde_json::to_string(n.skill).expect("skill serializes")
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn build_extraction_prompt(t: &Trajectory, neighbors: &[PromptNeighbor<'_>], step_threshold: usize) -> String {
    PROMPT_TEMPLATE
        .replace("{step_threshold}", &step_threshold.to_string())
        .replace("{existing_skills_section}", &existing_skills_section(neighbors))
        .replace("{trajectory_text}", format_trajectory(t).trim_end())
}

// ---------------------------------------------------------------------------
// Responses

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ExtractionDecision {
    New {
        skill: Skill,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
    Skip {
        existing_id: String,
        reason: String,
    },
    Update {
        existing_id: String,
        skill: Skill,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
}

impl ExtractionDecision {
    pub fn skill(&self) -> Option<&Skill> {
        match self {
            Self::New { skill, .. } | Self::Update { skill, .. } => Some(skill),
            Self::Skip { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedResponse {
    pub decisions: Vec<ExtractionDecision>,
    /// One message per dropped decision.
    pub diagnostics: Vec<String>,
}

/// The first well-formed JSON object in `text` carrying `extractions`.
fn find_envelope(text: &str) -> Option<Map<String, Value>> {
    text.match_indices('{').find_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(m))) if m.contains_key("extractions") => Some(m),
            _ => None,
        }
    })
}

fn text_field(obj: &Map<String, Value>, key: &str) -> Option<String> {
    obj.get(key)
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
}

fn checked_skill(obj: &Map<String, Value>, step_threshold: usize) -> Result<Skill, String> {
    let raw = obj.get("skill").filter(|v| !v.is_null()).ok_or("missing skill")?;
    let skill = parse_skill(raw).map_err(|e| e.to_string())?;
    let n = skill.action_steps.len();
    if n < step_threshold || n > MAX_SKILL_STEPS {
        return Err(format!(
            "step count out of range: {n} not in [{step_threshold}, {MAX_SKILL_STEPS}]"
        ));
    }
    if skill.meta_url.contains('?') {
        return Err("meta_url must not contain a query string".into());
    }
    Ok(skill)
}

fn parse_decision(v: &Value, step_threshold: usize) -> Result<ExtractionDecision, String> {
    let obj = v.as_object().ok_or("decision is not an object")?;
    let existing_id = text_field(obj, "existing_id");
    let reason = text_field(obj, "reason");
    match obj.get("action").and_then(Value::as_str) {
        Some("new") => {
            if existing_id.is_some() {
                return Err("new decision must not carry existing_id".into());
            }
            Ok(ExtractionDecision::New {
                skill: checked_skill(obj, step_threshold)?,
                reason,
            })
        }
        Some("skip") => Ok(ExtractionDecision::Skip {
            existing_id: existing_id.ok_or("skip requires existing_id")?,
            reason: reason.ok_or("skip requires reason")?,
        }),
        Some("update") => {
            let existing_id = existing_id.ok_or("update requires existing_id")?;
            Ok(ExtractionDecision::Update {
                existing_id,
                skill: checked_skill(obj, step_threshold)?,
                reason,
            })
        }
        Some(other) => Err(format!("unknown action {other:?}")),
        None => Err("missing action".into()),
    }
}

/// Recovers the decision list from an LLM response, dropping invalid
/// decisions with a diagnostic each.
pub fn parse_extraction_response(text: &str, step_threshold: usize) -> Result<ParsedResponse, ExtractionError> {
    let envelope = find_envelope(text).ok_or(ExtractionError::Envelope)?;
    let items = envelope["extractions"].as_array().ok_or(ExtractionError::Envelope)?;
    let mut parsed = ParsedResponse::default();
    for (i, item) in items.iter().enumerate() {
        match parse_decision(item, step_threshold) {
            Ok(d) => parsed.decisions.push(d),
            Err(e) => parsed.diagnostics.push(format!("extractions[{i}]: {e}")),
        }
    }
    Ok(parsed)
}

// ---------------------------------------------------------------------------
// Corpus loop

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub step_threshold: usize,
    /// Mine only trajectories marked successful.
    pub successes_only: bool,
    /// Attempts per trajectory for transient client failures.
    pub max_attempts: usize,
    /// On embedding failure, continue with no neighbors instead of aborting.
    pub degrade_without_embeddings: bool,
    pub settings: GenerationSettings,
    pub curation: CurationConfig,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            step_threshold: DEFAULT_STEP_THRESHOLD,
            successes_only: false,
            max_attempts: 3,
            degrade_without_embeddings: true,
            settings: GenerationSettings::default(),
            curation: CurationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub trajectory: usize,
    pub decision: ExtractionDecision,
    pub outcome: DecisionOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub trajectories: usize,
    pub skipped_trajectories: usize,
    pub records: Vec<DecisionRecord>,
    pub diagnostics: Vec<String>,
}

fn complete_with_retry(
    client: &mut dyn LlmClient,
    prompt: &str,
    config: &ExtractionConfig,
) -> Result<String, LlmError> {
    let mut attempt = 1;
    loop {
        match client.complete(prompt, &config.settings) {
            Err(e) if e.is_transient() && attempt < config.max_attempts.max(1) => {
                tracing::warn!(attempt, error = %e, "retrying extraction call");
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// Processes trajectories in order, applying each decision to `library`
/// before the next trajectory is prompted.
pub fn extract_from_corpus(
    corpus: &[Trajectory],
    library: &mut SkillLibrary,
    client: &mut dyn LlmClient,
    provider: &dyn EmbeddingProvider,
    config: &ExtractionConfig,
) -> Result<CorpusReport, ExtractionError> {
    let mut report = CorpusReport::default();
    for (ti, t) in corpus.iter().enumerate() {
        if config.successes_only && t.success != Some(true) {
            continue;
        }
        report.trajectories += 1;
        let neighbors = match library.neighbors_of_text(&trajectory_query_text(t), config.curation.k, provider) {
            Ok(n) => n,
            Err(e) if config.degrade_without_embeddings => {
                report.diagnostics.push(format!("trajectory {ti}: no neighbors: {e}"));
                Vec::new()
            }
            Err(e) => return Err(e.into()),
        };
        let prompt_neighbors: Vec<PromptNeighbor<'_>> = neighbors
            .iter()
            .map(|n| PromptNeighbor {
                id: n.id,
                skill: library.get(n.id).expect("neighbor ids are present"),
                similarity: n.similarity,
            })
            .collect();
        let prompt = build_extraction_prompt(t, &prompt_neighbors, config.step_threshold);
        let response = match complete_with_retry(client, &prompt, config) {
            Ok(r) => r,
            Err(e) => {
                tracing::warn!(trajectory = ti, error = %e, "extraction failed");
                report.diagnostics.push(format!("trajectory {ti}: {e}"));
                report.skipped_trajectories += 1;
                continue;
            }
        };
        let parsed = match parse_extraction_response(&response, config.step_threshold) {
            Ok(p) => p,
            Err(e) => {
                report.diagnostics.push(format!("trajectory {ti}: {e}"));
                report.skipped_trajectories += 1;
                continue;
            }
        };
        report
            .diagnostics
            .extend(parsed.diagnostics.into_iter().map(|d| format!("trajectory {ti}: {d}")));
        for decision in parsed.decisions {
            let outcome = library.apply_decision(&decision, &config.curation);
            report.records.push(DecisionRecord {
                trajectory: ti,
                decision,
                outcome,
            });
        }
    }
    Ok(report)
}
