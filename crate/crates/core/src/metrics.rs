//! Skill-usage and efficiency statistics over agent run logs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deploy::TOOL_PREFIX;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("run log has no steps")]
    Empty,
}

/// One agent step. A skill invocation counts as a single step however many
/// primitive actions it expands to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skill: Option<String>,
    #[serde(default = "one")]
    pub primitive_actions: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRun {
    pub task_id: String,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<String>,
    pub steps: Vec<RunStep>,
}

impl TaskRun {
    pub fn invoked_skill(&self) -> bool {
        self.steps.iter().any(|s| s.skill.is_some())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLog {
    pub tasks: Vec<TaskRun>,
}

impl RunLog {
    pub fn new(tasks: Vec<TaskRun>) -> Self {
        Self { tasks }
    }

    /// Parses one task per line; blank lines are ignored.
    pub fn parse_jsonl(text: &str) -> Result<Self, MetricsError> {
        let mut tasks = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| MetricsError::Parse { line: i + 1, message };
            let task: TaskRun = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            if task.steps.is_empty() {
                return Err(err(format!("task {} has no steps", task.task_id)));
            }
            tasks.push(task);
        }
        Ok(Self { tasks })
    }

    pub fn load(path: &Path) -> Result<Self, MetricsError> {
        let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
            path: path.into(),
            source,
        })?;
        Self::parse_jsonl(&text)
    }

    pub fn to_jsonl(&self) -> String {
        self.tasks
            .iter()
            .map(|t| serde_json::to_string(t).expect("task serializes") + "\n")
            .collect()
    }

    /// Names of invoked skills, with any tool prefix removed.
    pub fn invoked_skill_names(&self) -> BTreeSet<&str> {
        self.tasks
            .iter()
            .flat_map(|t| &t.steps)
            .filter_map(|s| s.skill.as_deref())
            .map(|n| n.strip_prefix(TOOL_PREFIX).unwrap_or(n))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskFilter {
    All,
    Success,
    Failure,
}

impl TaskFilter {
    fn admits(self, t: &TaskRun) -> bool {
        match self {
            TaskFilter::All => true,
            TaskFilter::Success => t.success,
            TaskFilter::Failure => !t.success,
        }
    }
}

/// Percentage of all steps that invoke a skill.
pub fn invocation_rate(log: &RunLog) -> Result<f64, MetricsError> {
    let steps = log.tasks.iter().flat_map(|t| &t.steps);
    let (total, invoked) = steps.fold((0usize, 0usize), |(n, k), s| (n + 1, k + usize::from(s.skill.is_some())));
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(100.0 * invoked as f64 / total as f64)
}

/// Percentage of tasks in `filter` with at least one invocation; `None`
/// when the filter selects no task.
pub fn usage_rate(log: &RunLog, filter: TaskFilter) -> Option<f64> {
    let selected: Vec<&TaskRun> = log.tasks.iter().filter(|t| filter.admits(t)).collect();
    if selected.is_empty() {
        return None;
    }
    let used = selected.iter().filter(|t| t.invoked_skill()).count();
    Some(100.0 * used as f64 / selected.len() as f64)
}

/// Mean steps per task; `None` for an empty log.
pub fn avg_steps(log: &RunLog) -> Option<f64> {
    mean_steps(log.tasks.iter())
}

fn mean_steps<'a>(tasks: impl Iterator<Item = &'a TaskRun>) -> Option<f64> {
    let (n, sum) = tasks.fold((0usize, 0usize), |(n, sum), t| (n + 1, sum + t.steps.len()));
    (n > 0).then(|| sum as f64 / n as f64)
}

/// Key for tasks without a site.
pub const UNKNOWN_SITE: &str = "unknown";

/// Mean steps per task grouped by site.
pub fn avg_steps_by_site(log: &RunLog) -> BTreeMap<String, f64> {
    let mut groups: BTreeMap<&str, Vec<&TaskRun>> = BTreeMap::new();
    for t in &log.tasks {
        groups.entry(t.site.as_deref().unwrap_or(UNKNOWN_SITE)).or_default().push(t);
    }
    groups
        .into_iter()
        .filter_map(|(site, ts)| mean_steps(ts.into_iter()).map(|m| (site.to_owned(), m)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageReport {
    pub tasks: usize,
    pub steps: usize,
    pub invocation_rate: Option<f64>,
    pub usage_rate_all: Option<f64>,
    pub usage_rate_success: Option<f64>,
    pub usage_rate_failure: Option<f64>,
    pub avg_steps: Option<f64>,
    pub avg_steps_by_site: BTreeMap<String, f64>,
}

pub fn usage_report(log: &RunLog) -> UsageReport {
    UsageReport {
        tasks: log.tasks.len(),
        steps: log.tasks.iter().map(|t| t.steps.len()).sum(),
        invocation_rate: invocation_rate(log).ok(),
        usage_rate_all: usage_rate(log, TaskFilter::All),
        usage_rate_success: usage_rate(log, TaskFilter::Success),
        usage_rate_failure: usage_rate(log, TaskFilter::Failure),
        avg_steps: avg_steps(log),
        avg_steps_by_site: avg_steps_by_site(log),
    }
}

/// Renders an optional number with one decimal, or `-` when absent.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.1}"))
}

/// Two-column table with left-aligned labels padded to a common width.
pub fn text_table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

impl UsageReport {
    pub fn rows(&self) -> Vec<(String, String)> {
        let mut rows = vec![
            ("Tasks".to_owned(), self.tasks.to_string()),
            ("Steps".to_owned(), self.steps.to_string()),
            ("IR (%)".to_owned(), fmt_opt(self.invocation_rate)),
            ("UR all (%)".to_owned(), fmt_opt(self.usage_rate_all)),
            ("UR success (%)".to_owned(), fmt_opt(self.usage_rate_success)),
            ("UR failure (%)".to_owned(), fmt_opt(self.usage_rate_failure)),
            ("Avg. steps".to_owned(), fmt_opt(self.avg_steps)),
        ];
        rows.extend(
            self.avg_steps_by_site
                .iter()
                .map(|(site, m)| (format!("Avg. steps [{site}]"), fmt_opt(Some(*m)))),
        );
        rows
    }

    pub fn to_text(&self) -> String {
        text_table(&self.rows())
    }
}
