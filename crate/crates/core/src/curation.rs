//! Skill library curation: online deduplication, embedding neighbors,
//! executability validation and library statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::deploy::{execute_grounded, ExecutionReport, ExecutionStatus};
use crate::embedding::{cosine, EmbeddingError, EmbeddingProvider};
use crate::extraction::ExtractionDecision;
use crate::graph::{normalize_url, SiteAliases, UrlPattern};
use crate::metrics::RunLog;
use crate::page::{BrowserBackend, SimulatedBrowser, SiteFixture, StepError};
use crate::skill::{ActionType, ParamType, Skill, SkillFileError, SkillLibraryFile};

/// Stable library identifier, rendered `skill_<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SkillId(pub u64);

impl fmt::Display for SkillId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "skill_{}", self.0)
    }
}

impl FromStr for SkillId {
    type Err = CurationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix("skill_")
            .filter(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|n| n.parse().ok())
            .map(SkillId)
            .ok_or_else(|| CurationError::BadId(s.into()))
    }
}

impl Serialize for SkillId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SkillId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum CurationError {
    #[error("malformed skill id {0:?}")]
    BadId(String),
    #[error("unknown skill id {0}")]
    UnknownId(SkillId),
    #[error("skill name {0:?} already in library")]
    DuplicateName(String),
    #[error(transparent)]
    File(#[from] SkillFileError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid sidecar {path}: {source}")]
    Sidecar {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("sidecar does not match library: {0}")]
    SidecarMismatch(String),
}

/// Skills keyed by id, with a name index and an embedding cache.
#[derive(Debug, Clone, Default)]
pub struct SkillLibrary {
    skills: BTreeMap<SkillId, Skill>,
    names: BTreeMap<String, SkillId>,
    next_id: u64,
    cache: BTreeMap<SkillId, Vec<f64>>,
    cache_provider: Option<String>,
}

impl PartialEq for SkillLibrary {
    fn eq(&self, other: &Self) -> bool {
        self.skills == other.skills && self.next_id() == other.next_id()
    }
}

impl SkillLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns ids `skill_1..` in input order.
    pub fn from_skills(skills: impl IntoIterator<Item = Skill>) -> Result<Self, CurationError> {
        let mut lib = Self::new();
        for s in skills {
            lib.insert(s)?;
        }
        Ok(lib)
    }

    pub fn len(&self) -> usize {
        self.skills.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_empty()
    }

    /// Id the next insertion receives.
    pub fn next_id(&self) -> SkillId {
        SkillId(self.next_id.max(1))
    }

    pub fn get(&self, id: SkillId) -> Option<&Skill> {
        self.skills.get(&id)
    }

    pub fn id_of(&self, name: &str) -> Option<SkillId> {
        self.names.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SkillId, &Skill)> {
        self.skills.iter().map(|(id, s)| (*id, s))
    }

    pub fn skills(&self) -> impl Iterator<Item = &Skill> {
        self.skills.values()
    }

    pub fn cached_ids(&self) -> impl Iterator<Item = SkillId> + '_ {
        self.cache.keys().copied()
    }

    pub fn insert(&mut self, skill: Skill) -> Result<SkillId, CurationError> {
        if self.names.contains_key(&skill.name) {
            return Err(CurationError::DuplicateName(skill.name));
        }
        let id = self.next_id();
        self.next_id = id.0 + 1;
        self.names.insert(skill.name.clone(), id);
        self.skills.insert(id, skill);
        Ok(id)
    }

    /// Replaces the body at `id`, keeping the id.
    pub fn replace(&mut self, id: SkillId, skill: Skill) -> Result<(), CurationError> {
        let old = self.skills.get(&id).ok_or(CurationError::UnknownId(id))?;
        if self.names.get(&skill.name).is_some_and(|other| *other != id) {
            return Err(CurationError::DuplicateName(skill.name));
        }
        let old_name = old.name.clone();
        self.names.remove(&old_name);
        self.names.insert(skill.name.clone(), id);
        self.skills.insert(id, skill);
        self.cache.remove(&id);
        Ok(())
    }

    /// Removes a skill; its id is never reissued.
    pub fn remove(&mut self, id: SkillId) -> Option<Skill> {
        let skill = self.skills.remove(&id)?;
        self.names.remove(&skill.name);
        self.cache.remove(&id);
        Some(skill)
    }

    pub fn to_file(&self) -> SkillLibraryFile {
        SkillLibraryFile::new(self.skills.values().cloned().collect())
    }

    // -- neighbors ---------------------------------------------------------

    fn ensure_cache(&mut self, provider: &dyn EmbeddingProvider) -> Result<(), EmbeddingError> {
        let pid = provider.id();
        if self.cache_provider.as_deref() != Some(pid.as_str()) {
            self.cache.clear();
            self.cache_provider = Some(pid);
        }
        let missing: Vec<SkillId> = self
            .skills
            .keys()
            .filter(|id| !self.cache.contains_key(id))
            .copied()
            .collect();
        for id in missing {
            let v = provider.embed(&candidate_text(&self.skills[&id]))?;
            self.cache.insert(id, v);
        }
        Ok(())
    }

    /// The `k` library skills most similar to `text`, by descending cosine
    /// similarity, ties by id.
    pub fn neighbors_of_text(
        &mut self,
        text: &str,
        k: usize,
        provider: &dyn EmbeddingProvider,
    ) -> Result<Vec<Neighbor>, EmbeddingError> {
        self.ensure_cache(provider)?;
        let query = provider.embed(text)?;
        let mut scored: Vec<Neighbor> = self
            .cache
            .iter()
            .map(|(id, v)| Neighbor {
                id: *id,
                similarity: cosine(&query, v),
            })
            .collect();
        scored.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then(a.id.cmp(&b.id)));
        scored.truncate(k);
        Ok(scored)
    }

    pub fn top_k_neighbors(
        &mut self,
        candidate: &Skill,
        k: usize,
        provider: &dyn EmbeddingProvider,
    ) -> Result<Vec<Neighbor>, EmbeddingError> {
        self.neighbors_of_text(&candidate_text(candidate), k, provider)
    }

    // -- decisions ---------------------------------------------------------

    /// Applies one extraction decision, running the rule-based pre-gates on
    /// `new` decisions.
    pub fn apply_decision(&mut self, decision: &ExtractionDecision, config: &CurationConfig) -> DecisionOutcome {
        match decision {
            ExtractionDecision::New { skill, .. } => {
                if let Some(existing) = self.id_of(&skill.name) {
                    return DecisionOutcome::DuplicateName {
                        existing_id: existing,
                        name: skill.name.clone(),
                    };
                }
                if config.jaccard_gate {
                    let best = self
                        .iter()
                        .map(|(id, s)| (id, action_type_jaccard(skill, s)))
                        .filter(|(_, j)| *j >= config.jaccard_threshold)
                        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
                    if let Some((existing, similarity)) = best {
                        return DecisionOutcome::NearDuplicate {
                            existing_id: existing,
                            name: skill.name.clone(),
                            similarity,
                        };
                    }
                }
                let id = self.insert(skill.clone()).expect("name checked above");
                DecisionOutcome::Inserted {
                    id,
                    name: skill.name.clone(),
                }
            }
            ExtractionDecision::Skip { existing_id, reason } => match self.known_id(existing_id) {
                Ok(id) => DecisionOutcome::Skipped {
                    existing_id: id,
                    reason: reason.clone(),
                },
                Err(reason) => DecisionOutcome::Rejected { reason },
            },
            ExtractionDecision::Update { existing_id, skill, .. } => {
                let id = match self.known_id(existing_id) {
                    Ok(id) => id,
                    Err(reason) => return DecisionOutcome::Rejected { reason },
                };
                match self.replace(id, skill.clone()) {
                    Ok(()) => DecisionOutcome::Updated {
                        id,
                        name: skill.name.clone(),
                    },
                    Err(e) => DecisionOutcome::Rejected { reason: e.to_string() },
                }
            }
        }
    }

    fn known_id(&self, raw: &str) -> Result<SkillId, String> {
        let id: SkillId = raw.parse().map_err(|e: CurationError| e.to_string())?;
        if self.skills.contains_key(&id) {
            Ok(id)
        } else {
            Err(CurationError::UnknownId(id).to_string())
        }
    }

    // -- persistence -------------------------------------------------------

    pub fn sidecar(
        &self,
        validations: &[ValidationResult],
        provider: Option<&dyn EmbeddingProvider>,
    ) -> CurationSidecar {
        let by_id: BTreeMap<SkillId, &ValidationResult> = validations.iter().map(|v| (v.skill_id, v)).collect();
        CurationSidecar {
            format_version: SIDECAR_FORMAT_VERSION,
            next_id: self.next_id(),
            entries: self
                .iter()
                .map(|(id, s)| SidecarEntry {
                    id,
                    name: s.name.clone(),
                    validation: by_id.get(&id).map(|v| (*v).clone()),
                })
                .collect(),
            filtered: validations
                .iter()
                .filter(|v| !self.skills.contains_key(&v.skill_id))
                .cloned()
                .collect(),
            embedding: provider.map(|p| EmbeddingInfo {
                provider: p.id(),
                dimension: p.dimension(),
            }),
        }
    }

    /// Loads a library file and, when present, its sidecar for ids.
    pub fn load(library: &Path, sidecar: Option<&Path>) -> Result<(Self, Option<CurationSidecar>), CurationError> {
        let file = SkillLibraryFile::load(library)?;
        let sidecar = match sidecar {
            Some(p) if p.exists() => Some(CurationSidecar::load(p)?),
            _ => None,
        };
        let mut lib = Self::new();
        match &sidecar {
            None => {
                for s in file.skills {
                    lib.insert(s)?;
                }
            }
            Some(sc) => {
                let ids: BTreeMap<&str, SkillId> = sc.entries.iter().map(|e| (e.name.as_str(), e.id)).collect();
                for s in file.skills {
                    let id = *ids
                        .get(s.name.as_str())
                        .ok_or_else(|| CurationError::SidecarMismatch(format!("no id for skill {:?}", s.name)))?;
                    if id >= sc.next_id || lib.skills.contains_key(&id) {
                        return Err(CurationError::SidecarMismatch(format!("bad id {id} for {:?}", s.name)));
                    }
                    lib.names.insert(s.name.clone(), id);
                    lib.skills.insert(id, s);
                }
                lib.next_id = sc.next_id.0;
            }
        }
        Ok((lib, sidecar))
    }

    pub fn save(
        &self,
        library: &Path,
        sidecar: &Path,
        validations: &[ValidationResult],
        provider: Option<&dyn EmbeddingProvider>,
    ) -> Result<(), CurationError> {
        self.to_file().save(library)?;
        self.sidecar(validations, provider).save(sidecar)
    }
}

/// Default sidecar location: `curation.json` next to the library file.
pub fn sidecar_path(library: &Path) -> PathBuf {
    library.with_file_name("curation.json")
}

/// Text embedded for neighbor lookup: name, description, parameter names.
pub fn candidate_text(skill: &Skill) -> String {
    let mut parts = vec![skill.name.as_str(), skill.description.as_str()];
    parts.extend(skill.parameters.iter().map(|p| p.name.as_str()));
    parts.join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: SkillId,
    pub similarity: f64,
}

pub fn exact_name_duplicate(library: &SkillLibrary, candidate: &Skill) -> bool {
    library.id_of(&candidate.name).is_some()
}

/// Multiset Jaccard similarity of the two skills' action-type bags.
pub fn action_type_jaccard(a: &Skill, b: &Skill) -> f64 {
    let bag = |s: &Skill| {
        let mut counts = [0usize; ActionType::ALL.len()];
        for t in s.action_types() {
            counts[ActionType::ALL.iter().position(|x| *x == t).expect("listed")] += 1;
        }
        counts
    };
    let (ca, cb) = (bag(a), bag(b));
    let inter: usize = ca.iter().zip(&cb).map(|(x, y)| x.min(y)).sum();
    let union: usize = ca.iter().zip(&cb).map(|(x, y)| x.max(y)).sum();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurationConfig {
    /// Auto-skip `new` skills whose action-type Jaccard reaches the threshold.
    pub jaccard_gate: bool,
    pub jaccard_threshold: f64,
    /// Neighbors included in extraction prompts.
    pub k: usize,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            jaccard_gate: true,
            jaccard_threshold: 0.8,
            k: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DecisionOutcome {
    Inserted { id: SkillId, name: String },
    Updated { id: SkillId, name: String },
    Skipped { existing_id: SkillId, reason: String },
    /// A `new` skill whose name already exists.
    DuplicateName { existing_id: SkillId, name: String },
    /// A `new` skill whose action shape matches an existing one.
    NearDuplicate { existing_id: SkillId, name: String, similarity: f64 },
    Rejected { reason: String },
}

impl DecisionOutcome {
    pub fn is_skip(&self) -> bool {
        matches!(
            self,
            Self::Skipped { .. } | Self::DuplicateName { .. } | Self::NearDuplicate { .. }
        )
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ValidationStatus {
    Pass,
    Fail { step_index: usize, kind: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub skill_id: SkillId,
    pub skill_name: String,
    #[serde(flatten)]
    pub status: ValidationStatus,
    pub fixture_url: Option<String>,
}

impl ValidationResult {
    pub fn passed(&self) -> bool {
        self.status == ValidationStatus::Pass
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Count a skill with no resolvable fixture page as passing.
    pub missing_fixture_passes: bool,
}

pub const NO_FIXTURE: &str = "no-fixture";

/// Placeholder arguments: declared defaults, else a fixed value per type.
pub fn synthesize_args(skill: &Skill) -> Map<String, Value> {
    skill
        .parameters
        .iter()
        .map(|p| {
            let v = p.default.clone().unwrap_or_else(|| match p.param_type {
                ParamType::Str => Value::from("test"),
                ParamType::Int => Value::from(1),
                ParamType::Float => Value::from(1.0),
                ParamType::Bool => Value::from(true),
            });
            (p.name.clone(), v)
        })
        .collect()
}

/// The fixture page a skill runs on: its `start_url` when the fixture
/// serves it, else the first fixture page whose normalized URL matches
/// `meta_url`.
pub fn resolve_fixture_url(skill: &Skill, fixture: &SiteFixture, aliases: &SiteAliases) -> Option<String> {
    if let Some(start) = &skill.start_url {
        if fixture.resolve(start).is_some() {
            return Some(start.clone());
        }
    }
    let pattern = UrlPattern::new(skill.meta_url.as_str()).ok()?;
    fixture
        .page_urls()
        .find(|u| normalize_url(u, aliases).is_ok_and(|n| pattern.matches(&n)))
        .map(str::to_owned)
}

/// Opens a simulated session at `url` and runs the skill. Shared by the
/// validator and the `execute` command.
pub fn execute_on_fixture(
    skill: &Skill,
    args: &Map<String, Value>,
    fixture: Arc<SiteFixture>,
    url: &str,
) -> Result<ExecutionReport, StepError> {
    let mut browser = SimulatedBrowser::new(fixture);
    browser.load(url)?;
    Ok(execute_grounded(&mut browser, skill, args))
}

pub fn validate_skill(
    id: SkillId,
    skill: &Skill,
    fixture: &Arc<SiteFixture>,
    aliases: &SiteAliases,
    config: &ValidationConfig,
) -> ValidationResult {
    let result = |status, fixture_url| ValidationResult {
        skill_id: id,
        skill_name: skill.name.clone(),
        status,
        fixture_url,
    };
    let Some(url) = resolve_fixture_url(skill, fixture, aliases) else {
        let status = if config.missing_fixture_passes {
            ValidationStatus::Pass
        } else {
            ValidationStatus::Fail {
                step_index: 0,
                kind: NO_FIXTURE.into(),
            }
        };
        return result(status, None);
    };
    let status = match execute_on_fixture(skill, &synthesize_args(skill), Arc::clone(fixture), &url) {
        Err(e) => ValidationStatus::Fail {
            step_index: 0,
            kind: e.kind.as_str().into(),
        },
        Ok(report) => match report.status {
            ExecutionStatus::Success => ValidationStatus::Pass,
            ExecutionStatus::Partial { step_index } | ExecutionStatus::Failed { step_index } => {
                let kind = match (&report.substitution_error, report.first_error()) {
                    (Some(_), _) => "substitution".to_owned(),
                    (None, Some((_, k))) => k.as_str().to_owned(),
                    (None, None) => "unknown".to_owned(),
                };
                ValidationStatus::Fail { step_index, kind }
            }
        },
    };
    result(status, Some(url))
}

/// Validates every skill, in id order.
pub fn validate_library(
    library: &SkillLibrary,
    fixture: &Arc<SiteFixture>,
    aliases: &SiteAliases,
    config: &ValidationConfig,
) -> Vec<ValidationResult> {
    library
        .iter()
        .map(|(id, s)| validate_skill(id, s, fixture, aliases, config))
        .collect()
}

/// Removes skills that failed validation; returns their ids.
pub fn filter_failed(library: &mut SkillLibrary, results: &[ValidationResult]) -> Vec<SkillId> {
    results
        .iter()
        .filter(|r| !r.passed())
        .filter_map(|r| library.remove(r.skill_id).map(|_| r.skill_id))
        .collect()
}

// ---------------------------------------------------------------------------
// Sidecar

pub const SIDECAR_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingInfo {
    pub provider: String,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarEntry {
    pub id: SkillId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationSidecar {
    pub format_version: u64,
    pub next_id: SkillId,
    pub entries: Vec<SidecarEntry>,
    /// Validation results of skills removed for failing validation.
    #[serde(default)]
    pub filtered: Vec<ValidationResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingInfo>,
}

impl CurationSidecar {
    /// Every recorded validation result, kept and filtered.
    pub fn validations(&self) -> Vec<ValidationResult> {
        self.entries
            .iter()
            .filter_map(|e| e.validation.clone())
            .chain(self.filtered.iter().cloned())
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self, CurationError> {
        let text = std::fs::read_to_string(path).map_err(|source| CurationError::Io {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CurationError::Sidecar {
            path: path.into(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serializes") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<(), CurationError> {
        std::fs::write(path, self.to_json()).map_err(|source| CurationError::Io {
            path: path.into(),
            source,
        })
    }
}

// ---------------------------------------------------------------------------
// Statistics

/// Library-level statistics; percentages are absent when their denominator
/// is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryStats {
    pub skill_count: usize,
    pub mean_interactive_ops: Option<f64>,
    pub success_rate: Option<f64>,
    pub utilization: Option<f64>,
    pub invoked_skills: Option<usize>,
}

pub fn library_stats(
    library: &SkillLibrary,
    validations: &[ValidationResult],
    run_log: Option<&RunLog>,
) -> LibraryStats {
    let n = library.len();
    let mean_interactive_ops = (n > 0).then(|| {
        library.skills().map(|s| s.interactive_op_count()).sum::<usize>() as f64 / n as f64
    });
    let success_rate = (!validations.is_empty()).then(|| {
        100.0 * validations.iter().filter(|v| v.passed()).count() as f64 / validations.len() as f64
    });
    let invoked = run_log.map(|log| {
        let used = log.invoked_skill_names();
        library.skills().filter(|s| used.contains(s.name.as_str())).count()
    });
    let utilization = invoked.filter(|_| n > 0).map(|k| 100.0 * k as f64 / n as f64);
    LibraryStats {
        skill_count: n,
        mean_interactive_ops,
        success_rate,
        utilization,
        invoked_skills: invoked,
    }
}
