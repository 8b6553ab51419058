//! Executable web-agent skills.
//!
//! A skill pairs a parameterized browser action program with per-step
//! natural-language guidance. This crate covers the full lifecycle:
//!
//! - [`skill`]: the skill record, schema validation and parameter binding
//! - [`graph`]: URL-pattern graph and context-aware retrieval
//! - [`page`]: HTML snapshots, element matching and a simulated browser
//! - [`deploy`]: grounded tools, guided instruction blocks, execution
//! - [`extraction`]: trajectory formatting, prompting and response parsing
//! - [`curation`]: online deduplication, neighbors, validation, statistics
//! - [`metrics`]: skill-usage and efficiency statistics over run logs

pub mod curation;
pub mod deploy;
pub mod embedding;
pub mod extraction;
pub mod graph;
pub mod llm;
pub mod metrics;
pub mod page;
pub mod skill;

pub use curation::{SkillLibrary, ValidationResult, ValidationStatus};
pub use deploy::{
    execute_grounded, filter_by_presence, register_tools, render_activated_guidance,
    render_available_skills, DeploymentMode, ExecutionReport, ExecutionStatus, ToolDescriptor,
};
pub use embedding::{EmbeddingProvider, LocalEmbedder};
pub use extraction::{ExtractionDecision, Trajectory};
pub use graph::{normalize_url, pattern_matches, SiteAliases, SkillGraph, UrlPattern};
pub use llm::LlmClient;
pub use metrics::RunLog;
pub use page::{match_element, parse_html, BrowserBackend, PageSnapshot, SimulatedBrowser, SiteFixture};
pub use skill::{ActionStep, ActionType, ElementRef, ParamType, ParameterSpec, Skill, SkillLibraryFile};

#[cfg(test)]
pub(crate) mod test_support {
    use crate::skill::Skill;

    pub(crate) const SEARCH_SKILL_JSON: &str = include_str!("../tests/fixtures/search_skill.json");

    pub(crate) fn search_skill() -> Skill {
        Skill::from_json(SEARCH_SKILL_JSON).expect("reference skill parses")
    }
}
