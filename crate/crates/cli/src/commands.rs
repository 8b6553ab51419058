use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

use skillgraph_core::curation::{
    execute_on_fixture, filter_failed, library_stats, resolve_fixture_url, synthesize_args, validate_library,
    CurationSidecar, DecisionOutcome, SkillId, SkillLibrary, ValidationConfig, ValidationResult,
};
use skillgraph_core::deploy::{deployment_surface, render_activated_guidance, ExecutionStatus, ToolOptions};
use skillgraph_core::embedding::{EmbeddingProvider, HttpEmbedder, LocalEmbedder};
use skillgraph_core::extraction::{extract_from_corpus, load_corpus, DecisionRecord, ExtractionConfig, ExtractionDecision};
use skillgraph_core::graph::{retrieve_flat, SiteAliases, SkillGraph};
use skillgraph_core::llm::{GenerationSettings, HttpClient, LlmClient, RecordingClient, ReplayClient, SequenceClient};
use skillgraph_core::metrics::{fmt_opt, text_table, usage_report, RunLog};
use skillgraph_core::page::{event_log_jsonl, parse_html, PageSnapshot, SiteFixture};
use skillgraph_core::skill::Skill;

use crate::config::Settings;
use crate::{EXIT_ERROR, EXIT_FAILED, EXIT_PARTIAL};

/// An error caused by the invocation rather than the inputs' contents.
#[derive(Debug)]
pub struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(e: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(UsageError(format!("{e:#}")))
}

// ---------------------------------------------------------------------------
// Loading

fn load_aliases(s: &Settings) -> Result<SiteAliases> {
    let Some(path) = &s.aliases else {
        return Ok(SiteAliases::new());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read aliases {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid aliases {}", path.display()))
}

fn load_fixture(s: &Settings) -> Result<Arc<SiteFixture>> {
    let dir = s.fixtures.as_ref().ok_or_else(|| usage("--fixtures is required"))?;
    Ok(Arc::new(SiteFixture::load(dir)?))
}

/// Loads the library and its sidecar. A missing library file is an empty
/// library only when `allow_missing` is set.
fn load_library(s: &Settings, allow_missing: bool) -> Result<(SkillLibrary, Option<CurationSidecar>)> {
    if allow_missing && !s.library.exists() {
        return Ok((SkillLibrary::new(), None));
    }
    let sidecar = s.sidecar_path();
    SkillLibrary::load(&s.library, Some(&sidecar)).with_context(|| format!("cannot load library {}", s.library.display()))
}

fn load_page(url: &str, page: Option<&Path>) -> Result<Option<PageSnapshot>> {
    page.map(|p| {
        let html = std::fs::read_to_string(p).with_context(|| format!("cannot read page {}", p.display()))?;
        Ok(parse_html(&html, url))
    })
    .transpose()
}

fn embedding_provider(s: &Settings) -> Result<Box<dyn EmbeddingProvider>> {
    match s.embedding.as_str() {
        "local" => Ok(Box::new(LocalEmbedder::default())),
        "http" => Ok(Box::new(HttpEmbedder::from_env()?)),
        other => Err(usage(format!("unknown embedding provider {other:?} (expected local or http)"))),
    }
}

fn llm_client(s: &Settings) -> Result<Box<dyn LlmClient>> {
    let spec = s
        .llm
        .as_deref()
        .ok_or_else(|| usage("--llm is required (replay:DIR, sequence:FILE or http)"))?;
    let inner: Box<dyn LlmClient> = match spec.split_once(':') {
        Some(("replay", dir)) => Box::new(ReplayClient::new(dir)),
        Some(("sequence", file)) => Box::new(SequenceClient::load(Path::new(file))?),
        None if spec == "http" => Box::new(HttpClient::from_env()?),
        _ => return Err(usage(format!("unknown LLM client {spec:?}"))),
    };
    Ok(match &s.record {
        Some(dir) => Box::new(RecordingClient::new(inner, dir)),
        None => inner,
    })
}

fn find_skill<'a>(lib: &'a SkillLibrary, name: &str) -> Result<&'a Skill> {
    lib.id_of(name)
        .and_then(|id| lib.get(id))
        .ok_or_else(|| usage(format!("unknown skill {name:?}")))
}

// ---------------------------------------------------------------------------
// extract / curate

#[derive(Debug, Default, Serialize)]
struct CurationCounts {
    new: usize,
    updated: usize,
    skipped: usize,
    rejected: usize,
    filtered: usize,
}

impl CurationCounts {
    fn tally<'a>(outcomes: impl IntoIterator<Item = &'a DecisionOutcome>) -> Self {
        let mut c = Self::default();
        for o in outcomes {
            match o {
                DecisionOutcome::Inserted { .. } => c.new += 1,
                DecisionOutcome::Updated { .. } => c.updated += 1,
                DecisionOutcome::Rejected { .. } => c.rejected += 1,
                _ if o.is_skip() => c.skipped += 1,
                _ => {}
            }
        }
        c
    }
}

/// Validates (unless disabled), drops failures and writes library and
/// sidecar. Returns the ids removed.
fn finish_curation(
    s: &Settings,
    lib: &mut SkillLibrary,
    previous: Option<CurationSidecar>,
    provider: Option<&dyn EmbeddingProvider>,
) -> Result<Vec<SkillId>> {
    let mut by_id: BTreeMap<SkillId, ValidationResult> = previous
        .map(|sc| sc.validations())
        .unwrap_or_default()
        .into_iter()
        .map(|v| (v.skill_id, v))
        .collect();
    let mut filtered = Vec::new();
    if s.validation {
        let fixture = load_fixture(s).context("validation needs a site fixture (or pass --no-validation)")?;
        let config = ValidationConfig {
            missing_fixture_passes: s.missing_fixture_passes,
        };
        let results = validate_library(lib, &fixture, &load_aliases(s)?, &config);
        filtered = filter_failed(lib, &results);
        by_id.extend(results.into_iter().map(|v| (v.skill_id, v)));
    }
    let validations: Vec<ValidationResult> = by_id.into_values().collect();
    lib.save(&s.library, &s.sidecar_path(), &validations, provider)?;
    Ok(filtered)
}

fn write_report(report: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write report {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn extract(s: &Settings, corpus: &Path, report_path: Option<&Path>, successes_only: bool) -> Result<u8> {
    let corpus = load_corpus(corpus)?;
    let (mut lib, sidecar) = load_library(s, true)?;
    let mut client = llm_client(s)?;
    let provider = embedding_provider(s)?;
    let config = ExtractionConfig {
        step_threshold: s.step_threshold,
        successes_only,
        settings: GenerationSettings {
            temperature: s.temperature,
            max_tokens: s.max_tokens,
        },
        curation: s.curation,
        ..ExtractionConfig::default()
    };
    let report = extract_from_corpus(&corpus, &mut lib, client.as_mut(), provider.as_ref(), &config)?;
    let filtered = finish_curation(s, &mut lib, sidecar, Some(provider.as_ref()))?;
    let mut counts = CurationCounts::tally(report.records.iter().map(|r| &r.outcome));
    counts.filtered = filtered.len();
    let out = json!({
        "trajectories": report.trajectories,
        "skipped_trajectories": report.skipped_trajectories,
        "counts": counts,
        "validation": s.validation,
        "library_size": lib.len(),
        "filtered_ids": filtered,
        "records": report.records,
        "diagnostics": report.diagnostics,
    });
    write_report(&out, report_path)?;
    Ok(0)
}

fn parse_decisions(text: &str) -> Result<Vec<ExtractionDecision>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("decision line {}", i + 1)))
        .collect()
}

pub fn curate(s: &Settings, decisions: &Path, report_path: Option<&Path>) -> Result<u8> {
    let text =
        std::fs::read_to_string(decisions).with_context(|| format!("cannot read decisions {}", decisions.display()))?;
    let decisions = parse_decisions(&text)?;
    let (mut lib, sidecar) = load_library(s, true)?;
    let records: Vec<DecisionRecord> = decisions
        .into_iter()
        .enumerate()
        .map(|(i, decision)| {
            let outcome = lib.apply_decision(&decision, &s.curation);
            DecisionRecord {
                trajectory: i,
                decision,
                outcome,
            }
        })
        .collect();
    let filtered = finish_curation(s, &mut lib, sidecar, None)?;
    let mut counts = CurationCounts::tally(records.iter().map(|r| &r.outcome));
    counts.filtered = filtered.len();
    let outcomes: Vec<&DecisionOutcome> = records.iter().map(|r| &r.outcome).collect();
    let out = json!({
        "decisions": records.len(),
        "counts": counts,
        "validation": s.validation,
        "library_size": lib.len(),
        "next_id": lib.next_id(),
        "filtered_ids": filtered,
        "outcomes": outcomes,
    });
    write_report(&out, report_path)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// index / retrieve / render

fn graph(s: &Settings, lib: &SkillLibrary) -> Result<SkillGraph> {
    Ok(SkillGraph::from_skills(lib.skills(), load_aliases(s)?).with_retrieval_cap(s.cap))
}

pub fn index(s: &Settings, as_json: bool) -> Result<u8> {
    let (lib, _) = load_library(s, false)?;
    let g = graph(s, &lib)?;
    if as_json {
        let nodes: Map<String, Value> = g
            .nodes()
            .map(|(p, skills)| (p.to_string(), skills.iter().map(|s| Value::from(s.name.as_str())).collect()))
            .collect();
        println!("{}", serde_json::to_string_pretty(&json!({"nodes": nodes, "stats": g.stats()}))?);
    } else {
        for (pattern, skills) in g.nodes() {
            println!("{pattern} ({})", skills.len());
            for skill in skills {
                println!("  {}", skill.name);
            }
        }
        let st = g.stats();
        println!(
            "{} skills, {} nodes, {:.2} skills/node",
            st.skill_count, st.node_count, st.mean_skills_per_node
        );
    }
    Ok(0)
}

/// Skills surfaced at `url`: graph retrieval, or the ranked flat library
/// when the graph is disabled.
fn surfaced<'a>(
    s: &Settings,
    lib: &'a SkillLibrary,
    g: &'a SkillGraph,
    url: &str,
    page: Option<&PageSnapshot>,
) -> Result<Vec<&'a Skill>> {
    if s.graph {
        g.retrieve(url, page).map_err(usage)
    } else {
        Ok(retrieve_flat(lib.skills(), page, s.cap))
    }
}

pub fn retrieve(s: &Settings, url: &str, page: Option<&Path>, as_json: bool) -> Result<u8> {
    let (lib, _) = load_library(s, false)?;
    let g = graph(s, &lib)?;
    let page = load_page(url, page)?;
    let skills = surfaced(s, &lib, &g, url, page.as_ref())?;
    if as_json {
        let list: Vec<Value> = skills
            .iter()
            .map(|k| json!({"name": k.name, "description": k.description}))
            .collect();
        println!("{}", serde_json::to_string_pretty(&list)?);
    } else {
        for k in skills {
            println!("{}\t{}", k.name, k.description);
        }
    }
    Ok(0)
}

pub fn render(s: &Settings, url: Option<&str>, page: Option<&Path>, activate: Option<&str>) -> Result<u8> {
    let (lib, _) = load_library(s, false)?;
    if let Some(name) = activate {
        print!("{}", render_activated_guidance(find_skill(&lib, name)?));
        return Ok(0);
    }
    let url = url.ok_or_else(|| usage("render needs --url or --activate"))?;
    let g = graph(s, &lib)?;
    let page = load_page(url, page)?;
    let skills = surfaced(s, &lib, &g, url, page.as_ref())?;
    let options = ToolOptions {
        include_guidance: s.guidance,
    };
    let surface = deployment_surface(s.mode, &skills, page.as_ref(), options)?;
    print!("{}", surface.render());
    Ok(0)
}

// ---------------------------------------------------------------------------
// execute / validate

pub fn execute(
    s: &Settings,
    name: &str,
    args: Option<&str>,
    url: Option<&str>,
    synthesize: bool,
    events: bool,
) -> Result<u8> {
    let (lib, _) = load_library(s, false)?;
    let skill = find_skill(&lib, name)?;
    let args: Map<String, Value> = match args {
        _ if synthesize => synthesize_args(skill),
        Some(text) => serde_json::from_str(text).map_err(|e| usage(format!("arguments must be a JSON object: {e}")))?,
        None => Map::new(),
    };
    let fixture = load_fixture(s)?;
    let start = match url {
        Some(u) => u.to_owned(),
        None => resolve_fixture_url(skill, &fixture, &load_aliases(s)?)
            .ok_or_else(|| anyhow!("no fixture page for skill {name:?}; pass --url"))?,
    };
    let report = execute_on_fixture(skill, &args, fixture, &start)
        .map_err(|e| anyhow!("cannot open {start}: {}", e.message))?;
    print!("{}", report.to_json());
    if events {
        eprint!("{}", event_log_jsonl(&report.events));
    }
    Ok(match report.status {
        ExecutionStatus::Success => 0,
        ExecutionStatus::Partial { .. } => EXIT_PARTIAL,
        ExecutionStatus::Failed { .. } => EXIT_FAILED,
    })
}

pub fn validate(s: &Settings, filter: bool, as_json: bool) -> Result<u8> {
    let (mut lib, _) = load_library(s, false)?;
    let fixture = load_fixture(s)?;
    let config = ValidationConfig {
        missing_fixture_passes: s.missing_fixture_passes,
    };
    let results = validate_library(&lib, &fixture, &load_aliases(s)?, &config);
    if as_json {
        for r in &results {
            println!("{}", serde_json::to_string(r)?);
        }
    } else {
        for r in &results {
            let status = match &r.status {
                skillgraph_core::ValidationStatus::Pass => "pass".to_owned(),
                skillgraph_core::ValidationStatus::Fail { step_index, kind } => format!("fail({step_index}) {kind}"),
            };
            println!("{}\t{}\t{status}", r.skill_id, r.skill_name);
        }
        let passed = results.iter().filter(|r| r.passed()).count();
        println!("{passed}/{} passed", results.len());
    }
    if filter {
        filter_failed(&mut lib, &results);
    }
    lib.save(&s.library, &s.sidecar_path(), &results, None)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// stats

pub fn stats(s: &Settings, run_log: Option<&Path>, as_json: bool) -> Result<u8> {
    let mut problems = Vec::new();
    let (lib, sidecar) = match load_library(s, false) {
        Ok(x) => x,
        Err(e) => {
            problems.push(format!("library: {e:#}"));
            (SkillLibrary::new(), None)
        }
    };
    let log = match run_log.map(RunLog::load).transpose() {
        Ok(l) => l,
        Err(e) => {
            problems.push(format!("run log: {e}"));
            None
        }
    };
    let validations = sidecar.map(|sc| sc.validations()).unwrap_or_default();
    let lib_stats = library_stats(&lib, &validations, log.as_ref());
    let graph_stats = match load_aliases(s) {
        Ok(aliases) => Some(SkillGraph::from_skills(lib.skills(), aliases).stats()),
        Err(e) => {
            problems.push(format!("aliases: {e:#}"));
            None
        }
    };
    let usage = log.as_ref().map(usage_report);
    if as_json {
        let out = json!({"library": lib_stats, "graph": graph_stats, "usage": usage, "problems": problems});
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        let mut rows = vec![
            ("Skills".to_owned(), lib_stats.skill_count.to_string()),
            ("Avg. interactive ops".to_owned(), fmt_opt(lib_stats.mean_interactive_ops)),
            ("SR (%)".to_owned(), fmt_opt(lib_stats.success_rate)),
            ("Utilization (%)".to_owned(), fmt_opt(lib_stats.utilization)),
        ];
        if let Some(g) = &graph_stats {
            rows.push(("Graph nodes".to_owned(), g.node_count.to_string()));
            rows.push(("Skills per node".to_owned(), format!("{:.2}", g.mean_skills_per_node)));
        }
        if let Some(u) = &usage {
            rows.extend(u.rows());
        }
        print!("{}", text_table(&rows));
        for p in &problems {
            eprintln!("warning: {p}");
        }
    }
    // Whatever loaded is still reported; the exit code flags the rest.
    Ok(if problems.is_empty() { 0 } else { EXIT_ERROR })
}
