//! Settings merged from defaults, an optional TOML file, and flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use skillgraph_core::curation::CurationConfig;
use skillgraph_core::deploy::DeploymentMode;
use skillgraph_core::graph::DEFAULT_RETRIEVAL_CAP;

/// File form of the settings. Every key is optional; relative paths are
/// resolved against the config file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub library: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
    pub mode: Option<String>,
    pub cap: Option<usize>,
    pub step_threshold: Option<usize>,
    pub jaccard_threshold: Option<f64>,
    pub jaccard_gate: Option<bool>,
    pub k: Option<usize>,
    pub validation: Option<bool>,
    pub missing_fixture_passes: Option<bool>,
    pub graph: Option<bool>,
    pub guidance: Option<bool>,
    pub llm: Option<String>,
    pub record: Option<PathBuf>,
    pub embedding: Option<String>,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: Self = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.library,
            &mut cfg.sidecar,
            &mut cfg.aliases,
            &mut cfg.fixtures,
            &mut cfg.record,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub library: PathBuf,
    pub sidecar: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
    pub mode: DeploymentMode,
    pub cap: usize,
    pub step_threshold: usize,
    pub curation: CurationConfig,
    pub validation: bool,
    pub missing_fixture_passes: bool,
    pub graph: bool,
    pub guidance: bool,
    pub llm: Option<String>,
    pub record: Option<PathBuf>,
    pub embedding: String,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            library: PathBuf::from("skills.json"),
            sidecar: None,
            aliases: None,
            fixtures: None,
            mode: DeploymentMode::Grounded,
            cap: DEFAULT_RETRIEVAL_CAP,
            step_threshold: skillgraph_core::extraction::DEFAULT_STEP_THRESHOLD,
            curation: CurationConfig::default(),
            validation: true,
            missing_fixture_passes: false,
            graph: true,
            guidance: true,
            llm: None,
            record: None,
            embedding: "local".into(),
            temperature: None,
            max_tokens: None,
        }
    }
}

pub fn parse_mode(s: &str) -> Result<DeploymentMode> {
    match DeploymentMode::parse(s) {
        Some(m) => Ok(m),
        None => bail!("unknown mode {s:?} (expected grounded, guided or mix)"),
    }
}

impl Settings {
    pub fn apply_file(&mut self, f: ConfigFile) -> Result<()> {
        macro_rules! take {
            ($($field:ident),*) => { $(if let Some(v) = f.$field { self.$field = v; })* };
        }
        take!(library, cap, step_threshold, validation, missing_fixture_passes, graph, guidance, embedding);
        macro_rules! take_opt {
            ($($field:ident),*) => { $(if f.$field.is_some() { self.$field = f.$field; })* };
        }
        take_opt!(sidecar, aliases, fixtures, llm, record, temperature, max_tokens);
        if let Some(m) = f.mode {
            self.mode = parse_mode(&m)?;
        }
        if let Some(t) = f.jaccard_threshold {
            self.curation.jaccard_threshold = t;
        }
        if let Some(g) = f.jaccard_gate {
            self.curation.jaccard_gate = g;
        }
        if let Some(k) = f.k {
            self.curation.k = k;
        }
        Ok(())
    }

    pub fn sidecar_path(&self) -> PathBuf {
        self.sidecar
            .clone()
            .unwrap_or_else(|| skillgraph_core::curation::sidecar_path(&self.library))
    }

    pub fn check(&self) -> Result<()> {
        if self.cap == 0 {
            bail!("retrieval cap must be positive");
        }
        if self.step_threshold == 0 {
            bail!("step threshold must be positive");
        }
        if !(0.0..=1.0).contains(&self.curation.jaccard_threshold) {
            bail!("Jaccard threshold must be within [0, 1]");
        }
        Ok(())
    }
}
