//! `skillgraph`: extract, curate, retrieve, execute and render web-agent
//! skills over local files.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error or unknown skill,
//! 3 partial execution, 4 failed execution.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{parse_mode, ConfigFile, Settings};

pub const EXIT_ERROR: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PARTIAL: u8 = 3;
pub const EXIT_FAILED: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "skillgraph", version, about = "Executable web-agent skills over local files")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Ablations are plain switches so each
/// configuration can be reproduced from the command line.
#[derive(Debug, Args)]
struct GlobalArgs {
    /// Skill library file (JSON)
    #[arg(long, global = true)]
    library: Option<PathBuf>,
    /// Curation sidecar (ids, validation results); defaults to curation.json next to the library
    #[arg(long, global = true)]
    sidecar: Option<PathBuf>,
    /// Host to site-prefix alias map (JSON object)
    #[arg(long, global = true)]
    aliases: Option<PathBuf>,
    /// Site fixture directory containing sitemap.json
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    /// TOML settings file; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Deployment mode: grounded, guided or mix
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Maximum skills surfaced per page
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Minimum action steps per extracted skill
    #[arg(long, global = true)]
    step_threshold: Option<usize>,
    /// Action-type Jaccard at which a new skill counts as a near-duplicate
    #[arg(long, global = true)]
    jaccard_threshold: Option<f64>,
    /// Disable the action-type Jaccard pre-gate
    #[arg(long, global = true)]
    no_jaccard_gate: bool,
    /// Existing skills shown to the extractor
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Keep skills without validating them on the fixtures
    #[arg(long, global = true)]
    no_validation: bool,
    /// Count skills with no fixture page as validated
    #[arg(long, global = true)]
    missing_fixture_passes: bool,
    /// Retrieve from the flat library instead of the URL graph
    #[arg(long, global = true)]
    no_graph: bool,
    /// Omit per-step guidance from tool descriptions
    #[arg(long, global = true)]
    no_guidance: bool,
    /// LLM client: replay:DIR, sequence:FILE or http
    #[arg(long, global = true)]
    llm: Option<String>,
    /// Record every LLM response into this replay directory
    #[arg(long, global = true)]
    record: Option<PathBuf>,
    /// Embedding provider: local or http
    #[arg(long, global = true)]
    embedding: Option<String>,
    /// Log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine skills from a trajectory corpus into the library
    Extract {
        /// Trajectory corpus (JSON lines)
        corpus: PathBuf,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        report: Option<PathBuf>,
        /// Only mine successful trajectories
        #[arg(long)]
        successes_only: bool,
    },
    /// Apply a stream of extraction decisions (JSON lines) to the library
    Curate {
        decisions: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the URL graph
    Index {
        #[arg(long)]
        json: bool,
    },
    /// List the skills surfaced on a page
    Retrieve {
        #[arg(long)]
        url: String,
        /// HTML of the page, used for element-presence filtering
        #[arg(long)]
        page: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run a skill on the site fixture
    Execute {
        skill: String,
        /// Arguments as a JSON object
        args: Option<String>,
        /// Start page; defaults to the page the validator would use
        #[arg(long)]
        url: Option<String>,
        /// Use the validator's synthesized arguments
        #[arg(long, conflicts_with = "args")]
        synthesize: bool,
        /// Also print the browser event log (JSON lines) to stderr
        #[arg(long)]
        events: bool,
    },
    /// Print the deployment surface for a page
    Render {
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        page: Option<PathBuf>,
        /// Print the activated guidance block for one skill instead
        #[arg(long, conflicts_with = "url")]
        activate: Option<String>,
    },
    /// Validate every skill on the site fixture
    Validate {
        /// Remove failing skills from the library
        #[arg(long)]
        filter: bool,
        #[arg(long)]
        json: bool,
    },
    /// Library, graph and run-log statistics
    Stats {
        #[arg(long)]
        run_log: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn settings(g: &GlobalArgs) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &g.config {
        s.apply_file(ConfigFile::load(path)?)?;
    }
    macro_rules! flag_opt {
        ($($field:ident),*) => { $(if g.$field.is_some() { s.$field = g.$field.clone(); })* };
    }
    flag_opt!(sidecar, aliases, fixtures, llm, record);
    if let Some(p) = &g.library {
        s.library = p.clone();
    }
    if let Some(m) = &g.mode {
        s.mode = parse_mode(m)?;
    }
    if let Some(c) = g.cap {
        s.cap = c;
    }
    if let Some(t) = g.step_threshold {
        s.step_threshold = t;
    }
    if let Some(t) = g.jaccard_threshold {
        s.curation.jaccard_threshold = t;
    }
    if let Some(k) = g.k {
        s.curation.k = k;
    }
    if let Some(e) = &g.embedding {
        s.embedding = e.clone();
    }
    s.curation.jaccard_gate &= !g.no_jaccard_gate;
    s.validation &= !g.no_validation;
    s.graph &= !g.no_graph;
    s.guidance &= !g.no_guidance;
    s.missing_fixture_passes |= g.missing_fixture_passes;
    s.check()?;
    Ok(s)
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => tracing_subscriber::filter::LevelFilter::WARN,
        1 => tracing_subscriber::filter::LevelFilter::INFO,
        _ => tracing_subscriber::filter::LevelFilter::DEBUG,
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(level)
        .with_target(false)
        .init();
}

fn run(cli: Cli) -> Result<u8> {
    let s = settings(&cli.global).map_err(commands::usage)?;
    match cli.command {
        Command::Extract {
            corpus,
            report,
            successes_only,
        } => commands::extract(&s, &corpus, report.as_deref(), successes_only),
        Command::Curate { decisions, report } => commands::curate(&s, &decisions, report.as_deref()),
        Command::Index { json } => commands::index(&s, json),
        Command::Retrieve { url, page, json } => commands::retrieve(&s, &url, page.as_deref(), json),
        Command::Execute {
            skill,
            args,
            url,
            synthesize,
            events,
        } => commands::execute(&s, &skill, args.as_deref(), url.as_deref(), synthesize, events),
        Command::Render { url, page, activate } => {
            commands::render(&s, url.as_deref(), page.as_deref(), activate.as_deref())
        }
        Command::Validate { filter, json } => commands::validate(&s, filter, json),
        Command::Stats { run_log, json } => commands::stats(&s, run_log.as_deref(), json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.global.verbose);
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.is::<commands::UsageError>() { EXIT_USAGE } else { EXIT_ERROR };
            ExitCode::from(code)
        }
    }
}
