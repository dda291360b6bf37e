//! Command-line entry points: scripted runs, the HTTP service, and one-shot
//! evaluation dumps.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use parley_core::error::ScenarioError;
use parley_core::scenario::{export_transcript, load_scenario, run_script, ExportFormat, ScenarioFile};
use parley_core::transcript::{NodeSummary, UserInput};
use parley_core::tree::ProposedBeliefTree;
use serde_json::json;

use crate::api::router;
use crate::store::SessionStore;

#[derive(Debug, Parser)]
#[command(name = "parley", version, about = "Collaborative proposal evaluation dialogue engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play a scenario's scripted user turns and print the transcript.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Script branch; defaults to the scenario's default branch.
        #[arg(long)]
        branch: Option<String>,
        /// Write the full trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Format printed on stdout.
        #[arg(long, default_value = "text-only")]
        format: ExportFormat,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, env = "PARLEY_SCENARIO_DIR", default_value = "scenarios")]
        scenario_dir: PathBuf,
        /// Append each session's inputs here and restore them on start.
        #[arg(long)]
        persist_dir: Option<PathBuf>,
    },
    /// Evaluate one belief of a scenario and dump its annotations as JSON.
    ///
    /// The id may name a belief in the system's knowledge base or a node of
    /// the first scripted proposal.
    Eval {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        belief: String,
    },
}

/// Exit status for input problems: missing files, parse or validation errors.
pub const EXIT_INPUT: u8 = 1;
/// Exit status for failures inside the engine.
pub const EXIT_ENGINE: u8 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Engine(_) => EXIT_ENGINE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            error: e.into(),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            branch,
            trace,
            format,
        } => run(&scenario, branch.as_deref(), trace.as_deref(), format),
        Command::Serve {
            port,
            host,
            scenario_dir,
            persist_dir,
        } => serve(SocketAddr::new(host, port), &scenario_dir, persist_dir).map_err(|error| Failure {
            code: EXIT_INPUT,
            error,
        }),
        Command::Eval { scenario, belief } => eval(&scenario, &belief),
    }
}

fn read_scenario(path: &Path) -> Result<ScenarioFile, Failure> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::input)?;
    Ok(load_scenario(&bytes)?)
}

fn run(path: &Path, branch: Option<&str>, trace: Option<&Path>, format: ExportFormat) -> Result<(), Failure> {
    let file = read_scenario(path)?;
    let session = run_script(&file, branch)?;
    if let Some(out) = trace {
        std::fs::write(out, export_transcript(&session, ExportFormat::FullTrace))
            .with_context(|| format!("cannot write {}", out.display()))
            .map_err(Failure::input)?;
    }
    let stdout = export_transcript(&session, format);
    emit(&stdout);
    eprintln!(
        "phase: {}, depth: {}, turns: {}",
        serde_json::to_value(session.phase).unwrap_or_default().as_str().unwrap_or("?"),
        session.depth(),
        session.transcript.turns.len()
    );
    Ok(())
}

fn eval(path: &Path, id: &str) -> Result<(), Failure> {
    let file = read_scenario(path)?;
    let kb = file.knowledge_base()?;
    let config = file.engine_config()?;
    let evaluator = parley_core::evaluation::Evaluator::with_thresholds(&kb, config.thresholds);

    let dump = if let Some(spec) = file.system_kb.beliefs.iter().find(|b| b.id == id) {
        let ann = evaluator.evaluate_statement(&spec.statement, None);
        json!({
            "belief": id,
            "statement": spec.statement,
            "status": ann.status(),
            "case": ann.case().number(),
            "annotation": ann,
        })
    } else {
        let tree = first_proposal(&file)
            .ok_or_else(|| Failure::input(anyhow!("no belief or proposal node with id '{id}'")))?;
        let tree = ProposedBeliefTree::from_payload(tree, &kb).map_err(|e| Failure {
            code: EXIT_ENGINE,
            error: e.into(),
        })?;
        let eval = evaluator.evaluate_tree(&tree);
        let node = eval
            .node(id)
            .ok_or_else(|| Failure::input(anyhow!("no belief or proposal node with id '{id}'")))?;
        json!({
            "belief": id,
            "statement": node.belief.statement,
            "summary": NodeSummary::from(node),
            "annotation": node.belief,
            "relation": node.relation,
        })
    };
    let mut text = serde_json::to_string_pretty(&dump).expect("dump serializes");
    text.push('\n');
    emit(text.as_bytes());
    Ok(())
}

/// Write to stdout, ignoring a reader that went away.
fn emit(bytes: &[u8]) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(bytes).and_then(|()| out.flush());
}

fn first_proposal(file: &ScenarioFile) -> Option<&parley_core::tree::TreePayload> {
    let script = file.script.as_ref()?;
    script.prelude.iter().find_map(|t| match &t.input {
        UserInput::Propose { tree } => Some(tree),
        UserInput::Respond { .. } => None,
    })
}

fn serve(addr: SocketAddr, scenario_dir: &Path, persist_dir: Option<PathBuf>) -> anyhow::Result<()> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let mut store = SessionStore::from_dir(scenario_dir)?;
    if let Some(dir) = persist_dir {
        store = store.with_persistence(dir);
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let restored = store.restore().await?;
        if restored > 0 {
            tracing::info!(restored, "sessions restored");
        }
        let app = router(Arc::new(store));
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!(%addr, "listening");
        axum::serve(listener, app).await?;
        Ok(())
    })
}
