//! In-memory session registry with optional append-only persistence.
//!
//! Each session sits behind its own async mutex, so requests to one session
//! queue while different sessions proceed in parallel. When a persistence
//! directory is configured, every accepted user input is appended to
//! `<dir>/<session-id>.jsonl` and [`SessionStore::restore`] rebuilds the
//! sessions from those files after a restart.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context};
use parley_core::dialogue::Session;
use parley_core::scenario::{load_scenario, ScenarioFile};
use parley_core::transcript::UserInput;
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionHandle {
    pub session_id: String,
    pub scenario: String,
    /// Position of the creation in the server's lifetime.
    pub created_at: u64,
}

#[derive(Debug)]
pub struct SessionEntry {
    pub handle: SessionHandle,
    pub session: Session,
}

pub type SharedEntry = Arc<Mutex<SessionEntry>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
enum LogRecord {
    Created { handle: SessionHandle },
    Input { input: UserInput },
}

#[derive(Debug)]
pub struct SessionStore {
    scenarios: BTreeMap<String, ScenarioFile>,
    sessions: RwLock<HashMap<String, SharedEntry>>,
    counter: AtomicU64,
    persist_dir: Option<PathBuf>,
}

impl SessionStore {
    pub fn new(scenarios: impl IntoIterator<Item = ScenarioFile>) -> Self {
        Self {
            scenarios: scenarios.into_iter().map(|s| (s.name.clone(), s)).collect(),
            sessions: RwLock::new(HashMap::new()),
            counter: AtomicU64::new(0),
            persist_dir: None,
        }
    }

    /// Load every `*.scenario` file in `dir`.
    pub fn from_dir(dir: &Path) -> anyhow::Result<Self> {
        let mut files = Vec::new();
        for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "scenario") {
                let bytes = std::fs::read(&path)?;
                files.push(load_scenario(&bytes).with_context(|| format!("loading {}", path.display()))?);
            }
        }
        if files.is_empty() {
            bail!("no .scenario files in {}", dir.display());
        }
        Ok(Self::new(files))
    }

    pub fn with_persistence(mut self, dir: impl Into<PathBuf>) -> Self {
        self.persist_dir = Some(dir.into());
        self
    }

    pub fn scenarios(&self) -> impl Iterator<Item = &ScenarioFile> {
        self.scenarios.values()
    }

    pub fn scenario(&self, name: &str) -> Option<&ScenarioFile> {
        self.scenarios.get(name)
    }

    /// Start a session on a known scenario. `None` when the scenario is unknown.
    pub async fn create(&self, scenario: &str) -> anyhow::Result<Option<SessionHandle>> {
        let Some(file) = self.scenarios.get(scenario) else {
            return Ok(None);
        };
        let n = self.counter.fetch_add(1, Ordering::SeqCst) + 1;
        let handle = SessionHandle {
            session_id: format!("s{n}"),
            scenario: scenario.to_string(),
            created_at: n,
        };
        let session = file.session(handle.session_id.clone())?;
        self.append(&handle.session_id, &LogRecord::Created { handle: handle.clone() })?;
        let entry = Arc::new(Mutex::new(SessionEntry {
            handle: handle.clone(),
            session,
        }));
        self.sessions.write().await.insert(handle.session_id.clone(), entry);
        Ok(Some(handle))
    }

    pub async fn get(&self, id: &str) -> Option<SharedEntry> {
        self.sessions.read().await.get(id).cloned()
    }

    /// Record an input the engine accepted for `id`.
    pub fn record_input(&self, id: &str, input: &UserInput) -> anyhow::Result<()> {
        self.append(id, &LogRecord::Input { input: input.clone() })
    }

    fn append(&self, id: &str, record: &LogRecord) -> anyhow::Result<()> {
        let Some(dir) = &self.persist_dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(format!("{id}.jsonl")))?;
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
        Ok(())
    }

    /// Rebuild sessions from the persistence directory by replaying their
    /// logged inputs. Returns how many sessions were restored.
    pub async fn restore(&self) -> anyhow::Result<usize> {
        let Some(dir) = &self.persist_dir else {
            return Ok(0);
        };
        if !dir.exists() {
            return Ok(0);
        }
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        paths.sort();
        let mut sessions = self.sessions.write().await;
        for path in &paths {
            let text = std::fs::read_to_string(path)?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            let first = lines.next().with_context(|| format!("{} is empty", path.display()))?;
            let LogRecord::Created { handle } = serde_json::from_str(first)? else {
                bail!("{} does not start with a created record", path.display());
            };
            let file = self
                .scenarios
                .get(&handle.scenario)
                .with_context(|| format!("{}: unknown scenario '{}'", path.display(), handle.scenario))?;
            let mut session = file.session(handle.session_id.clone())?;
            for line in lines {
                if let LogRecord::Input { input } = serde_json::from_str(line)? {
                    session
                        .step(&input)
                        .with_context(|| format!("{}: replay failed", path.display()))?;
                }
            }
            self.counter.fetch_max(handle.created_at, Ordering::SeqCst);
            sessions.insert(
                handle.session_id.clone(),
                Arc::new(Mutex::new(SessionEntry { handle, session })),
            );
        }
        Ok(paths.len())
    }
}
