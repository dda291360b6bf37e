//! Scenario files, scripted runs, transcript export and replay.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::acts::{DiscourseAct, Speaker, TemplateTable};
use crate::belief::{Belief, Expertise, KnowledgeBase, PartnerRecord, Proposition, Statement, Strength};
use crate::dialogue::{EngineConfig, Phase, Session};
use crate::error::ScenarioError;
use crate::evaluation::Thresholds;
use crate::strategy::{Recipe, StrategyRegistry};
use crate::transcript::{Reply, Turn, UserInput};
use crate::tree::TreePayload;

pub const TRACE_VERSION: &str = "trace-v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    pub arity: usize,
    pub topic: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpec {
    /// Topic area → expertise level.
    #[serde(default)]
    pub expertise: BTreeMap<String, Expertise>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agents {
    #[serde(default)]
    pub user: AgentSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefSpec {
    pub id: String,
    pub statement: Statement,
    /// `weak`, `strong` or `warranted`; checked on load.
    pub strength: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub id: String,
    pub child: Proposition,
    pub parent: Proposition,
    pub strength: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbSpec {
    #[serde(default)]
    pub beliefs: Vec<BeliefSpec>,
    #[serde(default)]
    pub relations: Vec<RelationSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptTurn {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub input: UserInput,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default)]
    pub prelude: Vec<ScriptTurn>,
    #[serde(default)]
    pub branches: BTreeMap<String, Vec<ScriptTurn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_branch: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub predicates: Vec<PredicateDecl>,
    #[serde(default)]
    pub agents: Agents,
    #[serde(default)]
    pub system_kb: KbSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partner_model: Vec<PartnerRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub recipes: Vec<Recipe>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub templates: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<Script>,
}

fn parse_strength(s: &str, id: &str) -> Result<Strength, ScenarioError> {
    Strength::ALL
        .into_iter()
        .find(|k| k.to_string() == s)
        .ok_or_else(|| ScenarioError::Validation(format!("'{id}': strength '{s}' is not weak, strong or warranted")))
}

/// Parse and validate a scenario file.
pub fn load_scenario(bytes: &[u8]) -> Result<ScenarioFile, ScenarioError> {
    let file: ScenarioFile = serde_json::from_slice(bytes)?;
    file.validate()?;
    Ok(file)
}

/// Serialize a scenario back to its file form.
pub fn export_scenario(file: &ScenarioFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("scenario serializes");
    s.push('\n');
    s
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut arity = BTreeMap::new();
        for p in &self.predicates {
            if arity.insert(p.name.as_str(), p.arity).is_some() {
                return Err(ScenarioError::Validation(format!("predicate '{}' declared twice", p.name)));
            }
        }
        let check = |p: &Proposition, ctx: &str| -> Result<(), ScenarioError> {
            match arity.get(p.predicate.as_str()) {
                None => Err(ScenarioError::Validation(format!("{ctx}: undeclared predicate '{}'", p.predicate))),
                Some(&n) if n != p.args.len() => Err(ScenarioError::Validation(format!(
                    "{ctx}: '{}' takes {n} argument(s), got {}",
                    p.predicate,
                    p.args.len()
                ))),
                Some(_) => Ok(()),
            }
        };
        let check_stmt = |s: &Statement, ctx: &str| s.propositions().into_iter().try_for_each(|p| check(p, ctx));
        let check_tree = |t: &TreePayload, ctx: &str| t.nodes.iter().try_for_each(|n| check(&n.statement, ctx));

        for b in &self.system_kb.beliefs {
            parse_strength(&b.strength, &b.id)?;
            check_stmt(&b.statement, &b.id)?;
        }
        for r in &self.system_kb.relations {
            parse_strength(&r.strength, &r.id)?;
            check(&r.child, &r.id)?;
            check(&r.parent, &r.id)?;
            if r.child.atom() == r.parent.atom() {
                return Err(ScenarioError::Validation(format!("'{}': a belief cannot support itself", r.id)));
            }
        }
        for rec in &self.partner_model {
            check_stmt(&rec.statement, "partner model")?;
            for p in rec.known_support.iter().flatten() {
                check(p, "partner model")?;
            }
        }
        let mut kinds = Vec::new();
        for r in &self.recipes {
            if kinds.contains(&r.strategy) {
                return Err(ScenarioError::Validation(format!("two recipes for strategy '{}'", r.strategy)));
            }
            kinds.push(r.strategy);
        }
        if let Some(script) = &self.script {
            let turns = script.prelude.iter().chain(script.branches.values().flatten());
            for t in turns {
                let ctx = t.label.as_deref().unwrap_or("script turn");
                match &t.input {
                    UserInput::Propose { tree } => check_tree(tree, ctx)?,
                    UserInput::Respond { reply } => {
                        if let Some(tree) = reply.tree() {
                            check_tree(tree, ctx)?;
                        }
                        if let Reply::RejectWithCounter { target, .. } = reply {
                            check_stmt(target, ctx)?;
                        }
                    }
                }
            }
            if let Some(b) = &script.default_branch {
                if !script.branches.contains_key(b) {
                    return Err(ScenarioError::Validation(format!("default branch '{b}' is not defined")));
                }
            }
        }
        Ok(())
    }

    pub fn knowledge_base(&self) -> Result<KnowledgeBase, ScenarioError> {
        let mut kb = KnowledgeBase::new();
        for p in &self.predicates {
            kb.set_topic(p.name.clone(), p.topic.clone());
        }
        for (topic, level) in &self.agents.user.expertise {
            kb.set_expertise(topic.clone(), *level);
        }
        for b in &self.system_kb.beliefs {
            let strength = parse_strength(&b.strength, &b.id)?;
            kb.adopt(Belief::own(b.id.clone(), b.statement.clone(), strength));
        }
        for r in &self.system_kb.relations {
            let strength = parse_strength(&r.strength, &r.id)?;
            let stmt = Statement::supports(r.child.clone(), r.parent.clone());
            kb.adopt(Belief::own(r.id.clone(), stmt, strength));
        }
        for rec in &self.partner_model {
            kb.record_partner(rec.statement.clone(), rec.known_support.clone());
        }
        Ok(kb)
    }

    pub fn engine_config(&self) -> Result<EngineConfig, ScenarioError> {
        let mut registry = StrategyRegistry::with_builtins();
        for r in &self.recipes {
            registry
                .override_recipe(r.clone())
                .map_err(|e| ScenarioError::Engine(e.into()))?;
        }
        let mut templates = TemplateTable::default();
        for (k, v) in &self.templates {
            templates = templates.with_override(k.clone(), v.clone());
        }
        Ok(EngineConfig {
            registry,
            templates,
            thresholds: self.thresholds.unwrap_or_default(),
        })
    }

    pub fn session(&self, id: impl Into<String>) -> Result<Session, ScenarioError> {
        Ok(Session::new(id, self.knowledge_base()?, self.engine_config()?))
    }

    pub fn branch_names(&self) -> Vec<String> {
        self.script
            .as_ref()
            .map(|s| s.branches.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// Prelude followed by the chosen (or default) branch.
    pub fn script_turns(&self, branch: Option<&str>) -> Result<Vec<ScriptTurn>, ScenarioError> {
        let Some(script) = &self.script else {
            return match branch {
                Some(b) => Err(ScenarioError::UnknownBranch(b.to_string())),
                None => Ok(Vec::new()),
            };
        };
        let mut turns = script.prelude.clone();
        if let Some(b) = branch.or(script.default_branch.as_deref()) {
            let extra = script
                .branches
                .get(b)
                .ok_or_else(|| ScenarioError::UnknownBranch(b.to_string()))?;
            turns.extend(extra.iter().cloned());
        }
        Ok(turns)
    }
}

/// Feed the scripted turns to a fresh session, stopping early if the
/// session concludes.
pub fn run_script(file: &ScenarioFile, branch: Option<&str>) -> Result<Session, ScenarioError> {
    let mut session = file.session(format!("{}-{}", file.name, branch.unwrap_or("default")))?;
    for turn in file.script_turns(branch)? {
        if session.phase.is_concluded() {
            break;
        }
        session.step(&turn.input)?;
    }
    Ok(session)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    FullTrace,
    ActsOnly,
    TextOnly,
}

impl FromStr for ExportFormat {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        match s {
            "full-trace" => Ok(ExportFormat::FullTrace),
            "acts-only" => Ok(ExportFormat::ActsOnly),
            "text-only" => Ok(ExportFormat::TextOnly),
            other => Err(ScenarioError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::FullTrace => "full-trace",
            ExportFormat::ActsOnly => "acts-only",
            ExportFormat::TextOnly => "text-only",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullTrace {
    pub version: String,
    pub session: String,
    pub phase: Phase,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActsTurn {
    pub index: usize,
    pub speaker: Speaker,
    pub acts: Vec<DiscourseAct>,
}

pub fn export_transcript(session: &Session, format: ExportFormat) -> Vec<u8> {
    let turns = &session.transcript.turns;
    match format {
        ExportFormat::FullTrace => {
            let trace = FullTrace {
                version: TRACE_VERSION.to_string(),
                session: session.id.clone(),
                phase: session.phase,
                turns: turns.clone(),
            };
            let mut s = serde_json::to_string_pretty(&trace).expect("trace serializes");
            s.push('\n');
            s.into_bytes()
        }
        ExportFormat::ActsOnly => {
            let acts: Vec<ActsTurn> = turns
                .iter()
                .map(|t| ActsTurn {
                    index: t.index,
                    speaker: t.speaker,
                    acts: t.acts.clone(),
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&acts).expect("acts serialize");
            s.push('\n');
            s.into_bytes()
        }
        ExportFormat::TextOnly => {
            let mut out = String::new();
            for t in turns {
                for line in &t.text {
                    out.push_str(t.speaker.label());
                    out.push_str(": ");
                    out.push_str(line);
                    out.push('\n');
                }
            }
            out.into_bytes()
        }
    }
}

/// Re-run the inputs recorded in a full trace against a fresh session and
/// check every turn comes out identical.
pub fn replay(file: &ScenarioFile, trace: &[u8]) -> Result<Session, ScenarioError> {
    let trace: FullTrace = serde_json::from_slice(trace)?;
    if trace.version != TRACE_VERSION {
        return Err(ScenarioError::Validation(format!("unsupported trace version '{}'", trace.version)));
    }
    let mut session = file.session(trace.session.clone())?;
    for input in trace.turns.iter().filter_map(|t| t.input.as_ref()) {
        session.step(input)?;
    }
    if session.transcript.turns != trace.turns {
        let at = session
            .transcript
            .turns
            .iter()
            .zip(&trace.turns)
            .position(|(a, b)| a != b)
            .unwrap_or(session.transcript.turns.len().min(trace.turns.len()));
        return Err(ScenarioError::Validation(format!("replay diverged at turn {at}")));
    }
    Ok(session)
}
