//! HTTP+JSON routes over the session store.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parley_core::acts::DiscourseAct;
use parley_core::belief::{Statement, Strength};
use parley_core::dialogue::{BeliefTreeRecord, Phase, Session, StubRecord};
use parley_core::error::EngineError;
use parley_core::evaluation::TreeEvaluation;
use parley_core::scenario::{export_transcript, ExportFormat};
use parley_core::strategy::ActionInstance;
use parley_core::transcript::{NodeSummary, Reply, TraceEvent, Transcript, UserInput};
use parley_core::tree::{NodeId, ProposedBeliefTree, TreePayload};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::store::{SessionHandle, SessionStore};

pub type AppState = Arc<SessionStore>;

pub fn router(store: AppState) -> Router {
    Router::new()
        .route("/scenarios", get(list_scenarios))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/propose", post(propose))
        .route("/sessions/{id}/respond", post(respond))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/sessions/{id}/evaluate", post(evaluate))
        .with_state(store)
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Conflict(String),
    Unprocessable(String),
    BadRequest(String),
    Internal(String),
}

impl ApiError {
    fn parts(&self) -> (StatusCode, &'static str, &str) {
        match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not-found", m),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, "conflict", m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, "malformed", m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad-request", m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = self.parts();
        (status, Json(json!({"error": kind, "message": message}))).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let msg = e.to_string();
        match e {
            EngineError::MalformedTree(_) | EngineError::MalformedResponse(_) => ApiError::Unprocessable(msg),
            EngineError::SessionConcluded | EngineError::NoOpenAction | EngineError::PreconditionsStillOpen => {
                ApiError::Conflict(msg)
            }
            EngineError::MissingTemplate(_) | EngineError::Strategy(_) | EngineError::Evaluation(_) => {
                ApiError::Internal(msg)
            }
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::Unprocessable(e.body_text())
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        ApiError::Internal(format!("{e:#}"))
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub description: String,
    pub branches: Vec<String>,
}

async fn list_scenarios(State(store): State<AppState>) -> Json<Vec<ScenarioSummary>> {
    Json(
        store
            .scenarios()
            .map(|s| ScenarioSummary {
                name: s.name.clone(),
                description: s.description.clone(),
                branches: s.branch_names(),
            })
            .collect(),
    )
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub scenario: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    #[serde(flatten)]
    pub handle: SessionHandle,
    pub phase: Phase,
}

async fn create_session(
    State(store): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Created>)> {
    let Json(req) = body?;
    let handle = store
        .create(&req.scenario)
        .await?
        .ok_or_else(|| ApiError::NotFound(format!("unknown scenario '{}'", req.scenario)))?;
    Ok((
        StatusCode::CREATED,
        Json(Created {
            handle,
            phase: Phase::AwaitingProposal,
        }),
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDelta {
    pub phase: Phase,
    pub depth: usize,
    pub previous_phase: Phase,
    pub previous_depth: usize,
}

/// What one propose or respond call produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurnResponse {
    pub acts: Vec<DiscourseAct>,
    pub text: Vec<String>,
    pub state_delta: StateDelta,
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Deserialize)]
pub struct ProposeRequest {
    pub tree: TreePayload,
}

async fn propose(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ProposeRequest>, JsonRejection>,
) -> ApiResult<Json<TurnResponse>> {
    let Json(req) = body?;
    run_input(&store, &id, UserInput::Propose { tree: req.tree }).await
}

async fn respond(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Reply>, JsonRejection>,
) -> ApiResult<Json<TurnResponse>> {
    let Json(reply) = body?;
    run_input(&store, &id, UserInput::Respond { reply }).await
}

async fn run_input(store: &SessionStore, id: &str, input: UserInput) -> ApiResult<Json<TurnResponse>> {
    let entry = store.get(id).await.ok_or_else(|| unknown_session(id))?;
    let mut entry = entry.lock().await;
    let session = &mut entry.session;
    let (previous_phase, previous_depth) = (session.phase, session.depth());
    let before = session.transcript.turns.len();
    let acts = session.step(&input)?;
    store.record_input(id, &input)?;
    let new_turns = &session.transcript.turns[before..];
    Ok(Json(TurnResponse {
        acts,
        text: new_turns
            .iter()
            .filter(|t| t.input.is_none())
            .flat_map(|t| t.text.iter().cloned())
            .collect(),
        state_delta: StateDelta {
            phase: session.phase,
            depth: session.depth(),
            previous_phase,
            previous_depth,
        },
        trace: new_turns.iter().flat_map(|t| t.trace.iter().cloned()).collect(),
    }))
}

fn unknown_session(id: &str) -> ApiError {
    ApiError::NotFound(format!("unknown session '{id}'"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpenAction {
    #[serde(flatten)]
    pub action: ActionInstance,
    /// Satisfaction of each precondition disjunct, in recipe order.
    pub precondition_status: Vec<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSolvingLevel {
    pub stubs: Vec<StubRecord>,
    /// Innermost last.
    pub open_actions: Vec<OpenAction>,
    pub closed_actions: Vec<ActionInstance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeView {
    #[serde(flatten)]
    pub record: BeliefTreeRecord,
    /// Annotations per node in proposal order.
    pub summary: Vec<NodeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Levels {
    pub domain: Vec<StubRecord>,
    pub problem_solving: ProblemSolvingLevel,
    pub belief: Vec<TreeView>,
    pub discourse: Vec<DiscourseAct>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateView {
    pub handle: SessionHandle,
    pub phase: Phase,
    pub depth: usize,
    pub levels: Levels,
    pub mutual_beliefs: Vec<Statement>,
    pub transcript: Transcript,
}

fn summarize(tree: &ProposedBeliefTree, eval: &TreeEvaluation) -> Vec<NodeSummary> {
    tree.iter()
        .filter_map(|n| eval.node(&n.id))
        .map(NodeSummary::from)
        .collect()
}

pub fn state_view(handle: &SessionHandle, s: &Session) -> StateView {
    let m = &s.model;
    StateView {
        handle: handle.clone(),
        phase: s.phase,
        depth: s.depth(),
        levels: Levels {
            domain: m.domain.clone(),
            problem_solving: ProblemSolvingLevel {
                stubs: m.problem_solving_stubs.clone(),
                open_actions: m
                    .stack
                    .iter()
                    .map(|a| OpenAction {
                        precondition_status: a.precondition_status(&s.kb),
                        action: a.clone(),
                    })
                    .collect(),
                closed_actions: m.closed.clone(),
            },
            belief: m
                .trees
                .iter()
                .map(|r| TreeView {
                    summary: r.evaluation.as_ref().map(|e| summarize(&r.tree, e)).unwrap_or_default(),
                    case: r.evaluation.as_ref().map(|e| e.root().belief.case().number()),
                    record: r.clone(),
                })
                .collect(),
            discourse: m.acts.clone(),
        },
        mutual_beliefs: s.kb.mutual_beliefs().to_vec(),
        transcript: s.transcript.clone(),
    }
}

async fn state(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<StateView>> {
    let entry = store.get(&id).await.ok_or_else(|| unknown_session(&id))?;
    let entry = entry.lock().await;
    Ok(Json(state_view(&entry.handle, &entry.session)))
}

#[derive(Debug, Deserialize)]
pub struct TranscriptQuery {
    pub format: Option<String>,
}

async fn transcript(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<TranscriptQuery>,
) -> ApiResult<Response> {
    let format: ExportFormat = q
        .format
        .as_deref()
        .unwrap_or("full-trace")
        .parse()
        .map_err(|e: parley_core::error::ScenarioError| ApiError::BadRequest(e.to_string()))?;
    let entry = store.get(&id).await.ok_or_else(|| unknown_session(&id))?;
    let bytes = export_transcript(&entry.lock().await.session, format);
    let content_type = match format {
        ExportFormat::TextOnly => "text/plain; charset=utf-8",
        _ => "application/json",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

#[derive(Debug, Deserialize)]
pub struct EvaluateRequest {
    pub tree: TreePayload,
    /// Hypothetical endorsement strengths by node id.
    #[serde(default)]
    pub strengths: BTreeMap<NodeId, Strength>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub root: NodeId,
    pub case: u8,
    pub case_action: String,
    pub nodes: Vec<NodeSummary>,
}

/// Evaluate a tree against the session's current knowledge without
/// recording anything.
async fn evaluate(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<EvaluateRequest>, JsonRejection>,
) -> ApiResult<Json<EvaluateResponse>> {
    let Json(req) = body?;
    let entry = store.get(&id).await.ok_or_else(|| unknown_session(&id))?;
    let entry = entry.lock().await;
    let session = &entry.session;
    let mut tree = ProposedBeliefTree::from_payload(&req.tree, &session.kb)
        .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    for (node, strength) in &req.strengths {
        tree.set_strength(node, *strength)
            .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    }
    let eval = session.evaluator().evaluate_tree(&tree);
    let case = eval.root().belief.case();
    Ok(Json(EvaluateResponse {
        root: eval.root.clone(),
        case: case.number(),
        case_action: case.action().to_string(),
        nodes: summarize(&tree, &eval),
    }))
}
