use thiserror::Error;

use crate::belief::Strength;
use crate::evaluation::TriState;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse '{input}': {reason}")]
pub struct ParseError {
    pub input: String,
    pub reason: String,
}

impl ParseError {
    pub fn new(input: &str, reason: impl Into<String>) -> Self {
        Self {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("belief '{0}' has no endorsements")]
    NoEndorsement(String),
    #[error("belief '{id}' states strength {stated} but its endorsements give {endorsed}")]
    StrengthMismatch {
        id: String,
        stated: Strength,
        endorsed: Strength,
    },
    #[error("{0} cannot support itself")]
    SelfSupport(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("duplicate node id '{0}'")]
    DuplicateId(String),
    #[error("unknown node id '{0}'")]
    UnknownNode(String),
    #[error("node '{0}' is reachable twice or lies on a cycle")]
    Cycle(String),
    #[error("node '{0}' is not reachable from the root")]
    Unreachable(String),
    #[error("node '{0}' must carry a relation to its parent")]
    MissingRelation(String),
    #[error("root '{0}' must not carry a relation")]
    RootRelation(String),
    #[error("relation of node '{node}' names parent {found} but the parent node holds {expected}")]
    RelationMismatch {
        node: String,
        expected: String,
        found: String,
    },
    #[error("node '{0}' must be a proposition, not a relation")]
    NotAFact(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    MalformedTree(#[from] TreeError),
    #[error("lower bound {lower:?} exceeds upper bound {upper:?}")]
    ImpossibleCombination { upper: TriState, lower: TriState },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FocusError {
    #[error("node is already decided; no information-sharing needed")]
    NotUnsure,
    #[error("no subset of uncertain evidence resolves the node")]
    NoResolvingSet,
    #[error("unknown tree node '{0}'")]
    UnknownNode(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("applicability condition violated for {recipe}: {condition}")]
    ApplicabilityViolation { recipe: String, condition: String },
    #[error("no strategy registered under '{0}'")]
    UnknownStrategy(String),
    #[error("no registered strategy applies")]
    NoApplicableStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    MalformedTree(#[from] TreeError),
    #[error("session has concluded")]
    SessionConcluded,
    #[error("no information-sharing action is open")]
    NoOpenAction,
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("preconditions of the open action are still unsatisfied")]
    PreconditionsStillOpen,
    #[error("no template for act kind '{0}'")]
    MissingTemplate(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scenario validation error: {0}")]
    Validation(String),
    #[error("unknown export format '{0}'")]
    UnknownFormat(String),
    #[error("unknown script branch '{0}'")]
    UnknownBranch(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
