//! Turn log and per-turn trace records.

use serde::{Deserialize, Serialize};

use crate::acts::{ActStatus, DiscourseAct, Speaker};
use crate::belief::Statement;
use crate::evaluation::{NodeEvaluation, TriState};
use crate::focus::{FocusMember, FocusPath, FocusRationale};
use crate::strategy::{ActionStatus, StrategyKind};
use crate::tree::{NodeId, TreePayload};

/// A structured reply to an open information-sharing action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reply {
    /// Accept what the system presented.
    Accept,
    /// Dispute one presented statement by offering evidence against it.
    RejectWithCounter { target: Statement, tree: TreePayload },
    /// Give the support asked for; the tree's root is the questioned belief.
    ProvideSupport { tree: TreePayload },
    CounterProposal { tree: TreePayload },
}

impl Reply {
    pub fn tree(&self) -> Option<&TreePayload> {
        match self {
            Reply::Accept => None,
            Reply::RejectWithCounter { tree, .. } | Reply::ProvideSupport { tree } | Reply::CounterProposal { tree } => {
                Some(tree)
            }
        }
    }
}

/// One user turn as fed to the engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum UserInput {
    Propose { tree: TreePayload },
    Respond { reply: Reply },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSummary {
    pub statement: Statement,
    pub status: TriState,
    pub support: i32,
    pub attack: i32,
}

/// Compact view of one node's annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node: NodeId,
    pub statement: Statement,
    pub upper: TriState,
    pub lower: TriState,
    pub status: TriState,
    pub support: i32,
    pub attack: i32,
    pub upper_support: i32,
    pub upper_attack: i32,
    pub case: u8,
    pub case_action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<RelationSummary>,
}

impl From<&NodeEvaluation> for NodeSummary {
    fn from(ne: &NodeEvaluation) -> Self {
        let b = &ne.belief;
        let case = b.case();
        Self {
            node: ne.node.clone(),
            statement: b.statement.clone(),
            upper: b.upper,
            lower: b.lower,
            status: b.status(),
            support: b.support_score,
            attack: b.attack_score,
            upper_support: b.upper_support,
            upper_attack: b.upper_attack,
            case: case.number(),
            case_action: case.action().to_string(),
            relation: ne.relation.as_ref().map(|r| RelationSummary {
                statement: r.statement.clone(),
                status: r.status(),
                support: r.support_score,
                attack: r.attack_score,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Evaluation {
        record: usize,
        root: NodeId,
        case: u8,
        case_action: String,
        /// Proposal order.
        nodes: Vec<NodeSummary>,
    },
    Focus {
        record: usize,
        node: NodeId,
        members: Vec<FocusMember>,
        rationale: FocusRationale,
        fallback: bool,
        paths: Vec<FocusPath>,
    },
    Strategy {
        focus: Statement,
        critical: Vec<Statement>,
        non_critical: Vec<Statement>,
        knowref: bool,
        choice: StrategyKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        counterevidence: Option<Statement>,
    },
    ActionOpened {
        id: usize,
        name: String,
        strategy: StrategyKind,
        bel1: Statement,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bel2: Option<Statement>,
        depth: usize,
    },
    ActionClosed {
        id: usize,
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        disjunct: Option<usize>,
        status: ActionStatus,
        depth: usize,
    },
    ActStatus {
        act: usize,
        status: ActStatus,
    },
    MutualBelief {
        statement: Statement,
    },
    Conceded {
        statement: Statement,
    },
    Grafted {
        record: usize,
        node: NodeId,
        children: Vec<NodeId>,
    },
    Repeat {
        statement: Statement,
    },
    Exhausted {
        strategy: StrategyKind,
        focus: Statement,
    },
    /// An open action whose focus became mutually settled was dropped.
    Moot {
        id: usize,
    },
    Concluded {
        accepted: bool,
        statement: Statement,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    /// Logical timestamp: the turn's position in the log.
    pub index: usize,
    pub speaker: Speaker,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<UserInput>,
    pub acts: Vec<DiscourseAct>,
    pub text: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
    /// Problem-solving stack depth after the turn.
    pub depth: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub turns: Vec<Turn>,
}

impl Transcript {
    pub fn push(&mut self, speaker: Speaker, input: Option<UserInput>, acts: Vec<DiscourseAct>, trace: Vec<TraceEvent>, depth: usize) {
        let text = acts.iter().filter_map(|a| a.surface.clone()).collect();
        self.turns.push(Turn {
            index: self.turns.len(),
            speaker,
            input,
            acts,
            text,
            trace,
            depth,
        });
    }

    pub fn inputs(&self) -> impl Iterator<Item = &UserInput> {
        self.turns.iter().filter_map(|t| t.input.as_ref())
    }

    pub fn events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.turns.iter().flat_map(|t| &t.trace)
    }

    pub fn max_depth(&self) -> usize {
        self.turns.iter().map(|t| t.depth).max().unwrap_or(0)
    }
}
