//! Selecting the focus of information-sharing: the fewest, easiest uncertain
//! beliefs or relations whose resolution would decide a node.

use serde::{Deserialize, Serialize};

use crate::belief::Statement;
use crate::error::FocusError;
use crate::evaluation::{EvaluationAnnotation, NodeEvaluation, Side, TreeEvaluation, TriState};
use crate::tree::{NodeId, ProposedBeliefTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ToAccept,
    ToReject,
}

impl Direction {
    fn target(self) -> TriState {
        match self {
            Direction::ToAccept => TriState::Accept,
            Direction::ToReject => TriState::Reject,
        }
    }
}

/// A belief node or the relation linking a node to its parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FocusMember {
    Belief { node: NodeId, statement: Statement },
    Relation { node: NodeId, statement: Statement },
}

impl FocusMember {
    pub fn statement(&self) -> &Statement {
        match self {
            FocusMember::Belief { statement, .. } | FocusMember::Relation { statement, .. } => statement,
        }
    }

    pub fn node(&self) -> &str {
        match self {
            FocusMember::Belief { node, .. } | FocusMember::Relation { node, .. } => node,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FocusRationale {
    SelfFocus,
    AcceptPath,
    RejectPath,
    BothPaths,
}

/// One candidate set tried during the search, with its re-evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub items: Vec<NodeId>,
    pub closeness: i32,
    pub result: TriState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusPath {
    pub direction: Direction,
    /// The first candidate whose re-evaluation reached the target.
    pub resolving: Vec<NodeId>,
    /// Every candidate evaluated, in ranked order.
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusSet {
    pub node: NodeId,
    pub members: Vec<FocusMember>,
    pub rationale: FocusRationale,
    /// Search paths at the node `select_focus` was called on.
    pub paths: Vec<FocusPath>,
    /// Set when no subset resolved the node and it fell back to itself.
    #[serde(default)]
    pub fallback: bool,
}

impl FocusSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn first(&self) -> Option<&FocusMember> {
        self.members.first()
    }
}

/// How close an uncertain item is to the given outcome, from its two
/// constituents' lower-bound margins. Acceptance needs both constituents,
/// so it takes the smaller support-minus-attack; rejection needs either one,
/// so it takes the larger attack-minus-support. Higher is closer.
pub fn closeness(item: &NodeEvaluation, direction: Direction) -> i32 {
    let belief = item.belief.margin();
    let relation = item.relation.as_ref().map(|r| r.margin()).unwrap_or(belief);
    closeness_from_margins(belief, relation, direction)
}

pub fn closeness_from_margins(belief: i32, relation: i32, direction: Direction) -> i32 {
    match direction {
        Direction::ToAccept => belief.min(relation),
        Direction::ToReject => (-belief).max(-relation),
    }
}

/// Lexicographic k-combinations of `0..n`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Closeness of potential item `i` toward the outcome that helps `direction`:
/// supporters must be accepted to accept the parent, attackers rejected.
fn item_closeness(ann: &EvaluationAnnotation, eval: &TreeEvaluation, i: usize, direction: Direction) -> i32 {
    let item = &ann.potential[i];
    let node = item.node().and_then(|n| eval.node(n));
    let wanted = match (direction, ann.potential_side(i)) {
        (Direction::ToAccept, Side::Support) | (Direction::ToReject, Side::Attack) => Direction::ToAccept,
        _ => Direction::ToReject,
    };
    node.map(|n| closeness(n, wanted)).unwrap_or(0)
}

/// Whether assuming the items in `set` resolve in `direction`'s favour,
/// and the rest against it, yields the target verdict.
pub fn resolves(ann: &EvaluationAnnotation, set: &[usize], direction: Direction) -> TriState {
    ann.evaluate_assuming(|i| {
        let in_set = set.contains(&i);
        let side = ann.potential_side(i);
        match direction {
            Direction::ToAccept => (in_set && side == Side::Support) || (!in_set && side == Side::Attack),
            Direction::ToReject => (in_set && side == Side::Attack) || (!in_set && side == Side::Support),
        }
    })
    .result
}

/// Ranked search for the smallest resolving set of potential items.
fn search(ann: &EvaluationAnnotation, eval: &TreeEvaluation, direction: Direction) -> (Option<Vec<usize>>, Vec<Candidate>) {
    let m = ann.potential.len();
    let scores: Vec<i32> = (0..m).map(|i| item_closeness(ann, eval, i, direction)).collect();
    let node_of = |i: usize| ann.potential[i].node().unwrap_or_default().to_string();
    let mut tried = Vec::new();
    for k in 1..=m {
        let mut sets: Vec<(i32, Vec<usize>)> = combinations(m, k)
            .into_iter()
            .map(|s| (s.iter().map(|&i| scores[i]).sum(), s))
            .collect();
        // Highest aggregate closeness first; ties keep lexicographic proposal order.
        sets.sort_by_key(|s| std::cmp::Reverse(s.0));
        for (score, set) in sets {
            let result = resolves(ann, &set, direction);
            tried.push(Candidate {
                items: set.iter().map(|&i| node_of(i)).collect(),
                closeness: score,
                result,
            });
            if result == direction.target() {
                let mut ordered = set;
                ordered.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
                return (Some(ordered), tried);
            }
        }
    }
    (None, tried)
}

fn push_unique(out: &mut Vec<FocusMember>, m: FocusMember) {
    if !out.contains(&m) {
        out.push(m);
    }
}

/// Focus selection for `node`, whose annotations are in `eval`.
pub fn select_focus(tree: &ProposedBeliefTree, eval: &TreeEvaluation, node: &str) -> Result<FocusSet, FocusError> {
    let ne = eval.node(node).ok_or_else(|| FocusError::UnknownNode(node.to_string()))?;
    if ne.belief.status() != TriState::Unsure {
        return Err(FocusError::NotUnsure);
    }
    Ok(focus_of(tree, eval, node))
}

fn self_focus(node: &str, ne: &NodeEvaluation, paths: Vec<FocusPath>, fallback: bool) -> FocusSet {
    FocusSet {
        node: node.to_string(),
        members: vec![FocusMember::Belief {
            node: node.to_string(),
            statement: ne.belief.statement.clone(),
        }],
        rationale: FocusRationale::SelfFocus,
        paths,
        fallback,
    }
}

fn focus_of(tree: &ProposedBeliefTree, eval: &TreeEvaluation, node: &str) -> FocusSet {
    let ne = &eval.nodes[node];
    let ann = &ne.belief;
    let empty = |rationale| FocusSet {
        node: node.to_string(),
        members: Vec::new(),
        rationale,
        paths: Vec::new(),
        fallback: false,
    };
    if ann.status() != TriState::Unsure {
        return empty(FocusRationale::SelfFocus);
    }
    let is_leaf = tree.node(node).is_none_or(|n| n.is_leaf());
    if is_leaf || (ann.upper == TriState::Unsure && ann.lower == TriState::Unsure) {
        return self_focus(node, ne, Vec::new(), false);
    }

    let mut directions = Vec::new();
    if ann.upper == TriState::Accept {
        directions.push(Direction::ToAccept);
    }
    if ann.lower == TriState::Reject {
        directions.push(Direction::ToReject);
    }

    let mut members = Vec::new();
    let mut paths = Vec::new();
    let mut resolved = Vec::new();
    for direction in directions {
        let (found, candidates) = search(ann, eval, direction);
        let resolving: Vec<NodeId> = found
            .iter()
            .flatten()
            .map(|&i| ann.potential[i].node().unwrap_or_default().to_string())
            .collect();
        if found.is_some() {
            resolved.push(direction);
            for child in &resolving {
                for m in focus_of(tree, eval, child).members {
                    push_unique(&mut members, m);
                }
                if let Some(rel) = eval.nodes[child].relation.as_ref() {
                    if rel.status() == TriState::Unsure {
                        push_unique(
                            &mut members,
                            FocusMember::Relation {
                                node: child.clone(),
                                statement: rel.statement.clone(),
                            },
                        );
                    }
                }
            }
        }
        paths.push(FocusPath {
            direction,
            resolving,
            candidates,
        });
    }

    if resolved.is_empty() || members.is_empty() {
        return self_focus(node, ne, paths, true);
    }
    let rationale = match resolved.as_slice() {
        [Direction::ToAccept] => FocusRationale::AcceptPath,
        [Direction::ToReject] => FocusRationale::RejectPath,
        _ => FocusRationale::BothPaths,
    };
    FocusSet {
        node: node.to_string(),
        members,
        rationale,
        paths,
        fallback: false,
    }
}
