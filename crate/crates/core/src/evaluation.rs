//! Evidence comparison and the bounded evaluation of proposed beliefs.
//!
//! Strengths are additive integers (weak 1, strong 2, warranted 3). A
//! statement is accepted when the supporting total exceeds the attacking
//! total by at least the accept margin, rejected when the attack exceeds
//! the support by the reject margin, and left unsure otherwise.
//!
//! Evaluating a tree node yields two verdicts. The upper bound assumes every
//! uncertain piece of evidence resolves in the node's favour, the lower bound
//! assumes the opposite. For trees whose children all support their parent
//! this is exactly "evidence plus potential evidence" versus "evidence only".

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::belief::{Belief, EvidenceRelation, Expertise, KnowledgeBase, Proposition, SemanticForm, Statement, Strength};
use crate::error::{EvaluationError, TreeError};
use crate::tree::{NodeId, ProposedBeliefTree, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    Reject,
    Unsure,
    Accept,
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriState::Reject => "reject",
            TriState::Unsure => "unsure",
            TriState::Accept => "accept",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Support,
    Attack,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::Support => Side::Attack,
            Side::Attack => Side::Support,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemStatus {
    Accepted,
    Rejected,
    Uncertain,
}

impl ItemStatus {
    /// Combine the verdicts on a child belief and on its relation.
    pub fn combine(belief: TriState, relation: TriState) -> Self {
        match (belief, relation) {
            (TriState::Reject, _) | (_, TriState::Reject) => ItemStatus::Rejected,
            (TriState::Accept, TriState::Accept) => ItemStatus::Accepted,
            _ => ItemStatus::Uncertain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub accept_margin: i32,
    pub reject_margin: i32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            accept_margin: 2,
            reject_margin: 2,
        }
    }
}

/// Where an evidence item came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ItemSource {
    /// A child node of the proposed tree.
    Proposed { node: NodeId },
    /// The system's own belief plus own relation; `index` is the relation's
    /// position in the knowledge base.
    Own { belief: String, relation: String, index: usize },
}

/// A child belief together with its `supports` relation to the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub child: Belief,
    pub relation: EvidenceRelation,
    pub status: ItemStatus,
    pub effective: Strength,
    pub source: ItemSource,
}

impl EvidenceItem {
    pub fn new(child: Belief, relation: EvidenceRelation, status: ItemStatus, source: ItemSource) -> Self {
        let effective = child.strength.min(relation.strength);
        Self {
            child,
            relation,
            status,
            effective,
            source,
        }
    }

    /// Which side of `target` this item argues for, if it bears on it.
    pub fn side(&self, target: &Statement) -> Option<Side> {
        let p = target.as_fact()?;
        if &self.relation.parent == p {
            Some(Side::Support)
        } else if self.relation.parent == p.negate() {
            Some(Side::Attack)
        } else {
            None
        }
    }

    pub fn node(&self) -> Option<&str> {
        match &self.source {
            ItemSource::Proposed { node } => Some(node),
            ItemSource::Own { .. } => None,
        }
    }
}

/// A belief that bears directly on the target (the partner's proposal of it
/// or the system's own attitude toward it or its negation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseEvidence {
    pub belief: Belief,
    pub side: Side,
    pub from_partner: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub result: TriState,
    pub support: i32,
    pub attack: i32,
}

impl Verdict {
    pub fn margin(&self) -> i32 {
        self.support - self.attack
    }
}

/// Deterministic endorsement table for partner statements.
pub fn endorse_statement(form: SemanticForm, expertise: Expertise) -> Strength {
    match (form, expertise) {
        (SemanticForm::TagQuestion, _) => Strength::Strong,
        (SemanticForm::Hedged, _) => Strength::Weak,
        (SemanticForm::DirectAssertion, Expertise::Expert) => Strength::Strong,
        (SemanticForm::DirectAssertion, _) => Strength::Weak,
    }
}

pub fn verdict_from_scores(support: i32, attack: i32, th: Thresholds) -> Verdict {
    let result = if support - attack >= th.accept_margin {
        TriState::Accept
    } else if attack - support >= th.reject_margin {
        TriState::Reject
    } else {
        TriState::Unsure
    };
    Verdict {
        result,
        support,
        attack,
    }
}

/// Compare the supporting and attacking evidence for `target`. Every item
/// passed in is counted as accepted; items not bearing on `target` are
/// ignored.
pub fn evaluate<'a, I>(target: &Statement, items: I, base: &[BaseEvidence], th: Thresholds) -> Verdict
where
    I: IntoIterator<Item = &'a EvidenceItem>,
{
    let mut support = 0;
    let mut attack = 0;
    for b in base {
        match b.side {
            Side::Support => support += b.belief.strength.rank(),
            Side::Attack => attack += b.belief.strength.rank(),
        }
    }
    for item in items {
        match item.side(target) {
            Some(Side::Support) => support += item.effective.rank(),
            Some(Side::Attack) => attack += item.effective.rank(),
            None => {}
        }
    }
    verdict_from_scores(support, attack, th)
}

/// The six realizable (upper, lower) combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigThreeCase {
    Accept,
    AttemptAcceptChildren,
    AttemptBoth,
    ResolveItself,
    AttemptRejectChildren,
    Reject,
}

impl FigThreeCase {
    pub fn number(self) -> u8 {
        match self {
            FigThreeCase::Accept => 1,
            FigThreeCase::AttemptAcceptChildren => 2,
            FigThreeCase::AttemptBoth => 3,
            FigThreeCase::ResolveItself => 4,
            FigThreeCase::AttemptRejectChildren => 5,
            FigThreeCase::Reject => 6,
        }
    }

    pub fn action(self) -> &'static str {
        match self {
            FigThreeCase::Accept => "accept",
            FigThreeCase::AttemptAcceptChildren => "attempt to accept uncertain children",
            FigThreeCase::AttemptBoth => "attempt to accept and to reject uncertain children",
            FigThreeCase::ResolveItself => "resolve uncertainty regarding the belief itself",
            FigThreeCase::AttemptRejectChildren => "attempt to reject uncertain children",
            FigThreeCase::Reject => "reject",
        }
    }

    pub fn is_decided(self) -> bool {
        matches!(self, FigThreeCase::Accept | FigThreeCase::Reject)
    }
}

pub fn classify_combination(upper: TriState, lower: TriState) -> Result<FigThreeCase, EvaluationError> {
    use TriState::*;
    Ok(match (upper, lower) {
        (Accept, Accept) => FigThreeCase::Accept,
        (Accept, Unsure) => FigThreeCase::AttemptAcceptChildren,
        (Accept, Reject) => FigThreeCase::AttemptBoth,
        (Unsure, Unsure) => FigThreeCase::ResolveItself,
        (Unsure, Reject) => FigThreeCase::AttemptRejectChildren,
        (Reject, Reject) => FigThreeCase::Reject,
        (upper, lower) => return Err(EvaluationError::ImpossibleCombination { upper, lower }),
    })
}

/// Everything the evaluation of one statement produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationAnnotation {
    pub statement: Statement,
    pub upper: TriState,
    pub lower: TriState,
    pub base: Vec<BaseEvidence>,
    /// Accepted evidence items.
    pub evidence: Vec<EvidenceItem>,
    /// Uncertain evidence items, in proposal order.
    pub potential: Vec<EvidenceItem>,
    /// Scores of the lower-bound computation.
    pub support_score: i32,
    pub attack_score: i32,
    pub upper_support: i32,
    pub upper_attack: i32,
    pub thresholds: Thresholds,
}

impl EvaluationAnnotation {
    pub fn status(&self) -> TriState {
        match (self.upper, self.lower) {
            (TriState::Accept, TriState::Accept) => TriState::Accept,
            (TriState::Reject, TriState::Reject) => TriState::Reject,
            _ => TriState::Unsure,
        }
    }

    pub fn case(&self) -> FigThreeCase {
        classify_combination(self.upper, self.lower).expect("lower never exceeds upper by construction")
    }

    /// Support minus attack in the lower-bound computation.
    pub fn margin(&self) -> i32 {
        self.support_score - self.attack_score
    }

    pub fn lower_verdict(&self) -> Verdict {
        Verdict {
            result: self.lower,
            support: self.support_score,
            attack: self.attack_score,
        }
    }

    /// Side of a potential item relative to this annotation's statement.
    pub fn potential_side(&self, i: usize) -> Side {
        self.potential[i].side(&self.statement).unwrap_or(Side::Support)
    }

    /// Re-run the comparison with potential item `i` counted exactly when
    /// `accepted(i)` holds.
    pub fn evaluate_assuming(&self, accepted: impl Fn(usize) -> bool) -> Verdict {
        let chosen = self
            .evidence
            .iter()
            .chain(self.potential.iter().enumerate().filter(|(i, _)| accepted(*i)).map(|(_, it)| it));
        evaluate(&self.statement, chosen, &self.base, self.thresholds)
    }

    fn finish(
        statement: Statement,
        base: Vec<BaseEvidence>,
        evidence: Vec<EvidenceItem>,
        potential: Vec<EvidenceItem>,
        th: Thresholds,
    ) -> Self {
        let mut ann = Self {
            statement,
            upper: TriState::Unsure,
            lower: TriState::Unsure,
            base,
            evidence,
            potential,
            support_score: 0,
            attack_score: 0,
            upper_support: 0,
            upper_attack: 0,
            thresholds: th,
        };
        let upper = ann.evaluate_assuming(|i| ann.potential_side(i) == Side::Support);
        let lower = ann.evaluate_assuming(|i| ann.potential_side(i) == Side::Attack);
        ann.upper = upper.result;
        ann.lower = lower.result;
        ann.upper_support = upper.support;
        ann.upper_attack = upper.attack;
        ann.support_score = lower.support;
        ann.attack_score = lower.attack;
        ann
    }
}

/// Annotations for one tree node: its belief and its relation to the parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEvaluation {
    pub node: NodeId,
    pub belief: EvaluationAnnotation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<EvaluationAnnotation>,
}

impl NodeEvaluation {
    pub fn item_status(&self) -> Option<ItemStatus> {
        self.relation
            .as_ref()
            .map(|r| ItemStatus::combine(self.belief.status(), r.status()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEvaluation {
    pub root: NodeId,
    pub nodes: BTreeMap<NodeId, NodeEvaluation>,
}

impl TreeEvaluation {
    pub fn root(&self) -> &NodeEvaluation {
        &self.nodes[&self.root]
    }

    pub fn node(&self, id: &str) -> Option<&NodeEvaluation> {
        self.nodes.get(id)
    }
}

/// Evaluates statements and proposed trees against one knowledge base.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    pub kb: &'a KnowledgeBase,
    pub thresholds: Thresholds,
}

impl<'a> Evaluator<'a> {
    pub fn new(kb: &'a KnowledgeBase) -> Self {
        Self {
            kb,
            thresholds: Thresholds::default(),
        }
    }

    pub fn with_thresholds(kb: &'a KnowledgeBase, thresholds: Thresholds) -> Self {
        Self { kb, thresholds }
    }

    /// The partner's proposal (if any) plus the system's own direct
    /// attitude toward `statement` or its negation.
    pub fn base_evidence(&self, statement: &Statement, proposal: Option<&Belief>) -> Vec<BaseEvidence> {
        let mut base = Vec::new();
        if let Some(b) = proposal {
            let side = if self.kb.is_conceded(statement) {
                Side::Attack
            } else {
                Side::Support
            };
            base.push(BaseEvidence {
                belief: b.clone(),
                side,
                from_partner: true,
            });
        }
        if let Some(l) = self.kb.lookup(statement) {
            base.push(BaseEvidence {
                belief: l.belief.clone(),
                side: if l.direct { Side::Support } else { Side::Attack },
                from_partner: false,
            });
        }
        base
    }

    /// Accepted evidence items built from the system's own relations whose
    /// child it currently believes.
    pub fn own_items(&self, target: &Proposition) -> Vec<EvidenceItem> {
        let neg = target.negate();
        self.kb
            .relations()
            .filter(|(_, r)| &r.parent == target || r.parent == neg)
            .filter_map(|(index, r)| {
                let child_stmt = Statement::Fact(r.child.clone());
                let l = self.kb.lookup(&child_stmt).filter(|l| l.direct)?;
                let relation_id = self.kb.beliefs()[index].id.clone();
                Some(EvidenceItem::new(
                    l.belief.clone(),
                    r,
                    ItemStatus::Accepted,
                    ItemSource::Own {
                        belief: l.belief.id.clone(),
                        relation: relation_id,
                        index,
                    },
                ))
            })
            .collect()
    }

    /// Evaluate a statement with no proposed children.
    pub fn evaluate_statement(&self, statement: &Statement, proposal: Option<&Belief>) -> EvaluationAnnotation {
        let base = self.base_evidence(statement, proposal);
        let evidence = statement.as_fact().map(|p| self.own_items(p)).unwrap_or_default();
        EvaluationAnnotation::finish(statement.clone(), base, evidence, Vec::new(), self.thresholds)
    }

    /// Attacking own items against `statement`, strongest first with ties
    /// in knowledge-base order.
    pub fn counterevidence(&self, statement: &Statement) -> Vec<EvidenceItem> {
        let Some(p) = statement.as_fact() else {
            return Vec::new();
        };
        let mut items: Vec<EvidenceItem> = self
            .own_items(p)
            .into_iter()
            .filter(|i| i.side(statement) == Some(Side::Attack))
            .collect();
        items.sort_by_key(|it| std::cmp::Reverse(it.effective));
        items
    }

    pub fn evaluate_tree(&self, tree: &ProposedBeliefTree) -> TreeEvaluation {
        let mut nodes = BTreeMap::new();
        self.visit(tree, tree.root(), &mut nodes);
        TreeEvaluation {
            root: tree.root_id().to_string(),
            nodes,
        }
    }

    pub fn evaluate_belief(&self, tree: &ProposedBeliefTree, node: &str) -> Result<EvaluationAnnotation, EvaluationError> {
        let n = tree
            .node(node)
            .ok_or_else(|| TreeError::UnknownNode(node.to_string()))?;
        let mut nodes = BTreeMap::new();
        self.visit(tree, n, &mut nodes);
        Ok(nodes.remove(node).expect("visited").belief)
    }

    fn visit(&self, tree: &ProposedBeliefTree, node: &TreeNode, out: &mut BTreeMap<NodeId, NodeEvaluation>) {
        let statement = &node.belief.statement;
        let base = self.base_evidence(statement, Some(&node.belief));
        let mut evidence = statement
            .as_fact()
            .map(|p| self.own_items(p))
            .unwrap_or_default();
        let mut potential = Vec::new();

        for child_id in &node.children {
            let child = tree.node(child_id).expect("validated tree");
            self.visit(tree, child, out);
            let child_eval = &out[child_id];
            let rel_ann = child_eval.relation.as_ref().expect("non-root nodes carry relations");
            let status = ItemStatus::combine(child_eval.belief.status(), rel_ann.status());
            let item = EvidenceItem::new(
                child.belief.clone(),
                child.relation.clone().expect("validated tree"),
                status,
                ItemSource::Proposed { node: child_id.clone() },
            );
            match status {
                ItemStatus::Rejected => {}
                ItemStatus::Accepted => evidence.push(item),
                ItemStatus::Uncertain => potential.push(item),
            }
        }

        let belief = EvaluationAnnotation::finish(statement.clone(), base, evidence, potential, self.thresholds);
        let relation = node.relation.as_ref().map(|r| {
            let stmt = r.statement();
            let proposal = Belief {
                id: format!("{}#rel", node.id),
                statement: stmt.clone(),
                strength: r.strength,
                endorsements: r.endorsements.clone(),
            };
            self.evaluate_statement(&stmt, Some(&proposal))
        });
        out.insert(
            node.id.clone(),
            NodeEvaluation {
                node: node.id.clone(),
                belief,
                relation,
            },
        );
    }
}
