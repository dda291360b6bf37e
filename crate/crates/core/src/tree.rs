//! Proposed belief trees and their wire payload.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Endorsement, EvidenceRelation, KnowledgeBase, Proposition, SemanticForm, Statement, Strength};
use crate::error::TreeError;

pub type NodeId = String;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: NodeId,
    /// The partner's proposed belief, endorsed as conveyed.
    pub belief: Belief,
    /// Evidential relation to the parent node; absent only at the root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<EvidenceRelation>,
    #[serde(default)]
    pub children: Vec<NodeId>,
}

impl TreeNode {
    pub fn proposition(&self) -> &Proposition {
        self.belief
            .statement
            .as_fact()
            .expect("tree nodes hold propositions; checked on construction")
    }
}

/// A well-formed proposal: acyclic, single root, every non-root node linked
/// to its parent by `supports(child, parent)` or `supports(child, ¬parent)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposedBeliefTree {
    root: NodeId,
    nodes: BTreeMap<NodeId, TreeNode>,
    /// Pre-order traversal; doubles as proposal order.
    order: Vec<NodeId>,
    #[serde(default)]
    parents: BTreeMap<NodeId, NodeId>,
}

impl ProposedBeliefTree {
    pub fn new(root: impl Into<NodeId>, nodes: Vec<TreeNode>) -> Result<Self, TreeError> {
        let root = root.into();
        if nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut map = BTreeMap::new();
        for node in nodes {
            if node.belief.statement.as_fact().is_none() {
                return Err(TreeError::NotAFact(node.id));
            }
            node.belief.check()?;
            if let Some(prev) = map.insert(node.id.clone(), node) {
                return Err(TreeError::DuplicateId(prev.id));
            }
        }
        let root_node = map.get(&root).ok_or_else(|| TreeError::UnknownNode(root.clone()))?;
        if root_node.relation.is_some() {
            return Err(TreeError::RootRelation(root.clone()));
        }

        let mut order = Vec::with_capacity(map.len());
        let mut parents = BTreeMap::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![root.clone()];
        while let Some(id) = stack.pop() {
            if !seen.insert(id.clone()) {
                return Err(TreeError::Cycle(id));
            }
            let node = &map[&id];
            for child_id in node.children.iter().rev() {
                let child = map
                    .get(child_id)
                    .ok_or_else(|| TreeError::UnknownNode(child_id.clone()))?;
                if seen.contains(child_id) || parents.contains_key(child_id) {
                    return Err(TreeError::Cycle(child_id.clone()));
                }
                let rel = child
                    .relation
                    .as_ref()
                    .ok_or_else(|| TreeError::MissingRelation(child_id.clone()))?;
                let parent_prop = node.proposition();
                if &rel.child != child.proposition()
                    || (&rel.parent != parent_prop && rel.parent != parent_prop.negate())
                {
                    return Err(TreeError::RelationMismatch {
                        node: child_id.clone(),
                        expected: parent_prop.to_string(),
                        found: rel.parent.to_string(),
                    });
                }
                parents.insert(child_id.clone(), id.clone());
                stack.push(child_id.clone());
            }
            order.push(id);
        }
        if let Some(orphan) = map.keys().find(|k| !seen.contains(*k)) {
            return Err(TreeError::Unreachable(orphan.clone()));
        }
        Ok(Self {
            root,
            nodes: map,
            order,
            parents,
        })
    }

    pub fn from_payload(payload: &TreePayload, kb: &KnowledgeBase) -> Result<Self, TreeError> {
        let by_id: BTreeMap<&str, &NodePayload> =
            payload.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
        let mut parent_of: BTreeMap<&str, &NodePayload> = BTreeMap::new();
        for n in &payload.nodes {
            for c in &n.children {
                parent_of.entry(c.as_str()).or_insert(n);
            }
        }
        let mut nodes = Vec::with_capacity(payload.nodes.len());
        for n in &payload.nodes {
            let statement = Statement::Fact(n.statement.clone());
            let endorsement = kb.partner_endorsement(&statement, n.form);
            let belief = Belief::new(n.id.clone(), statement, vec![endorsement])?;
            let relation = match (parent_of.get(n.id.as_str()), n.id == payload.root) {
                (_, true) => {
                    if n.relation.is_some() {
                        return Err(TreeError::RootRelation(n.id.clone()));
                    }
                    None
                }
                (Some(parent), false) => {
                    let spec = n.relation.clone().unwrap_or_default();
                    let parent_prop = if spec.attacks {
                        parent.statement.negate()
                    } else {
                        parent.statement.clone()
                    };
                    let rel_stmt = Statement::supports(n.statement.clone(), parent_prop.clone());
                    let form = spec.form.unwrap_or(n.form);
                    let e = kb.partner_endorsement(&rel_stmt, form);
                    Some(EvidenceRelation::new(n.statement.clone(), parent_prop, vec![e])?)
                }
                (None, false) => None,
            };
            nodes.push(TreeNode {
                id: n.id.clone(),
                belief,
                relation,
                children: n.children.clone(),
            });
        }
        if !by_id.contains_key(payload.root.as_str()) {
            return Err(TreeError::UnknownNode(payload.root.clone()));
        }
        Self::new(payload.root.clone(), nodes)
    }

    pub fn to_payload(&self) -> TreePayload {
        let form_of = |es: &[Endorsement]| {
            es.iter()
                .find_map(|e| match e {
                    Endorsement::PartnerStatement { form, .. } => Some(*form),
                    _ => None,
                })
                .unwrap_or(SemanticForm::DirectAssertion)
        };
        let nodes = self
            .order
            .iter()
            .map(|id| {
                let n = &self.nodes[id];
                let form = form_of(&n.belief.endorsements);
                let relation = n.relation.as_ref().map(|r| {
                    let rf = form_of(&r.endorsements);
                    RelationPayload {
                        form: (rf != form).then_some(rf),
                        attacks: !self.parent_supported_directly(id),
                    }
                });
                NodePayload {
                    id: id.clone(),
                    statement: n.proposition().clone(),
                    form,
                    relation,
                    children: n.children.clone(),
                }
            })
            .collect();
        TreePayload {
            root: self.root.clone(),
            nodes,
        }
    }

    fn parent_supported_directly(&self, id: &str) -> bool {
        match (self.parents.get(id), self.nodes[id].relation.as_ref()) {
            (Some(p), Some(r)) => &r.parent == self.nodes[p].proposition(),
            _ => true,
        }
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[&self.root]
    }

    pub fn root_id(&self) -> &str {
        &self.root
    }

    pub fn node(&self, id: &str) -> Option<&TreeNode> {
        self.nodes.get(id)
    }

    /// Replace a node's endorsements with a single hypothetical one of the
    /// given strength. Used for what-if previews; the relation is untouched.
    pub fn set_strength(&mut self, id: &str, strength: Strength) -> Result<(), TreeError> {
        let node = self.nodes.get_mut(id).ok_or_else(|| TreeError::UnknownNode(id.to_string()))?;
        node.belief.endorsements = vec![Endorsement::OwnKnowledge { strength }];
        node.belief.strength = strength;
        Ok(())
    }

    pub fn parent_of(&self, id: &str) -> Option<&TreeNode> {
        self.parents.get(id).map(|p| &self.nodes[p])
    }

    /// Nodes in pre-order.
    pub fn iter(&self) -> impl Iterator<Item = &TreeNode> {
        self.order.iter().map(|id| &self.nodes[id])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of a node in proposal order.
    pub fn position(&self, id: &str) -> usize {
        self.order.iter().position(|n| n == id).unwrap_or(usize::MAX)
    }

    /// Whether the node's relation supports its parent's negation.
    pub fn is_counterevidence(&self, id: &str) -> bool {
        !self.parent_supported_directly(id)
    }

    /// All statements the tree proposes: node propositions and relations.
    pub fn statements(&self) -> Vec<Statement> {
        let mut out = Vec::new();
        for n in self.iter() {
            out.push(n.belief.statement.clone());
            if let Some(r) = &n.relation {
                out.push(r.statement());
            }
        }
        out
    }

    /// Id-independent structural signature used by the no-repeat rule.
    pub fn signature(&self) -> String {
        fn walk(t: &ProposedBeliefTree, id: &str, out: &mut String) {
            let n = &t.nodes[id];
            out.push_str(&n.belief.statement.to_string());
            out.push('@');
            out.push_str(&n.belief.strength.to_string());
            if let Some(r) = &n.relation {
                out.push_str(&format!("<{}@{}>", r.parent, r.strength));
            }
            out.push('[');
            let mut kids: Vec<String> = n
                .children
                .iter()
                .map(|c| {
                    let mut s = String::new();
                    walk(t, c, &mut s);
                    s
                })
                .collect();
            kids.sort();
            out.push_str(&kids.join(";"));
            out.push(']');
        }
        let mut s = String::new();
        walk(self, &self.root, &mut s);
        s
    }
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Flat wire form: cycles and dangling references are representable so the
/// validator can reject them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePayload {
    pub root: NodeId,
    pub nodes: Vec<NodePayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePayload {
    pub id: NodeId,
    pub statement: Proposition,
    #[serde(default = "default_form")]
    pub form: SemanticForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<RelationPayload>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeId>,
}

fn default_form() -> SemanticForm {
    SemanticForm::DirectAssertion
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationPayload {
    /// Semantic form of the implied relation; defaults to the node's form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<SemanticForm>,
    /// `true` for counterevidence: stored as `supports(child, ¬parent)`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub attacks: bool,
}

impl TreePayload {
    /// Single-node proposal.
    pub fn leaf(id: impl Into<NodeId>, statement: Proposition, form: SemanticForm) -> Self {
        let id = id.into();
        Self {
            root: id.clone(),
            nodes: vec![NodePayload {
                id,
                statement,
                form,
                relation: None,
                children: vec![],
            }],
        }
    }
}
