//! The propose-evaluate-modify cycle.
//!
//! A [`Session`] holds the system's knowledge base and a four-level dialogue
//! model. Each user turn is either a proposal or a reply to the open
//! information-sharing action; the engine evaluates what it received,
//! accepts, rejects, or opens a (possibly embedded) subdialogue, and
//! re-evaluates the proposal an action served once its preconditions hold.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::acts::{realize, ActKind, ActPart, ActStatus, DiscourseAct, Speaker, TemplateTable};
use crate::belief::{Belief, KnowledgeBase, Proposition, Statement, Strength};
use crate::error::EngineError;
use crate::evaluation::{EvaluationAnnotation, Evaluator, Side, Thresholds, TreeEvaluation, TriState};
use crate::focus::{select_focus, FocusMember};
use crate::strategy::{check_preconditions, instantiate_recipe, ActionInstance, ActionStatus, StrategyFacts, StrategyKind, StrategyRegistry};
use crate::transcript::{NodeSummary, Reply, TraceEvent, Transcript, UserInput};
use crate::tree::{NodeId, NodePayload, ProposedBeliefTree, TreePayload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    AwaitingProposal,
    AwaitingResponse,
    ConcludedAccept,
    ConcludedReject,
}

impl Phase {
    pub fn is_concluded(self) -> bool {
        matches!(self, Phase::ConcludedAccept | Phase::ConcludedReject)
    }
}

/// Inert record for the levels above information sharing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubRecord {
    pub name: String,
    pub args: Vec<String>,
}

/// Which open action a proposal answers, and for a counter, the presented
/// statement it disputes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Service {
    pub action: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counter_target: Option<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefTreeRecord {
    pub id: usize,
    pub tree: ProposedBeliefTree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<TreeEvaluation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serves: Option<Service>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<TriState>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueModel {
    pub domain: Vec<StubRecord>,
    /// Plan records above the information-sharing actions.
    pub problem_solving_stubs: Vec<StubRecord>,
    /// Open actions, innermost last.
    pub stack: Vec<ActionInstance>,
    /// Actions already popped, in closing order.
    pub closed: Vec<ActionInstance>,
    pub trees: Vec<BeliefTreeRecord>,
    pub acts: Vec<DiscourseAct>,
}

impl DialogueModel {
    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub fn top(&self) -> Option<&ActionInstance> {
        self.stack.last()
    }

    pub fn action(&self, id: usize) -> Option<&ActionInstance> {
        self.stack.iter().chain(&self.closed).find(|a| a.id == id)
    }
}

/// Strategy registry, surface templates and evaluation thresholds.
#[derive(Debug, Clone, Default)]
pub struct EngineConfig {
    pub registry: StrategyRegistry,
    pub templates: TemplateTable,
    pub thresholds: Thresholds,
}

#[derive(Default)]
struct TurnLog {
    acts: Vec<DiscourseAct>,
    events: Vec<TraceEvent>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub kb: KnowledgeBase,
    pub model: DialogueModel,
    pub transcript: Transcript,
    pub phase: Phase,
    config: EngineConfig,
    /// Signatures of every tree proposed so far.
    seen: BTreeSet<String>,
    /// (strategy, focus, counterevidence) triples already tried.
    attempted: BTreeSet<(StrategyKind, Statement, Option<Statement>)>,
    next_action: usize,
}

impl Session {
    pub fn new(id: impl Into<String>, kb: KnowledgeBase, config: EngineConfig) -> Self {
        Self {
            id: id.into(),
            kb,
            model: DialogueModel {
                domain: vec![StubRecord {
                    name: "Domain-Plan".into(),
                    args: vec!["user".into()],
                }],
                problem_solving_stubs: vec![StubRecord {
                    name: "Evaluate-Proposal".into(),
                    args: vec!["system".into(), "user".into()],
                }],
                ..DialogueModel::default()
            },
            transcript: Transcript::default(),
            phase: Phase::AwaitingProposal,
            config,
            seen: BTreeSet::new(),
            attempted: BTreeSet::new(),
            next_action: 1,
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn depth(&self) -> usize {
        self.model.depth()
    }

    /// Evaluator over the current knowledge base.
    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::with_thresholds(&self.kb, self.config.thresholds)
    }

    /// Feed one user input.
    pub fn step(&mut self, input: &UserInput) -> Result<Vec<DiscourseAct>, EngineError> {
        match input {
            UserInput::Propose { tree } => self.process_proposal(tree),
            UserInput::Respond { reply } => self.process_response(reply),
        }
    }

    /// Evaluate a proposal. While an action is open the proposal is taken as
    /// a counter-proposal answering it.
    pub fn process_proposal(&mut self, payload: &TreePayload) -> Result<Vec<DiscourseAct>, EngineError> {
        if self.phase.is_concluded() {
            return Err(EngineError::SessionConcluded);
        }
        if self.phase == Phase::AwaitingResponse {
            return self.process_response(&Reply::CounterProposal { tree: payload.clone() });
        }
        let tree = ProposedBeliefTree::from_payload(payload, &self.kb)?;
        let input = UserInput::Propose { tree: payload.clone() };
        self.run_turn(input, |s, log| s.handle_tree(tree, None, log))
    }

    pub fn process_response(&mut self, reply: &Reply) -> Result<Vec<DiscourseAct>, EngineError> {
        if self.phase.is_concluded() {
            return Err(EngineError::SessionConcluded);
        }
        let top = self.model.top().ok_or(EngineError::NoOpenAction)?.clone();
        let input = UserInput::Respond { reply: reply.clone() };
        match reply {
            Reply::Accept => self.run_turn(input, |s, log| s.accept_reply(&top, log)),
            Reply::RejectWithCounter { target, tree } => {
                let presented = self.presented(&top);
                if !presented.contains(target) {
                    return Err(EngineError::MalformedResponse(format!(
                        "'{target}' was not presented by the open action"
                    )));
                }
                let tree = ProposedBeliefTree::from_payload(tree, &self.kb)?;
                let service = Service {
                    action: top.id,
                    counter_target: Some(target.clone()),
                };
                self.run_turn(input, |s, log| s.handle_tree(tree, Some(service), log))
            }
            Reply::ProvideSupport { tree } => {
                let root = tree
                    .nodes
                    .iter()
                    .find(|n| n.id == tree.root)
                    .map(|n| Statement::Fact(n.statement.clone()));
                if root.as_ref() != Some(&top.bindings.bel1) {
                    return Err(EngineError::MalformedResponse(format!(
                        "support must be rooted at '{}'",
                        top.bindings.bel1
                    )));
                }
                let support = ProposedBeliefTree::from_payload(tree, &self.kb)?;
                self.run_turn(input, |s, log| s.provide_support(&top, tree, support, log))
            }
            Reply::CounterProposal { tree } => {
                let tree = ProposedBeliefTree::from_payload(tree, &self.kb)?;
                let service = Service {
                    action: top.id,
                    counter_target: None,
                };
                self.run_turn(input, |s, log| s.handle_tree(tree, Some(service), log))
            }
        }
    }

    /// Pop the innermost action once one of its precondition disjuncts
    /// holds and re-evaluate the proposal it served.
    pub fn resume_after_info(&mut self) -> Result<Vec<DiscourseAct>, EngineError> {
        let top = self.model.top().ok_or(EngineError::NoOpenAction)?;
        if check_preconditions(top, &self.kb).is_none() {
            return Err(EngineError::PreconditionsStillOpen);
        }
        let mut log = TurnLog::default();
        self.resume(&mut log)?;
        let acts = log.acts.clone();
        self.finish_system_turn(log);
        Ok(acts)
    }

    fn run_turn(
        &mut self,
        input: UserInput,
        body: impl FnOnce(&mut Self, &mut TurnLog) -> Result<(), EngineError>,
    ) -> Result<Vec<DiscourseAct>, EngineError> {
        // Work on a copy so a failing turn leaves the session untouched.
        let mut next = self.clone();
        let user_acts = next.user_acts(&input)?;
        next.model.acts.extend(user_acts.iter().cloned());
        let depth = next.depth();
        next.transcript.push(Speaker::User, Some(input), user_acts, Vec::new(), depth);
        let mut log = TurnLog::default();
        body(&mut next, &mut log)?;
        let acts = log.acts.clone();
        next.finish_system_turn(log);
        *self = next;
        Ok(acts)
    }

    fn finish_system_turn(&mut self, log: TurnLog) {
        let depth = self.depth();
        self.transcript.push(Speaker::System, None, log.acts, log.events, depth);
    }

    fn user_acts(&self, input: &UserInput) -> Result<Vec<DiscourseAct>, EngineError> {
        let tree_acts = |payload: &TreePayload, skip_root: bool| -> Result<Vec<DiscourseAct>, EngineError> {
            let tree = ProposedBeliefTree::from_payload(payload, &self.kb)?;
            tree.iter()
                .filter(|n| !(skip_root && n.id == tree.root_id()))
                .map(|n| {
                    let mut parts = vec![ActPart::explicit(n.belief.statement.clone(), Some(n.belief.strength))];
                    if let Some(r) = &n.relation {
                        parts.push(ActPart::implicit(r.statement(), Some(r.strength)));
                    }
                    self.surfaced(DiscourseAct::new(ActKind::ProposeBelief, Speaker::User, parts))
                })
                .collect()
        };
        match input {
            UserInput::Propose { tree } => tree_acts(tree, false),
            UserInput::Respond { reply } => match reply {
                Reply::Accept => {
                    let top = self.model.top().ok_or(EngineError::NoOpenAction)?;
                    let pursued = self.pursued(top.id);
                    let parts = if pursued.is_empty() {
                        vec![ActPart::explicit(top.bindings.bel1.negate(), None)]
                    } else {
                        pursued.into_iter().map(|s| ActPart::explicit(s, None)).collect()
                    };
                    Ok(vec![self.surfaced(DiscourseAct::new(ActKind::AcceptAck, Speaker::User, parts))?])
                }
                Reply::ProvideSupport { tree } => tree_acts(tree, true),
                other => tree_acts(other.tree().expect("tree-bearing reply"), false),
            },
        }
    }

    fn surfaced(&self, mut act: DiscourseAct) -> Result<DiscourseAct, EngineError> {
        act.surface = Some(realize(&act, &self.config.templates)?);
        Ok(act)
    }

    fn emit(&mut self, act: DiscourseAct, log: &mut TurnLog) -> Result<(), EngineError> {
        let act = self.surfaced(act)?;
        self.model.acts.push(act.clone());
        log.acts.push(act);
        Ok(())
    }

    /// Mutual beliefs the open acts serving `action` still pursue.
    fn pursued(&self, action: usize) -> Vec<Statement> {
        let mut out = Vec::new();
        for act in &self.model.acts {
            if act.serves == Some(action) && act.status == ActStatus::Open {
                for s in &act.pursues {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
            }
        }
        out
    }

    /// Statements the system put forward for `action`.
    fn presented(&self, action: &ActionInstance) -> Vec<Statement> {
        let mut out: Vec<Statement> = self
            .model
            .acts
            .iter()
            .filter(|a| a.serves == Some(action.id))
            .flat_map(|a| a.statements().cloned())
            .collect();
        out.push(action.bindings.bel1.clone());
        out
    }

    fn establish(&mut self, statement: Statement, log: &mut TurnLog) {
        if self.kb.establish_mutual(statement.clone()) {
            log.events.push(TraceEvent::MutualBelief { statement });
        }
    }

    fn handle_tree(&mut self, tree: ProposedBeliefTree, serves: Option<Service>, log: &mut TurnLog) -> Result<(), EngineError> {
        let root = tree.root().belief.statement.clone();
        if !self.seen.insert(tree.signature()) {
            log.events.push(TraceEvent::Repeat { statement: root.clone() });
            let act = DiscourseAct::new(ActKind::RejectInform, Speaker::System, vec![ActPart::explicit(root.clone(), None)]);
            self.emit(act, log)?;
            if serves.is_none() {
                self.conclude_reject(root, log);
            }
            return Ok(());
        }
        for n in tree.iter() {
            let support = (!n.is_leaf()).then(|| {
                n.children
                    .iter()
                    .map(|c| tree.node(c).expect("validated").proposition().clone())
                    .collect::<Vec<Proposition>>()
            });
            self.kb.record_partner(n.belief.statement.clone(), support);
        }
        let id = self.model.trees.len();
        self.model.trees.push(BeliefTreeRecord {
            id,
            tree,
            evaluation: None,
            serves,
            outcome: None,
        });
        self.dispatch(id, log)
    }

    /// Evaluate a tree record and act on the verdict at its root.
    fn dispatch(&mut self, record: usize, log: &mut TurnLog) -> Result<(), EngineError> {
        let tree = self.model.trees[record].tree.clone();
        let eval = self.evaluator().evaluate_tree(&tree);
        let root = eval.root().belief.clone();
        log.events.push(TraceEvent::Evaluation {
            record,
            root: eval.root.clone(),
            case: root.case().number(),
            case_action: root.case().action().to_string(),
            nodes: tree.iter().map(|n| NodeSummary::from(&eval.nodes[&n.id])).collect(),
        });
        self.model.trees[record].evaluation = Some(eval.clone());
        match root.status() {
            TriState::Accept => self.accept_tree(record, &eval, log),
            TriState::Reject => self.reject_tree(record, &root, log),
            TriState::Unsure => self.share_information(record, &tree, &eval, log),
        }
    }

    fn accept_tree(&mut self, record: usize, eval: &TreeEvaluation, log: &mut TurnLog) -> Result<(), EngineError> {
        let rec = self.model.trees[record].clone();
        self.model.trees[record].outcome = Some(TriState::Accept);
        for n in rec.tree.iter() {
            let ne = &eval.nodes[&n.id];
            if ne.belief.status() == TriState::Accept {
                self.establish(ne.belief.statement.clone(), log);
                if let Some(rel) = ne.relation.as_ref().filter(|r| r.status() == TriState::Accept) {
                    self.establish(rel.statement.clone(), log);
                }
            }
        }
        if let Some(target) = rec.serves.as_ref().and_then(|s| s.counter_target.clone()) {
            self.establish(target.negate(), log);
        }
        let root = rec.tree.root().belief.statement.clone();
        let ack = DiscourseAct::new(ActKind::AcceptAck, Speaker::System, vec![ActPart::explicit(root.clone(), None)]);
        self.emit(ack, log)?;
        match rec.serves {
            None => {
                self.phase = Phase::ConcludedAccept;
                log.events.push(TraceEvent::Concluded {
                    accepted: true,
                    statement: root,
                });
                Ok(())
            }
            Some(_) => self.resume_while_ready(log),
        }
    }

    fn reject_tree(&mut self, record: usize, root: &EvaluationAnnotation, log: &mut TurnLog) -> Result<(), EngineError> {
        self.model.trees[record].outcome = Some(TriState::Reject);
        let statement = root.statement.clone();
        let mut parts = vec![ActPart::explicit(statement.clone(), None)];
        let strongest = root
            .evidence
            .iter()
            .filter(|it| it.side(&statement) == Some(Side::Attack))
            .fold(None, |best: Option<&crate::evaluation::EvidenceItem>, it| match best {
                Some(b) if b.effective >= it.effective => Some(b),
                _ => Some(it),
            });
        if let Some(item) = strongest {
            parts.push(ActPart::explicit(item.child.statement.clone(), Some(item.child.strength)));
            parts.push(ActPart::implicit(item.relation.statement(), Some(item.relation.strength)));
        }
        self.emit(DiscourseAct::new(ActKind::RejectInform, Speaker::System, parts), log)?;
        if self.model.trees[record].serves.is_none() {
            self.conclude_reject(statement, log);
        } else if !self.kb.holds(&statement.negate()) {
            self.kb.adopt(Belief::own("", statement.negate(), Strength::Strong));
        }
        Ok(())
    }

    fn conclude_reject(&mut self, statement: Statement, log: &mut TurnLog) {
        if !self.kb.holds(&statement.negate()) {
            self.kb.adopt(Belief::own("", statement.negate(), Strength::Strong));
        }
        self.phase = Phase::ConcludedReject;
        log.events.push(TraceEvent::Concluded {
            accepted: false,
            statement,
        });
    }

    /// Undecided root: pick a focus and a strategy and open an action.
    fn share_information(
        &mut self,
        record: usize,
        tree: &ProposedBeliefTree,
        eval: &TreeEvaluation,
        log: &mut TurnLog,
    ) -> Result<(), EngineError> {
        let focus = select_focus(tree, eval, &eval.root).expect("root is unsure");
        log.events.push(TraceEvent::Focus {
            record,
            node: focus.node.clone(),
            members: focus.members.clone(),
            rationale: focus.rationale,
            fallback: focus.fallback,
            paths: focus.paths.clone(),
        });
        let member = focus.first().expect("focus of an unsure node is never empty");
        let ne = &eval.nodes[member.node()];
        let ann = match member {
            FocusMember::Belief { .. } => &ne.belief,
            FocusMember::Relation { .. } => ne.relation.as_ref().expect("relation member has a relation"),
        };
        let facts = StrategyFacts::gather(ann, &self.kb);
        let choice = self.config.registry.select(&facts)?;
        let counter = choice
            .counterevidence
            .as_ref()
            .map(|it| Statement::Fact(it.relation.child.clone()));
        log.events.push(TraceEvent::Strategy {
            focus: facts.focus.clone(),
            critical: facts.critical.iter().map(|it| it.child.statement.clone()).collect(),
            non_critical: facts.non_critical.iter().map(|it| it.child.statement.clone()).collect(),
            knowref: facts.knowref,
            choice: choice.kind,
            counterevidence: counter.clone(),
        });
        if !self.attempted.insert((choice.kind, facts.focus.clone(), counter)) {
            // The same move was already made for this focus without effect.
            log.events.push(TraceEvent::Exhausted {
                strategy: choice.kind,
                focus: facts.focus.clone(),
            });
            let root = eval.root().belief.clone();
            return self.reject_tree(record, &root, log);
        }
        let action = instantiate_recipe(
            &self.config.registry,
            &choice,
            ann,
            tree,
            record,
            &self.kb,
            self.next_action,
        )?;
        self.next_action += 1;
        let strategy = self.config.registry.strategy_for(choice.kind)?;
        let opening = strategy.opening_acts(&action);
        self.model.stack.push(action.clone());
        log.events.push(TraceEvent::ActionOpened {
            id: action.id,
            name: action.name.clone(),
            strategy: action.strategy,
            bel1: action.bindings.bel1.clone(),
            bel2: action.bindings.bel2.clone(),
            depth: self.depth(),
        });
        for act in opening {
            self.emit(act, log)?;
        }
        self.phase = Phase::AwaitingResponse;
        Ok(())
    }

    fn resume_while_ready(&mut self, log: &mut TurnLog) -> Result<(), EngineError> {
        if let Some(top) = self.model.top() {
            if check_preconditions(top, &self.kb).is_some() {
                return self.resume(log);
            }
            // The focus got settled some other way; nothing left to ask.
            let bel1 = &top.bindings.bel1;
            if self.kb.is_mutual(bel1) || self.kb.is_mutual(&bel1.negate()) {
                log.events.push(TraceEvent::Moot { id: top.id });
                return self.close_top(None, log);
            }
        }
        Ok(())
    }

    fn resume(&mut self, log: &mut TurnLog) -> Result<(), EngineError> {
        let top = self.model.top().ok_or(EngineError::NoOpenAction)?;
        let disjunct = check_preconditions(top, &self.kb).ok_or(EngineError::PreconditionsStillOpen)?;
        self.close_top(Some(disjunct), log)
    }

    /// Pop the innermost action, settle its acts, and re-evaluate the tree
    /// it was working on.
    fn close_top(&mut self, disjunct: Option<usize>, log: &mut TurnLog) -> Result<(), EngineError> {
        let mut action = self.model.stack.pop().ok_or(EngineError::NoOpenAction)?;
        action.satisfied_disjunct = disjunct;
        action.status = if disjunct.is_some() {
            ActionStatus::Done
        } else {
            ActionStatus::Abandoned
        };
        for (i, act) in self.model.acts.iter_mut().enumerate() {
            if act.serves != Some(action.id) || act.status != ActStatus::Open {
                continue;
            }
            act.status = if act.pursues.is_empty() {
                ActStatus::Done
            } else if act.pursues.iter().all(|s| self.kb.is_mutual(s)) {
                ActStatus::Achieved
            } else {
                ActStatus::Abandoned
            };
            log.events.push(TraceEvent::ActStatus {
                act: i,
                status: act.status,
            });
        }
        log.events.push(TraceEvent::ActionClosed {
            id: action.id,
            name: action.name.clone(),
            disjunct,
            status: action.status,
            depth: self.model.stack.len(),
        });
        let record = action.bindings.tree;
        self.model.closed.push(action);
        self.phase = if self.model.stack.is_empty() {
            Phase::AwaitingProposal
        } else {
            Phase::AwaitingResponse
        };
        self.dispatch(record, log)
    }

    fn accept_reply(&mut self, top: &ActionInstance, log: &mut TurnLog) -> Result<(), EngineError> {
        for s in self.pursued(top.id) {
            self.establish(s, log);
        }
        // Agreeing with the system's doubt withdraws the partner's claim.
        let bel1 = top.bindings.bel1.clone();
        if !self.kb.is_conceded(&bel1) && !self.kb.is_mutual(&bel1) {
            self.kb.concede(bel1.clone());
            log.events.push(TraceEvent::Conceded { statement: bel1 });
        }
        match check_preconditions(top, &self.kb) {
            Some(d) => self.close_top(Some(d), log),
            None => self.close_top(None, log),
        }
    }

    fn provide_support(
        &mut self,
        top: &ActionInstance,
        payload: &TreePayload,
        support: ProposedBeliefTree,
        log: &mut TurnLog,
    ) -> Result<(), EngineError> {
        let record = top.bindings.tree;
        let base = self.model.trees[record].tree.clone();
        let at = base
            .iter()
            .find(|n| n.belief.statement == top.bindings.bel1)
            .map(|n| n.id.clone());
        let children: Vec<Proposition> = support
            .root()
            .children
            .iter()
            .map(|c| support.node(c).expect("validated").proposition().clone())
            .collect();
        self.kb.record_partner(top.bindings.bel1.clone(), Some(children));
        if let Some(at) = at {
            let (merged, added) = graft(&base.to_payload(), &at, payload);
            let tree = ProposedBeliefTree::from_payload(&merged, &self.kb)?;
            self.seen.insert(support.signature());
            self.model.trees[record].tree = tree;
            log.events.push(TraceEvent::Grafted {
                record,
                node: at,
                children: added,
            });
        }
        if check_preconditions(top, &self.kb).is_some() {
            self.resume(log)
        } else {
            let service = Service {
                action: top.id,
                counter_target: None,
            };
            self.handle_tree(support, Some(service), log)
        }
    }
}

/// Attach the children of `support`'s root under node `at` of `base`,
/// renaming ids that collide. Returns the merged payload and the ids of the
/// attached children.
pub fn graft(base: &TreePayload, at: &str, support: &TreePayload) -> (TreePayload, Vec<NodeId>) {
    let mut taken: BTreeSet<NodeId> = base.nodes.iter().map(|n| n.id.clone()).collect();
    let mut rename = std::collections::BTreeMap::new();
    for n in support.nodes.iter().filter(|n| n.id != support.root) {
        let mut id = n.id.clone();
        while taken.contains(&id) {
            id.push('\'');
        }
        taken.insert(id.clone());
        rename.insert(n.id.clone(), id);
    }
    let mut merged = base.clone();
    let mut added = Vec::new();
    for n in &support.nodes {
        if n.id == support.root {
            added = n.children.iter().map(|c| rename[c].clone()).collect();
            continue;
        }
        merged.nodes.push(NodePayload {
            id: rename[&n.id].clone(),
            children: n.children.iter().map(|c| rename[c].clone()).collect(),
            ..n.clone()
        });
    }
    if let Some(node) = merged.nodes.iter_mut().find(|n| n.id == at) {
        node.children.extend(added.iter().cloned());
    }
    (merged, added)
}
