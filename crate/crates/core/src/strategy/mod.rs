//! Information-sharing strategies.
//!
//! Each strategy is a trait object in a [`StrategyRegistry`], keyed by name
//! and consulted in registration order. A strategy decides whether it fits
//! the situation around the focus ([`StrategyFacts`]), supplies the recipe
//! it is carried out by, and produces its opening discourse acts.

mod builtin;
pub mod recipe;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::acts::DiscourseAct;
use crate::belief::{KnowledgeBase, Statement};
use crate::error::StrategyError;
use crate::evaluation::{evaluate, EvaluationAnnotation, EvidenceItem, ItemSource, Side, TriState};
use crate::tree::ProposedBeliefTree;

pub use builtin::{AskWhy, AskWhyWithCounter, ExpressUncertainty, InviteAttack};
pub use recipe::{check_preconditions, ActionInstance, ActionStatus, Bindings, Condition, ConditionContext, Recipe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    InviteAttack,
    AskWhy,
    AskWhyWithCounter,
    ExpressUncertainty,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::InviteAttack,
        StrategyKind::AskWhy,
        StrategyKind::AskWhyWithCounter,
        StrategyKind::ExpressUncertainty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::InviteAttack => "invite-attack",
            StrategyKind::AskWhy => "ask-why",
            StrategyKind::AskWhyWithCounter => "ask-why-with-counter",
            StrategyKind::ExpressUncertainty => "express-uncertainty",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyChoice {
    pub kind: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterevidence: Option<EvidenceItem>,
}

/// Whether removing `item` from the attack on `bel` would leave the system
/// accepting it. `ann` is the focus's evaluation; the check uses its
/// lower-bound evidence.
pub fn is_critical(item: &EvidenceItem, bel: &Statement, ann: &EvaluationAnnotation) -> bool {
    if item.side(bel) != Some(Side::Attack) {
        return false;
    }
    let mut removed = false;
    let remaining = ann
        .evidence
        .iter()
        .chain(
            ann.potential
                .iter()
                .enumerate()
                .filter(|(i, _)| ann.potential_side(*i) == Side::Attack)
                .map(|(_, it)| it),
        )
        .filter(|it| {
            if !removed && *it == item {
                removed = true;
                false
            } else {
                true
            }
        });
    evaluate(bel, remaining, &ann.base, ann.thresholds).result == TriState::Accept
}

/// The situation strategies are chosen on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyFacts {
    pub focus: Statement,
    /// Critical counterevidence, strongest first, ties in knowledge-base order.
    pub critical: Vec<EvidenceItem>,
    pub non_critical: Vec<EvidenceItem>,
    /// The system knows the partner's support for the focus.
    pub knowref: bool,
}

impl StrategyFacts {
    pub fn gather(ann: &EvaluationAnnotation, kb: &KnowledgeBase) -> Self {
        let focus = ann.statement.clone();
        let mut counter: Vec<&EvidenceItem> = ann
            .evidence
            .iter()
            .filter(|it| matches!(it.source, ItemSource::Own { .. }) && it.side(&focus) == Some(Side::Attack))
            .collect();
        counter.sort_by_key(|it| std::cmp::Reverse(it.effective));
        let (critical, non_critical): (Vec<EvidenceItem>, Vec<EvidenceItem>) = counter
            .into_iter()
            .cloned()
            .partition(|it| is_critical(it, &focus, ann));
        Self {
            knowref: kb.knowref_support(&focus).is_some(),
            focus,
            critical,
            non_critical,
        }
    }

    pub fn has_counter(&self) -> bool {
        !self.critical.is_empty() || !self.non_critical.is_empty()
    }
}

pub trait InfoSharingStrategy: Send + Sync + fmt::Debug {
    fn kind(&self) -> StrategyKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    /// `Some` when this strategy's selection criteria hold.
    fn choose(&self, facts: &StrategyFacts) -> Option<StrategyChoice>;

    fn recipe(&self) -> Recipe;

    /// Acts that open the subdialogue for a freshly pushed action.
    fn opening_acts(&self, action: &ActionInstance) -> Vec<DiscourseAct>;
}

#[derive(Debug, Clone)]
struct Entry {
    strategy: Arc<dyn InfoSharingStrategy>,
    recipe: Recipe,
}

/// Strategies by name, in priority order, each with its active recipe.
#[derive(Debug, Clone)]
pub struct StrategyRegistry {
    entries: Vec<Entry>,
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(InviteAttack));
        r.register(Arc::new(AskWhy));
        r.register(Arc::new(AskWhyWithCounter));
        r.register(Arc::new(ExpressUncertainty));
        r
    }

    /// Add a strategy, replacing any registered under the same name.
    pub fn register(&mut self, strategy: Arc<dyn InfoSharingStrategy>) {
        let recipe = strategy.recipe();
        let entry = Entry { strategy, recipe };
        match self.entries.iter_mut().find(|e| e.strategy.name() == entry.strategy.name()) {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
    }

    /// Replace the recipe used by the strategy the recipe names.
    pub fn override_recipe(&mut self, recipe: Recipe) -> Result<(), StrategyError> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| e.strategy.kind() == recipe.strategy)
            .ok_or_else(|| StrategyError::UnknownStrategy(recipe.strategy.name().to_string()))?;
        entry.recipe = recipe;
        Ok(())
    }

    /// Keep only the named strategies.
    pub fn retain(&mut self, names: &[&str]) -> Result<(), StrategyError> {
        for n in names {
            self.get(n)?;
        }
        self.entries.retain(|e| names.contains(&e.strategy.name()));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&dyn InfoSharingStrategy, StrategyError> {
        self.entries
            .iter()
            .find(|e| e.strategy.name() == name)
            .map(|e| e.strategy.as_ref())
            .ok_or_else(|| StrategyError::UnknownStrategy(name.to_string()))
    }

    pub fn recipe_for(&self, kind: StrategyKind) -> Result<&Recipe, StrategyError> {
        self.entries
            .iter()
            .find(|e| e.strategy.kind() == kind)
            .map(|e| &e.recipe)
            .ok_or_else(|| StrategyError::UnknownStrategy(kind.name().to_string()))
    }

    pub fn strategy_for(&self, kind: StrategyKind) -> Result<&dyn InfoSharingStrategy, StrategyError> {
        self.get(kind.name())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.strategy.name()).collect()
    }

    /// First registered strategy whose criteria hold.
    pub fn select(&self, facts: &StrategyFacts) -> Result<StrategyChoice, StrategyError> {
        self.entries
            .iter()
            .find_map(|e| e.strategy.choose(facts))
            .ok_or(StrategyError::NoApplicableStrategy)
    }
}

/// Pick the strategy for `ann.statement` with the built-in registry.
pub fn select_strategy(ann: &EvaluationAnnotation, kb: &KnowledgeBase) -> Result<StrategyChoice, StrategyError> {
    StrategyRegistry::with_builtins().select(&StrategyFacts::gather(ann, kb))
}

/// Bind the chosen strategy's recipe for `focus` within `tree`.
#[allow(clippy::too_many_arguments)]
pub fn instantiate_recipe(
    registry: &StrategyRegistry,
    choice: &StrategyChoice,
    focus: &EvaluationAnnotation,
    tree: &ProposedBeliefTree,
    tree_record: usize,
    kb: &KnowledgeBase,
    action_id: usize,
) -> Result<ActionInstance, StrategyError> {
    let recipe = registry.recipe_for(choice.kind)?;
    let bindings = Bindings {
        bel1: focus.statement.clone(),
        bel2: choice
            .counterevidence
            .as_ref()
            .map(|it| Statement::Fact(it.relation.child.clone())),
        top: tree.root().belief.statement.clone(),
        tree: tree_record,
    };
    let ctx = ConditionContext {
        tree: Some(tree),
        focus_uncertain: focus.status() == TriState::Unsure,
        counter_critical: choice
            .counterevidence
            .as_ref()
            .map(|it| is_critical(it, &focus.statement, focus)),
        ..ConditionContext::new(kb)
    };
    recipe::instantiate(recipe, action_id, bindings, choice.counterevidence.clone(), &ctx)
}
