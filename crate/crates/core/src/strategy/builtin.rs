use crate::acts::{ActKind, ActPart, DiscourseAct, Speaker};
use crate::belief::Statement;

use super::recipe::{ActionInstance, Recipe};
use super::{InfoSharingStrategy, StrategyChoice, StrategyFacts, StrategyKind};

const COUNTER_DISJUNCTS: [&[&str]; 3] = [
    &["MB(bel2)", "MB(supports(bel2,¬bel1))"],
    &["MB(¬bel2)"],
    &["MB(¬supports(bel2,¬bel1))"],
];

/// The presented counterevidence as two parts: the belief itself, stated,
/// and its relation to the focus, left implicit.
fn counter_parts(action: &ActionInstance) -> Option<(Vec<ActPart>, Vec<Statement>)> {
    let item = action.counterevidence.as_ref()?;
    let bel2 = Statement::Fact(item.relation.child.clone());
    let rel = item.relation.statement();
    let parts = vec![
        ActPart::explicit(bel2.clone(), Some(item.child.strength)),
        ActPart::implicit(rel.clone(), Some(item.relation.strength)),
    ];
    Some((parts, vec![bel2, rel]))
}

fn ask_why(action: &ActionInstance) -> DiscourseAct {
    DiscourseAct::new(ActKind::AskWhy, Speaker::System, vec![ActPart::explicit(
        action.bindings.bel1.clone(),
        None,
    )])
    .serving(action.id, Vec::new())
}

fn inform(action: &ActionInstance, kind: ActKind) -> Option<DiscourseAct> {
    let (parts, pursues) = counter_parts(action)?;
    Some(DiscourseAct::new(kind, Speaker::System, parts).serving(action.id, pursues))
}

/// Present critical counterevidence and invite the partner to refute it.
#[derive(Debug, Clone, Copy, Default)]
pub struct InviteAttack;

impl InfoSharingStrategy for InviteAttack {
    fn kind(&self) -> StrategyKind {
        StrategyKind::InviteAttack
    }

    fn choose(&self, facts: &StrategyFacts) -> Option<StrategyChoice> {
        let item = facts.critical.first()?;
        Some(StrategyChoice {
            kind: self.kind(),
            counterevidence: Some(item.clone()),
        })
    }

    fn recipe(&self) -> Recipe {
        Recipe::new(
            "Reevaluate-After-Invite-Attack",
            self.kind(),
            &[
                "uncertain(bel1)",
                "believe(bel2)",
                "believe(supports(bel2,¬bel1))",
                "results-in",
            ],
            &COUNTER_DISJUNCTS,
        )
    }

    fn opening_acts(&self, action: &ActionInstance) -> Vec<DiscourseAct> {
        inform(action, ActKind::ExpressDoubt).into_iter().collect()
    }
}

/// Ask for the partner's reasons when the system has nothing to offer.
#[derive(Debug, Clone, Copy, Default)]
pub struct AskWhy;

impl InfoSharingStrategy for AskWhy {
    fn kind(&self) -> StrategyKind {
        StrategyKind::AskWhy
    }

    fn choose(&self, facts: &StrategyFacts) -> Option<StrategyChoice> {
        (!facts.has_counter() && !facts.knowref).then_some(StrategyChoice {
            kind: self.kind(),
            counterevidence: None,
        })
    }

    fn recipe(&self) -> Recipe {
        Recipe::new(
            "Reevaluate-After-Ask-Why",
            self.kind(),
            &["¬knowref(bel1)", "¬knows-counter(bel1)"],
            &[&["knowref(bel1)"]],
        )
    }

    fn opening_acts(&self, action: &ActionInstance) -> Vec<DiscourseAct> {
        vec![ask_why(action)]
    }
}

/// Ask for reasons while also mentioning non-critical counterevidence.
#[derive(Debug, Clone, Copy, Default)]
pub struct AskWhyWithCounter;

impl InfoSharingStrategy for AskWhyWithCounter {
    fn kind(&self) -> StrategyKind {
        StrategyKind::AskWhyWithCounter
    }

    fn choose(&self, facts: &StrategyFacts) -> Option<StrategyChoice> {
        if facts.knowref || !facts.critical.is_empty() {
            return None;
        }
        let item = facts.non_critical.first()?;
        Some(StrategyChoice {
            kind: self.kind(),
            counterevidence: Some(item.clone()),
        })
    }

    fn recipe(&self) -> Recipe {
        let mut preconditions: Vec<&[&str]> = vec![&["knowref(bel1)"]];
        preconditions.extend(COUNTER_DISJUNCTS);
        Recipe::new(
            "Reevaluate-After-Ask-Why-With-Counter",
            self.kind(),
            &["¬knowref(bel1)", "knows-counter(bel1)", "¬results-in"],
            &preconditions,
        )
    }

    fn opening_acts(&self, action: &ActionInstance) -> Vec<DiscourseAct> {
        let mut acts = vec![ask_why(action)];
        acts.extend(inform(action, ActKind::InformBelief));
        acts
    }
}

/// Tell the partner their support has not convinced the system, offering
/// counterevidence when there is some.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpressUncertainty;

impl InfoSharingStrategy for ExpressUncertainty {
    fn kind(&self) -> StrategyKind {
        StrategyKind::ExpressUncertainty
    }

    fn choose(&self, facts: &StrategyFacts) -> Option<StrategyChoice> {
        (facts.knowref && facts.critical.is_empty()).then(|| StrategyChoice {
            kind: self.kind(),
            counterevidence: facts.non_critical.first().cloned(),
        })
    }

    fn recipe(&self) -> Recipe {
        Recipe::new(
            "Reevaluate-After-Express-Uncertainty",
            self.kind(),
            &["knowref(bel1)"],
            &[&["new-evidence(bel1)"]],
        )
    }

    fn opening_acts(&self, action: &ActionInstance) -> Vec<DiscourseAct> {
        let mut acts = vec![DiscourseAct::new(ActKind::ExpressUncertainty, Speaker::System, vec![
            ActPart::explicit(action.bindings.bel1.clone(), None),
        ])
        .serving(action.id, Vec::new())];
        acts.extend(inform(action, ActKind::InformBelief));
        acts
    }
}
