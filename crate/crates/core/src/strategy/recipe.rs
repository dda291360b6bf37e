//! Recipes: applicability conditions, constraints, disjunctive
//! preconditions, body and goals, over a closed condition vocabulary.
//!
//! Conditions are written as short strings, e.g. `MB(supports(bel2,¬bel1))`,
//! `¬knowref(bel1)` or `results-in`. Roles are `bel1` (the focus), `bel2`
//! (the presented counterevidence), `top` (root of the proposal) and `tree`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::belief::{KnowledgeBase, Polarity, Statement};
use crate::error::{ParseError, StrategyError};
use crate::evaluation::{EvidenceItem, Evaluator};
use crate::tree::ProposedBeliefTree;

use super::StrategyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Bel1,
    Bel2,
    Top,
}

impl Role {
    fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "bel1" | "_bel1" => Some(Role::Bel1),
            "bel2" | "_bel2" => Some(Role::Bel2),
            "top" | "_top-belief" => Some(Role::Top),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Role::Bel1 => "bel1",
            Role::Bel2 => "bel2",
            Role::Top => "top",
        }
    }
}

/// A statement pattern over roles.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Fact { role: Role, negated: bool },
    Supports {
        child: Role,
        parent: Role,
        parent_negated: bool,
        negated: bool,
    },
}

fn strip_neg(s: &str) -> (bool, &str) {
    let s = s.trim();
    for prefix in ["¬", "~", "!"] {
        if let Some(rest) = s.strip_prefix(prefix) {
            let (n, inner) = strip_neg(rest);
            return (!n, inner);
        }
    }
    (false, s)
}

impl FromStr for Term {
    type Err = ParseError;

    fn from_str(input: &str) -> Result<Self, ParseError> {
        let (negated, body) = strip_neg(input);
        if let Some(inner) = body.strip_prefix("supports(").and_then(|r| r.strip_suffix(')')) {
            let (c, p) = inner
                .split_once(',')
                .ok_or_else(|| ParseError::new(input, "supports needs two roles"))?;
            let (parent_negated, p) = strip_neg(p);
            let child = Role::parse(c).ok_or_else(|| ParseError::new(input, "unknown role"))?;
            let parent = Role::parse(p).ok_or_else(|| ParseError::new(input, "unknown role"))?;
            return Ok(Term::Supports {
                child,
                parent,
                parent_negated,
                negated,
            });
        }
        let role = Role::parse(body).ok_or_else(|| ParseError::new(input, "unknown role"))?;
        Ok(Term::Fact { role, negated })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = |b: bool| if b { "¬" } else { "" };
        match self {
            Term::Fact { role, negated } => write!(f, "{}{}", neg(*negated), role.name()),
            Term::Supports {
                child,
                parent,
                parent_negated,
                negated,
            } => write!(
                f,
                "{}supports({},{}{})",
                neg(*negated),
                child.name(),
                neg(*parent_negated),
                parent.name()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    /// The system holds the statement.
    Believe(Term),
    /// The system can neither accept nor reject the focus.
    Uncertain,
    /// The statement is mutually believed.
    Mb(Term),
    /// The system knows the partner's support for the role's statement.
    Knowref(Role),
    /// The system knows some counterevidence against the role's statement.
    KnowsCounter(Role),
    /// Disbelieving the counterevidence would make the system accept bel1.
    ResultsIn,
    MemberOf,
    RootOf,
    /// A mutual belief bearing on the role's statement was established
    /// after the action was opened.
    NewEvidence(Role),
    Not(Box<Condition>),
}

fn call<'a>(body: &'a str, name: &str) -> Option<&'a str> {
    body.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')
}

impl FromStr for Condition {
    type Err = ParseError;

    fn from_str(input: &str) -> Result<Self, ParseError> {
        let (negated, body) = strip_neg(input);
        let role = |s: &str| Role::parse(s).ok_or_else(|| ParseError::new(input, "unknown role"));
        let cond = if let Some(a) = call(body, "believe") {
            Condition::Believe(a.parse()?)
        } else if let Some(a) = call(body, "MB") {
            Condition::Mb(a.parse()?)
        } else if let Some(a) = call(body, "knowref") {
            Condition::Knowref(role(a)?)
        } else if let Some(a) = call(body, "knows-counter") {
            Condition::KnowsCounter(role(a)?)
        } else if let Some(a) = call(body, "new-evidence") {
            Condition::NewEvidence(role(a)?)
        } else {
            match body {
                "uncertain" | "uncertain(bel1)" => Condition::Uncertain,
                "results-in" => Condition::ResultsIn,
                "member-of" | "member-of(bel1,tree)" => Condition::MemberOf,
                "root-of" | "root-of(tree,top)" => Condition::RootOf,
                _ => return Err(ParseError::new(input, "unknown condition")),
            }
        };
        Ok(if negated {
            Condition::Not(Box::new(cond))
        } else {
            cond
        })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Believe(t) => write!(f, "believe({t})"),
            Condition::Uncertain => f.write_str("uncertain(bel1)"),
            Condition::Mb(t) => write!(f, "MB({t})"),
            Condition::Knowref(r) => write!(f, "knowref({})", r.name()),
            Condition::KnowsCounter(r) => write!(f, "knows-counter({})", r.name()),
            Condition::ResultsIn => f.write_str("results-in"),
            Condition::MemberOf => f.write_str("member-of(bel1,tree)"),
            Condition::RootOf => f.write_str("root-of(tree,top)"),
            Condition::NewEvidence(r) => write!(f, "new-evidence({})", r.name()),
            Condition::Not(c) => write!(f, "¬{c}"),
        }
    }
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn conds(items: &[&str]) -> Vec<Condition> {
    items.iter().map(|c| c.parse().expect("built-in condition")).collect()
}

/// An action template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub name: String,
    pub strategy: StrategyKind,
    #[serde(default)]
    pub applicability: Vec<Condition>,
    #[serde(default)]
    pub constraints: Vec<Condition>,
    /// Disjunction of conjunctions.
    #[serde(default)]
    pub preconditions: Vec<Vec<Condition>>,
    #[serde(default)]
    pub body: Vec<String>,
    /// Disjunction.
    #[serde(default)]
    pub goals: Vec<Condition>,
}

impl Recipe {
    pub fn new(name: &str, strategy: StrategyKind, applicability: &[&str], preconditions: &[&[&str]]) -> Self {
        Self {
            name: name.to_string(),
            strategy,
            applicability: conds(applicability),
            constraints: conds(&["member-of(bel1,tree)", "root-of(tree,top)"]),
            preconditions: preconditions.iter().map(|d| conds(d)).collect(),
            body: vec!["Evaluate-Proposed-Beliefs(top)".to_string()],
            goals: conds(&["believe(top)", "believe(¬top)"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bindings {
    pub bel1: Statement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bel2: Option<Statement>,
    pub top: Statement,
    /// Belief-tree record the focus belongs to.
    pub tree: usize,
}

impl Bindings {
    fn role(&self, role: Role) -> Option<&Statement> {
        match role {
            Role::Bel1 => Some(&self.bel1),
            Role::Bel2 => self.bel2.as_ref(),
            Role::Top => Some(&self.top),
        }
    }

    /// Ground a term; `None` when a role is unbound or a relation would
    /// need a non-proposition argument.
    pub fn ground(&self, term: &Term) -> Option<Statement> {
        match term {
            Term::Fact { role, negated } => {
                let s = self.role(*role)?.clone();
                Some(if *negated { s.negate() } else { s })
            }
            Term::Supports {
                child,
                parent,
                parent_negated,
                negated,
            } => {
                let c = self.role(*child)?.as_fact()?.clone();
                let mut p = self.role(*parent)?.as_fact()?.clone();
                if *parent_negated {
                    p = p.negate();
                }
                Some(Statement::Supports {
                    child: c,
                    parent: p,
                    polarity: if *negated {
                        Polarity::Negative
                    } else {
                        Polarity::Positive
                    },
                })
            }
        }
    }
}

/// Everything condition checkers may consult.
#[derive(Debug, Clone, Copy)]
pub struct ConditionContext<'a> {
    pub kb: &'a KnowledgeBase,
    pub evaluator: Evaluator<'a>,
    pub tree: Option<&'a ProposedBeliefTree>,
    pub focus_uncertain: bool,
    pub counter_critical: Option<bool>,
    /// Number of mutual beliefs that existed when the action opened.
    pub mutual_mark: usize,
}

impl<'a> ConditionContext<'a> {
    pub fn new(kb: &'a KnowledgeBase) -> Self {
        Self {
            kb,
            evaluator: Evaluator::new(kb),
            tree: None,
            focus_uncertain: false,
            counter_critical: None,
            mutual_mark: 0,
        }
    }
}

fn bears_on(mutual: &Statement, target: &Statement) -> bool {
    if mutual == target || *mutual == target.negate() {
        return true;
    }
    match (mutual, target.as_fact()) {
        (Statement::Supports { parent, .. }, Some(p)) => parent == p || *parent == p.negate(),
        _ => false,
    }
}

pub fn holds(cond: &Condition, b: &Bindings, ctx: &ConditionContext<'_>) -> bool {
    match cond {
        Condition::Believe(t) => b.ground(t).is_some_and(|s| ctx.kb.holds(&s)),
        Condition::Uncertain => ctx.focus_uncertain,
        Condition::Mb(t) => b.ground(t).is_some_and(|s| ctx.kb.is_mutual(&s)),
        Condition::Knowref(r) => b.role(*r).is_some_and(|s| ctx.kb.knowref_support(s).is_some()),
        Condition::KnowsCounter(r) => b
            .role(*r)
            .is_some_and(|s| !ctx.evaluator.counterevidence(s).is_empty()),
        Condition::ResultsIn => ctx.counter_critical == Some(true),
        Condition::MemberOf => ctx.tree.is_some_and(|t| t.statements().contains(&b.bel1)),
        Condition::RootOf => ctx.tree.is_some_and(|t| t.root().belief.statement == b.top),
        Condition::NewEvidence(r) => b.role(*r).is_some_and(|target| {
            ctx.kb
                .mutual_beliefs()
                .iter()
                .skip(ctx.mutual_mark)
                .any(|m| bears_on(m, target))
        }),
        Condition::Not(c) => !holds(c, b, ctx),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionStatus {
    Pending,
    PreconditionsOpen,
    Executable,
    Done,
    Abandoned,
}

/// A bound recipe on the problem-solving stack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionInstance {
    pub id: usize,
    pub name: String,
    pub strategy: StrategyKind,
    pub bindings: Bindings,
    pub applicability: Vec<Condition>,
    pub constraints: Vec<Condition>,
    pub preconditions: Vec<Vec<Condition>>,
    pub body: Vec<String>,
    pub goals: Vec<Condition>,
    pub status: ActionStatus,
    pub mutual_mark: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterevidence: Option<EvidenceItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfied_disjunct: Option<usize>,
}

impl ActionInstance {
    /// Per-disjunct satisfaction against the current knowledge base.
    pub fn precondition_status(&self, kb: &KnowledgeBase) -> Vec<bool> {
        let ctx = ConditionContext {
            mutual_mark: self.mutual_mark,
            ..ConditionContext::new(kb)
        };
        self.preconditions
            .iter()
            .map(|d| d.iter().all(|c| holds(c, &self.bindings, &ctx)))
            .collect()
    }
}

/// Bind `recipe`, failing unless every applicability condition and
/// constraint holds.
pub fn instantiate(
    recipe: &Recipe,
    id: usize,
    bindings: Bindings,
    counterevidence: Option<EvidenceItem>,
    ctx: &ConditionContext<'_>,
) -> Result<ActionInstance, StrategyError> {
    for c in recipe.applicability.iter().chain(&recipe.constraints) {
        if !holds(c, &bindings, ctx) {
            return Err(StrategyError::ApplicabilityViolation {
                recipe: recipe.name.clone(),
                condition: c.to_string(),
            });
        }
    }
    Ok(ActionInstance {
        id,
        name: recipe.name.clone(),
        strategy: recipe.strategy,
        bindings,
        applicability: recipe.applicability.clone(),
        constraints: recipe.constraints.clone(),
        preconditions: recipe.preconditions.clone(),
        body: recipe.body.clone(),
        goals: recipe.goals.clone(),
        status: ActionStatus::PreconditionsOpen,
        mutual_mark: ctx.kb.mutual_beliefs().len(),
        counterevidence,
        satisfied_disjunct: None,
    })
}

/// Index of the first satisfied precondition disjunct.
pub fn check_preconditions(action: &ActionInstance, kb: &KnowledgeBase) -> Option<usize> {
    action.precondition_status(kb).iter().position(|&ok| ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_strings_round_trip() {
        for s in [
            "MB(supports(bel2,¬bel1))",
            "MB(¬bel2)",
            "MB(¬supports(bel2,¬bel1))",
            "¬knowref(bel1)",
            "¬knows-counter(bel1)",
            "believe(supports(bel2,¬bel1))",
            "results-in",
            "uncertain(bel1)",
            "member-of(bel1,tree)",
            "root-of(tree,top)",
            "new-evidence(bel1)",
        ] {
            let c: Condition = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!("MB(bel9)".parse::<Condition>().is_err());
        assert!("frobnicate".parse::<Condition>().is_err());
    }

    #[test]
    fn grounding_relation_terms() {
        let b = Bindings {
            bel1: "Teaches(Smith,Logic)".parse().unwrap(),
            bel2: Some("On-Sabbatical(Smith,next-year)".parse().unwrap()),
            top: "Better-Than(Logic,Algorithms)".parse().unwrap(),
            tree: 0,
        };
        let t: Term = "¬supports(bel2,¬bel1)".parse().unwrap();
        assert_eq!(
            b.ground(&t).unwrap().to_string(),
            "¬supports(On-Sabbatical(Smith,next-year), ¬Teaches(Smith,Logic))"
        );
        let unbound = Bindings { bel2: None, ..b };
        assert!(unbound.ground(&t).is_none());
    }
}
