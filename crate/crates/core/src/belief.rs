//! Domain vocabulary: propositions, statements, strengths, endorsements,
//! beliefs, evidential relations and the per-agent knowledge base.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;
use crate::evaluation::endorse_statement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// A ground atom with polarity, e.g. `Teaches(Smith,Logic)` or
/// `¬On-Sabbatical(Smith,next-year)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Proposition {
    pub predicate: String,
    pub args: Vec<String>,
    pub polarity: Polarity,
}

impl Proposition {
    pub fn new<P, I, A>(predicate: P, args: I) -> Self
    where
        P: Into<String>,
        I: IntoIterator<Item = A>,
        A: Into<String>,
    {
        Self {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
            polarity: Polarity::Positive,
        }
    }

    pub fn negate(&self) -> Self {
        Self {
            polarity: self.polarity.flip(),
            ..self.clone()
        }
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }

    /// The same atom with positive polarity.
    pub fn atom(&self) -> Self {
        Self {
            polarity: Polarity::Positive,
            ..self.clone()
        }
    }
}

pub fn negate(p: &Proposition) -> Proposition {
    p.negate()
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_positive() {
            f.write_str("¬")?;
        }
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

/// Anything an agent can hold an attitude toward: a plain proposition or
/// the evidential claim `supports(child, parent)` (possibly negated).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    Fact(Proposition),
    Supports {
        child: Proposition,
        parent: Proposition,
        polarity: Polarity,
    },
}

impl Statement {
    pub fn supports(child: Proposition, parent: Proposition) -> Self {
        Statement::Supports {
            child,
            parent,
            polarity: Polarity::Positive,
        }
    }

    pub fn negate(&self) -> Self {
        match self {
            Statement::Fact(p) => Statement::Fact(p.negate()),
            Statement::Supports {
                child,
                parent,
                polarity,
            } => Statement::Supports {
                child: child.clone(),
                parent: parent.clone(),
                polarity: polarity.flip(),
            },
        }
    }

    pub fn as_fact(&self) -> Option<&Proposition> {
        match self {
            Statement::Fact(p) => Some(p),
            Statement::Supports { .. } => None,
        }
    }

    /// The proposition whose predicate determines the topic area.
    pub fn topic_anchor(&self) -> &Proposition {
        match self {
            Statement::Fact(p) => p,
            Statement::Supports { child, .. } => child,
        }
    }

    pub fn propositions(&self) -> Vec<&Proposition> {
        match self {
            Statement::Fact(p) => vec![p],
            Statement::Supports { child, parent, .. } => vec![child, parent],
        }
    }
}

impl From<Proposition> for Statement {
    fn from(p: Proposition) -> Self {
        Statement::Fact(p)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Fact(p) => p.fmt(f),
            Statement::Supports {
                child,
                parent,
                polarity,
            } => {
                if *polarity == Polarity::Negative {
                    f.write_str("¬")?;
                }
                write!(f, "supports({child}, {parent})")
            }
        }
    }
}

fn strip_negation(s: &str) -> (Polarity, &str) {
    let s = s.trim();
    for prefix in ["¬", "~", "!"] {
        if let Some(rest) = s.strip_prefix(prefix) {
            let (pol, inner) = strip_negation(rest);
            return (pol.flip(), inner);
        }
    }
    if let Some(rest) = s.strip_prefix("not ") {
        let (pol, inner) = strip_negation(rest);
        return (pol.flip(), inner);
    }
    (Polarity::Positive, s)
}

fn valid_symbol(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '.' | '\''))
}

impl FromStr for Proposition {
    type Err = ParseError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let (polarity, body) = strip_negation(input);
        let open = body
            .find('(')
            .ok_or_else(|| ParseError::new(input, "expected '('"))?;
        let inner = body
            .strip_suffix(')')
            .ok_or_else(|| ParseError::new(input, "expected trailing ')'"))?;
        let predicate = body[..open].trim();
        if !valid_symbol(predicate) {
            return Err(ParseError::new(input, "invalid predicate symbol"));
        }
        let arg_str = &inner[open + 1..];
        let args: Vec<String> = if arg_str.trim().is_empty() {
            Vec::new()
        } else {
            arg_str.split(',').map(|a| a.trim().to_string()).collect()
        };
        if let Some(bad) = args.iter().find(|a| !valid_symbol(a)) {
            return Err(ParseError::new(input, format!("invalid ground term '{bad}'")));
        }
        Ok(Proposition {
            predicate: predicate.to_string(),
            args,
            polarity,
        })
    }
}

/// Split `a, b` at the top-level comma.
fn split_pair(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

impl FromStr for Statement {
    type Err = ParseError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let (polarity, body) = strip_negation(input);
        if let Some(rest) = body.strip_prefix("supports(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| ParseError::new(input, "expected trailing ')'"))?;
            let (c, p) = split_pair(inner)
                .ok_or_else(|| ParseError::new(input, "supports needs two arguments"))?;
            let child: Proposition = c.parse()?;
            let parent: Proposition = p.parse()?;
            return Ok(Statement::Supports {
                child,
                parent,
                polarity,
            });
        }
        let mut p: Proposition = body.parse()?;
        if polarity == Polarity::Negative {
            p = p.negate();
        }
        Ok(Statement::Fact(p))
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Proposition);
string_serde!(Statement);

/// Confidence category; the discriminant is the additive score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Weak = 1,
    Strong = 2,
    Warranted = 3,
}

impl Strength {
    pub const ALL: [Strength; 3] = [Strength::Weak, Strength::Strong, Strength::Warranted];

    pub fn rank(self) -> i32 {
        self as i32
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strength::Weak => "weak",
            Strength::Strong => "strong",
            Strength::Warranted => "warranted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemanticForm {
    DirectAssertion,
    Hedged,
    TagQuestion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Expertise {
    Novice,
    #[default]
    Apprentice,
    Expert,
}

/// Why a belief is held. Only partner statements carry a semantic form and
/// an expertise level, so those fields live on that variant alone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Endorsement {
    OwnKnowledge { strength: Strength },
    Stereotype,
    PartnerStatement {
        form: SemanticForm,
        expertise: Expertise,
    },
    Derived { premises: Vec<Strength> },
}

impl Endorsement {
    pub fn strength(&self) -> Strength {
        match self {
            Endorsement::OwnKnowledge { strength } => *strength,
            Endorsement::Stereotype => Strength::Strong,
            Endorsement::PartnerStatement { form, expertise } => endorse_statement(*form, *expertise),
            Endorsement::Derived { premises } => {
                premises.iter().copied().min().unwrap_or(Strength::Weak)
            }
        }
    }
}

/// Combined strength of a set of endorsements: the strongest one wins.
pub fn combined_strength(endorsements: &[Endorsement]) -> Option<Strength> {
    endorsements.iter().map(Endorsement::strength).max()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Belief {
    pub id: String,
    pub statement: Statement,
    pub strength: Strength,
    pub endorsements: Vec<Endorsement>,
}

impl Belief {
    pub fn new(
        id: impl Into<String>,
        statement: Statement,
        endorsements: Vec<Endorsement>,
    ) -> Result<Self, crate::error::ModelError> {
        let id = id.into();
        let strength = combined_strength(&endorsements)
            .ok_or_else(|| crate::error::ModelError::NoEndorsement(id.clone()))?;
        Ok(Self {
            id,
            statement,
            strength,
            endorsements,
        })
    }

    pub fn own(id: impl Into<String>, statement: Statement, strength: Strength) -> Self {
        Self {
            id: id.into(),
            statement,
            strength,
            endorsements: vec![Endorsement::OwnKnowledge { strength }],
        }
    }

    pub fn check(&self) -> Result<(), crate::error::ModelError> {
        match combined_strength(&self.endorsements) {
            None => Err(crate::error::ModelError::NoEndorsement(self.id.clone())),
            Some(s) if s != self.strength => Err(crate::error::ModelError::StrengthMismatch {
                id: self.id.clone(),
                stated: self.strength,
                endorsed: s,
            }),
            Some(_) => Ok(()),
        }
    }
}

/// `supports(child, parent)` together with the strength it is held at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceRelation {
    pub child: Proposition,
    pub parent: Proposition,
    pub strength: Strength,
    pub endorsements: Vec<Endorsement>,
}

impl EvidenceRelation {
    pub fn new(
        child: Proposition,
        parent: Proposition,
        endorsements: Vec<Endorsement>,
    ) -> Result<Self, crate::error::ModelError> {
        if child == parent {
            return Err(crate::error::ModelError::SelfSupport(child.to_string()));
        }
        let strength = combined_strength(&endorsements)
            .ok_or_else(|| crate::error::ModelError::NoEndorsement(format!("supports({child}, {parent})")))?;
        Ok(Self {
            child,
            parent,
            strength,
            endorsements,
        })
    }

    pub fn statement(&self) -> Statement {
        Statement::supports(self.child.clone(), self.parent.clone())
    }
}

/// Result of [`KnowledgeBase::lookup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lookup<'a> {
    pub belief: &'a Belief,
    /// `true` when the stored belief has the queried polarity, `false` when
    /// it is about the negation.
    pub direct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartnerRecord {
    pub statement: Statement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_support: Option<Vec<Proposition>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    /// Own beliefs in insertion order; never holds both `s` and `¬s`.
    beliefs: Vec<Belief>,
    #[serde(default)]
    partner_model: Vec<PartnerRecord>,
    /// Topic area → the partner's expertise there.
    #[serde(default)]
    expertise: BTreeMap<String, Expertise>,
    /// Predicate → topic area.
    #[serde(default)]
    topics: BTreeMap<String, String>,
    #[serde(default)]
    mutual: Vec<Statement>,
    /// Statements the partner proposed and later conceded.
    #[serde(default)]
    conceded: BTreeSet<Statement>,
    #[serde(default)]
    next_id: u64,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn beliefs(&self) -> &[Belief] {
        &self.beliefs
    }

    pub fn mutual_beliefs(&self) -> &[Statement] {
        &self.mutual
    }

    pub fn partner_model(&self) -> &[PartnerRecord] {
        &self.partner_model
    }

    pub fn set_expertise(&mut self, topic: impl Into<String>, level: Expertise) {
        self.expertise.insert(topic.into(), level);
    }

    pub fn set_topic(&mut self, predicate: impl Into<String>, topic: impl Into<String>) {
        self.topics.insert(predicate.into(), topic.into());
    }

    pub fn topic_of(&self, statement: &Statement) -> Option<&str> {
        self.topics
            .get(&statement.topic_anchor().predicate)
            .map(String::as_str)
    }

    /// Partner expertise for the topic the statement belongs to.
    pub fn expertise_for(&self, statement: &Statement) -> Expertise {
        self.topic_of(statement)
            .and_then(|t| self.expertise.get(t).copied())
            .unwrap_or_default()
    }

    pub fn partner_endorsement(&self, statement: &Statement, form: SemanticForm) -> Endorsement {
        Endorsement::PartnerStatement {
            form,
            expertise: self.expertise_for(statement),
        }
    }

    fn fresh_id(&mut self) -> String {
        self.next_id += 1;
        format!("kb{}", self.next_id)
    }

    /// Insert or replace an own belief. A belief about the negation is
    /// dropped first so both polarities are never held at once.
    pub fn adopt(&mut self, mut belief: Belief) {
        let neg = belief.statement.negate();
        self.beliefs.retain(|b| b.statement != neg);
        if belief.id.is_empty() {
            belief.id = self.fresh_id();
        }
        match self.beliefs.iter_mut().find(|b| b.statement == belief.statement) {
            Some(existing) => {
                if belief.strength >= existing.strength {
                    belief.id = std::mem::take(&mut existing.id);
                    *existing = belief;
                }
            }
            None => self.beliefs.push(belief),
        }
    }

    pub fn lookup(&self, statement: &Statement) -> Option<Lookup<'_>> {
        if let Some(b) = self.beliefs.iter().find(|b| &b.statement == statement) {
            return Some(Lookup {
                belief: b,
                direct: true,
            });
        }
        let neg = statement.negate();
        self.beliefs.iter().find(|b| b.statement == neg).map(|b| Lookup {
            belief: b,
            direct: false,
        })
    }

    pub fn holds(&self, statement: &Statement) -> bool {
        self.lookup(statement).is_some_and(|l| l.direct)
    }

    /// Own evidential relations currently believed to hold, in insertion
    /// order together with their index among own beliefs.
    pub fn relations(&self) -> impl Iterator<Item = (usize, EvidenceRelation)> + '_ {
        self.beliefs.iter().enumerate().filter_map(|(i, b)| match &b.statement {
            Statement::Supports {
                child,
                parent,
                polarity: Polarity::Positive,
            } => Some((
                i,
                EvidenceRelation {
                    child: child.clone(),
                    parent: parent.clone(),
                    strength: b.strength,
                    endorsements: b.endorsements.clone(),
                },
            )),
            _ => None,
        })
    }

    pub fn knowref_support(&self, statement: &Statement) -> Option<&[Proposition]> {
        self.partner_model
            .iter()
            .find(|r| &r.statement == statement)
            .and_then(|r| r.known_support.as_deref())
    }

    /// Record that the partner holds `statement`, optionally because of
    /// `support`. Known justifications accumulate.
    pub fn record_partner(&mut self, statement: Statement, support: Option<Vec<Proposition>>) {
        match self.partner_model.iter_mut().find(|r| r.statement == statement) {
            Some(rec) => {
                if let Some(new) = support {
                    let known = rec.known_support.get_or_insert_with(Vec::new);
                    for p in new {
                        if !known.contains(&p) {
                            known.push(p);
                        }
                    }
                }
            }
            None => self.partner_model.push(PartnerRecord {
                statement,
                known_support: support,
            }),
        }
    }

    pub fn is_mutual(&self, statement: &Statement) -> bool {
        self.mutual.contains(statement)
    }

    /// Make `statement` mutually believed. A mutual belief in its negation
    /// is retracted, and the system's own attitude is set to warranted.
    /// Returns `false` if it was already mutual.
    pub fn establish_mutual(&mut self, statement: Statement) -> bool {
        let neg = statement.negate();
        self.mutual.retain(|s| s != &neg);
        self.conceded.remove(&statement);
        let fresh = !self.mutual.contains(&statement);
        if fresh {
            self.mutual.push(statement.clone());
        }
        let id = self
            .lookup(&statement)
            .filter(|l| l.direct)
            .map(|l| l.belief.id.clone())
            .unwrap_or_default();
        self.adopt(Belief::own(id, statement, Strength::Warranted));
        fresh
    }

    pub fn concede(&mut self, statement: Statement) {
        self.conceded.insert(statement);
    }

    pub fn is_conceded(&self, statement: &Statement) -> bool {
        self.conceded.contains(statement)
    }

    /// Every proposition mentioned anywhere in the base.
    pub fn propositions(&self) -> BTreeSet<Proposition> {
        let mut out = BTreeSet::new();
        for s in self.beliefs.iter().map(|b| &b.statement).chain(&self.mutual) {
            for p in s.propositions() {
                out.insert(p.atom());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Proposition {
        s.parse().unwrap()
    }

    #[test]
    fn negation_flips_polarity() {
        let t = p("Teaches(Smith,Logic)");
        assert_eq!(t.negate().to_string(), "¬Teaches(Smith,Logic)");
        assert_eq!(t.negate().negate(), t);
        let s = p("¬On-Sabbatical(Smith,next-year)");
        assert_eq!(negate(&s), p("On-Sabbatical(Smith,next-year)"));
    }

    #[test]
    fn parses_alternative_negation_markers() {
        assert_eq!(p("~A(x)"), p("¬A(x)"));
        assert_eq!(p("not A(x)"), p("!A(x)"));
        assert_eq!(p("¬¬A(x)"), p("A(x)"));
        assert!("A(x".parse::<Proposition>().is_err());
        assert!("A(x y)".parse::<Proposition>().is_err());
    }

    #[test]
    fn statement_parse_supports() {
        let s: Statement = "¬supports(On-Sabbatical(Smith,next-year), ¬Teaches(Smith,Logic))"
            .parse()
            .unwrap();
        match &s {
            Statement::Supports { child, parent, polarity } => {
                assert_eq!(*polarity, Polarity::Negative);
                assert_eq!(child, &p("On-Sabbatical(Smith,next-year)"));
                assert_eq!(parent, &p("¬Teaches(Smith,Logic)"));
            }
            _ => panic!("expected relation"),
        }
        assert_eq!(s.to_string().parse::<Statement>().unwrap(), s);
    }

    #[test]
    fn lookup_reports_direction() {
        let mut kb = KnowledgeBase::new();
        assert!(kb.lookup(&p("A(x)").into()).is_none());
        kb.adopt(Belief::own("b1", p("A(x)").into(), Strength::Strong));
        let direct = kb.lookup(&p("A(x)").into()).unwrap();
        assert!(direct.direct);
        let neg = kb.lookup(&p("¬A(x)").into()).unwrap();
        assert!(!neg.direct);
        assert_eq!(neg.belief.id, "b1");
    }

    #[test]
    fn adopt_replaces_contradiction() {
        let mut kb = KnowledgeBase::new();
        kb.adopt(Belief::own("b1", p("A(x)").into(), Strength::Strong));
        kb.adopt(Belief::own("b2", p("¬A(x)").into(), Strength::Weak));
        assert_eq!(kb.beliefs().len(), 1);
        assert!(kb.holds(&p("¬A(x)").into()));
    }

    #[test]
    fn mutual_retracts_negation() {
        let mut kb = KnowledgeBase::new();
        let a: Statement = p("A(x)").into();
        assert!(kb.establish_mutual(a.clone()));
        assert!(!kb.establish_mutual(a.clone()));
        kb.establish_mutual(a.negate());
        assert_eq!(kb.mutual_beliefs(), &[a.negate()]);
        assert_eq!(kb.lookup(&a).unwrap().belief.strength, Strength::Warranted);
        assert!(!kb.holds(&a));
    }

    #[test]
    fn knowref_accumulates() {
        let mut kb = KnowledgeBase::new();
        let a: Statement = p("A(x)").into();
        assert!(kb.knowref_support(&a).is_none());
        kb.record_partner(a.clone(), None);
        assert!(kb.knowref_support(&a).is_none());
        kb.record_partner(a.clone(), Some(vec![p("B(x)")]));
        kb.record_partner(a.clone(), Some(vec![p("B(x)"), p("C(x)")]));
        assert_eq!(kb.knowref_support(&a).unwrap(), &[p("B(x)"), p("C(x)")]);
    }

    #[test]
    fn endorsement_strengths() {
        let e = Endorsement::Derived {
            premises: vec![Strength::Warranted, Strength::Strong],
        };
        assert_eq!(e.strength(), Strength::Strong);
        assert_eq!(Endorsement::Stereotype.strength(), Strength::Strong);
        assert!(Belief::new("x", p("A(x)").into(), vec![]).is_err());
        assert!(EvidenceRelation::new(p("A(x)"), p("A(x)"), vec![Endorsement::Stereotype]).is_err());
    }
}
