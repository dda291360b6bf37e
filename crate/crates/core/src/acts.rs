//! Discourse acts and their templated surface realization.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::belief::{Polarity, Proposition, Statement, Strength};
use crate::error::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActKind {
    ExpressDoubt,
    AskWhy,
    InformBelief,
    ExpressUncertainty,
    AcceptAck,
    RejectInform,
    ProposeBelief,
}

impl ActKind {
    pub fn key(self) -> &'static str {
        match self {
            ActKind::ExpressDoubt => "express-doubt",
            ActKind::AskWhy => "ask-why",
            ActKind::InformBelief => "inform-belief",
            ActKind::ExpressUncertainty => "express-uncertainty",
            ActKind::AcceptAck => "accept-ack",
            ActKind::RejectInform => "reject-inform",
            ActKind::ProposeBelief => "propose-belief",
        }
    }
}

impl fmt::Display for ActKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    System,
    User,
}

impl Speaker {
    pub fn label(self) -> &'static str {
        match self {
            Speaker::System => "S",
            Speaker::User => "U",
        }
    }
}

/// One conveyed statement. Implicit parts are part of the act's content but
/// are left for the hearer to infer and never surface in text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActPart {
    pub statement: Statement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<Strength>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub implicit: bool,
}

impl ActPart {
    pub fn explicit(statement: Statement, strength: Option<Strength>) -> Self {
        Self {
            statement,
            strength,
            implicit: false,
        }
    }

    pub fn implicit(statement: Statement, strength: Option<Strength>) -> Self {
        Self {
            statement,
            strength,
            implicit: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ActStatus {
    #[default]
    Open,
    /// Everything it pursued became mutually believed.
    Achieved,
    /// The higher-level goal was met by other means first.
    Abandoned,
    /// Closed without pursuing any mutual belief (questions, replies).
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscourseAct {
    pub kind: ActKind,
    pub speaker: Speaker,
    pub parts: Vec<ActPart>,
    /// Action instance whose preconditions this act works toward.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serves: Option<usize>,
    /// Mutual beliefs the act tries to establish.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pursues: Vec<Statement>,
    #[serde(default)]
    pub status: ActStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
}

impl DiscourseAct {
    pub fn new(kind: ActKind, speaker: Speaker, parts: Vec<ActPart>) -> Self {
        Self {
            kind,
            speaker,
            parts,
            serves: None,
            pursues: Vec::new(),
            status: ActStatus::Done,
            surface: None,
        }
    }

    pub fn serving(mut self, action: usize, pursues: Vec<Statement>) -> Self {
        self.serves = Some(action);
        self.status = ActStatus::Open;
        self.pursues = pursues;
        self
    }

    /// Statements conveyed explicitly, in order.
    pub fn explicit(&self) -> impl Iterator<Item = &Statement> {
        self.parts.iter().filter(|p| !p.implicit).map(|p| &p.statement)
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.parts.iter().map(|p| &p.statement)
    }
}

/// Render a proposition as `subject predicate rest...`, e.g.
/// `Smith on-sabbatical next-year`.
pub fn render_proposition(p: &Proposition) -> String {
    let pred = p.predicate.to_lowercase();
    let pred = if p.polarity == Polarity::Negative {
        format!("not {pred}")
    } else {
        pred
    };
    match p.args.split_first() {
        None => pred,
        Some((subject, rest)) => {
            let mut words = vec![subject.clone(), pred];
            words.extend(rest.iter().cloned());
            words.join(" ")
        }
    }
}

pub fn render_statement(s: &Statement) -> String {
    match s {
        Statement::Fact(p) => render_proposition(p),
        Statement::Supports {
            child,
            parent,
            polarity,
        } => {
            let verb = match polarity {
                Polarity::Positive => "means",
                Polarity::Negative => "does not mean",
            };
            format!("{} {verb} {}", render_proposition(child), render_proposition(parent))
        }
    }
}

/// Template strings keyed by act kind, with `{p}` and `{q}` standing for the
/// first and second explicit statements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateTable(pub BTreeMap<String, String>);

impl Default for TemplateTable {
    fn default() -> Self {
        let entries = [
            ("express-doubt", "Isn't {p}?"),
            ("ask-why", "Why do you think {p}?"),
            ("inform-belief", "Isn't {p}?"),
            ("express-uncertainty", "I'm not sure that {p}."),
            ("accept-ack", "Okay, {p}."),
            ("reject-inform", "I don't think {p}."),
            ("reject-inform-justified", "I don't think {p}, since {q}."),
            ("propose-belief", "{p}."),
        ];
        Self(
            entries
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        )
    }
}

impl TemplateTable {
    pub fn with_override(mut self, key: impl Into<String>, template: impl Into<String>) -> Self {
        self.0.insert(key.into(), template.into());
        self
    }
}

pub fn realize(act: &DiscourseAct, templates: &TemplateTable) -> Result<String, EngineError> {
    let explicit: Vec<&Statement> = act.explicit().collect();
    let key = if act.kind == ActKind::RejectInform && explicit.len() > 1 {
        "reject-inform-justified"
    } else {
        act.kind.key()
    };
    let template = templates
        .0
        .get(key)
        .ok_or_else(|| EngineError::MissingTemplate(key.to_string()))?;
    let p = explicit.first().map(|s| render_statement(s)).unwrap_or_default();
    let q = explicit.get(1).map(|s| render_statement(s)).unwrap_or_default();
    Ok(template.replace("{p}", &p).replace("{q}", &q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Statement {
        x.parse().unwrap()
    }

    #[test]
    fn express_doubt_omits_implicit_relation() {
        let act = DiscourseAct::new(
            ActKind::ExpressDoubt,
            Speaker::System,
            vec![
                ActPart::explicit(s("On-Sabbatical(Smith,next-year)"), Some(Strength::Strong)),
                ActPart::implicit(
                    s("supports(On-Sabbatical(Smith,next-year), ¬Teaches(Smith,Logic))"),
                    Some(Strength::Warranted),
                ),
            ],
        );
        assert_eq!(
            realize(&act, &TemplateTable::default()).unwrap(),
            "Isn't Smith on-sabbatical next-year?"
        );
    }

    #[test]
    fn ask_why_and_accept() {
        let t = TemplateTable::default();
        let ask = DiscourseAct::new(ActKind::AskWhy, Speaker::System, vec![ActPart::explicit(
            s("Postpone-Sabbatical(Smith,1996)"),
            None,
        )]);
        assert_eq!(realize(&ask, &t).unwrap(), "Why do you think Smith postpone-sabbatical 1996?");
        let ack = DiscourseAct::new(ActKind::AcceptAck, Speaker::System, vec![ActPart::explicit(
            s("Teaches(Smith,Logic)"),
            None,
        )]);
        assert_eq!(realize(&ack, &t).unwrap(), "Okay, Smith teaches Logic.");
    }

    #[test]
    fn missing_template_is_an_error() {
        let mut t = TemplateTable::default();
        t.0.remove("ask-why");
        let ask = DiscourseAct::new(ActKind::AskWhy, Speaker::System, vec![ActPart::explicit(s("A(x)"), None)]);
        assert!(matches!(realize(&ask, &t), Err(EngineError::MissingTemplate(_))));
    }

    #[test]
    fn negative_rendering() {
        assert_eq!(render_statement(&s("¬Teaches(Smith,Logic)")), "Smith not teaches Logic");
        assert_eq!(render_statement(&s("Raining()")), "raining");
    }
}
