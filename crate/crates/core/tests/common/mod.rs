//! Random knowledge bases and proposals, plus a scoring oracle written
//! directly from the rule: ranks Weak=1, Strong=2, Warranted=3, an item
//! counts at the weaker of its child and relation, and the verdict is
//! Accept at S−A ≥ 2, Reject at A−S ≥ 2, Unsure otherwise.

#![allow(dead_code)]

use parley_core::belief::{Belief, Expertise, KnowledgeBase, Proposition, SemanticForm, Statement, Strength};
use parley_core::evaluation::{EvaluationAnnotation, EvidenceItem, TriState};
use parley_core::tree::{NodePayload, ProposedBeliefTree, RelationPayload, TreePayload};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const STRENGTHS: [Strength; 3] = [Strength::Weak, Strength::Strong, Strength::Warranted];
pub const FORMS: [SemanticForm; 3] = [SemanticForm::DirectAssertion, SemanticForm::Hedged, SemanticForm::TagQuestion];
pub const LEVELS: [Expertise; 3] = [Expertise::Novice, Expertise::Apprentice, Expertise::Expert];

pub fn rank(s: Strength) -> i32 {
    match s {
        Strength::Weak => 1,
        Strength::Strong => 2,
        Strength::Warranted => 3,
    }
}

pub fn verdict(support: i32, attack: i32) -> TriState {
    if support - attack >= 2 {
        TriState::Accept
    } else if attack - support >= 2 {
        TriState::Reject
    } else {
        TriState::Unsure
    }
}

pub fn tri_order(t: TriState) -> i32 {
    match t {
        TriState::Reject => 0,
        TriState::Unsure => 1,
        TriState::Accept => 2,
    }
}

/// `Some(true)` when the item supports `target`, `Some(false)` when it
/// attacks it.
pub fn supports(item: &EvidenceItem, target: &Statement) -> Option<bool> {
    let p = target.as_fact()?;
    if &item.relation.parent == p {
        Some(true)
    } else if item.relation.parent == p.negate() {
        Some(false)
    } else {
        None
    }
}

pub fn item_weight(item: &EvidenceItem) -> i32 {
    rank(item.child.strength).min(rank(item.relation.strength))
}

/// Support and attack from the annotation's direct evidence alone.
pub fn base_scores(ann: &EvaluationAnnotation) -> (i32, i32) {
    let mut s = 0;
    let mut a = 0;
    for b in &ann.base {
        match b.side {
            parley_core::evaluation::Side::Support => s += rank(b.belief.strength),
            parley_core::evaluation::Side::Attack => a += rank(b.belief.strength),
        }
    }
    (s, a)
}

/// Score the annotation counting exactly the given items besides its base.
pub fn score<'a>(ann: &EvaluationAnnotation, items: impl IntoIterator<Item = &'a EvidenceItem>) -> (i32, i32) {
    let (mut s, mut a) = base_scores(ann);
    for it in items {
        match supports(it, &ann.statement) {
            Some(true) => s += item_weight(it),
            Some(false) => a += item_weight(it),
            None => {}
        }
    }
    (s, a)
}

pub fn oracle(ann: &EvaluationAnnotation, items: impl IntoIterator<Item = EvidenceItem>) -> TriState {
    let items: Vec<EvidenceItem> = items.into_iter().collect();
    let (s, a) = score(ann, &items);
    verdict(s, a)
}

pub fn fact(pred: &str) -> Proposition {
    Proposition::new(pred, ["x"])
}

pub struct Instance {
    pub kb: KnowledgeBase,
    pub payload: TreePayload,
    pub tree: ProposedBeliefTree,
    /// Every proposition the instance mentions, for users that answer back.
    pub pool: Vec<Proposition>,
}

/// A random proposal of 1..=max_nodes nodes over a random knowledge base.
pub fn random_instance(rng: &mut StdRng, max_nodes: usize) -> Instance {
    let n = rng.gen_range(1..=max_nodes);
    build(rng, n, false)
}

/// A root with exactly `children` direct children, so the root carries up
/// to that many uncertain items.
pub fn random_star(rng: &mut StdRng, children: usize) -> Instance {
    build(rng, children + 1, true)
}

fn build(rng: &mut StdRng, n: usize, star: bool) -> Instance {
    let mut kb = KnowledgeBase::new();
    for t in 0..3 {
        kb.set_expertise(format!("t{t}"), *LEVELS.choose(rng).unwrap());
    }
    let props: Vec<Proposition> = (0..n).map(|i| fact(&format!("P{i}"))).collect();
    for i in 0..n {
        kb.set_topic(format!("P{i}"), format!("t{}", i % 3));
    }
    let parents: Vec<usize> = (0..n).map(|i| if i == 0 || star { 0 } else { rng.gen_range(0..i) }).collect();
    let attacks: Vec<bool> = (0..n).map(|i| i > 0 && rng.gen_bool(0.3)).collect();
    let mut nodes: Vec<NodePayload> = (0..n)
        .map(|i| NodePayload {
            id: format!("n{i}"),
            statement: props[i].clone(),
            form: *FORMS.choose(rng).unwrap(),
            relation: (i > 0).then(|| RelationPayload {
                form: rng.gen_bool(0.3).then(|| *FORMS.choose(rng).unwrap()),
                attacks: attacks[i],
            }),
            children: Vec::new(),
        })
        .collect();
    for i in 1..n {
        nodes[parents[i]].children.push(format!("n{i}"));
    }

    let mut next = 0;
    let mut own = |kb: &mut KnowledgeBase, statement: Statement, strength: Strength| {
        next += 1;
        kb.adopt(Belief::own(format!("b{next}"), statement, strength));
    };
    for (i, p) in props.iter().enumerate() {
        if rng.gen_bool(0.4) {
            let s = if rng.gen_bool(0.5) { p.clone() } else { p.negate() };
            own(&mut kb, Statement::Fact(s), *STRENGTHS.choose(rng).unwrap());
        }
        if i > 0 && rng.gen_bool(0.25) {
            let parent = if attacks[i] { props[parents[i]].negate() } else { props[parents[i]].clone() };
            let rel = Statement::supports(p.clone(), parent);
            let rel = if rng.gen_bool(0.5) { rel } else { rel.negate() };
            own(&mut kb, rel, *STRENGTHS.choose(rng).unwrap());
        }
    }
    let extra = rng.gen_range(0..=3);
    let mut pool = props.clone();
    for j in 0..extra {
        let q = fact(&format!("Q{j}"));
        kb.set_topic(format!("Q{j}"), format!("t{}", j % 3));
        let held = if rng.gen_bool(0.85) { q.clone() } else { q.negate() };
        own(&mut kb, Statement::Fact(held), *STRENGTHS.choose(rng).unwrap());
        let target = &props[rng.gen_range(0..n)];
        let parent = if rng.gen_bool(0.6) { target.negate() } else { target.clone() };
        own(&mut kb, Statement::supports(q.clone(), parent), *STRENGTHS.choose(rng).unwrap());
        pool.push(q);
    }
    for k in 0..2 {
        let r = fact(&format!("R{k}"));
        kb.set_topic(format!("R{k}"), format!("t{k}"));
        pool.push(r);
    }
    let payload = TreePayload {
        root: "n0".into(),
        nodes,
    };
    let tree = ProposedBeliefTree::from_payload(&payload, &kb).expect("generated trees are well formed");
    Instance { kb, payload, tree, pool }
}
