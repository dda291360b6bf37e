use parley_core::belief::{Belief, KnowledgeBase, Proposition, SemanticForm, Statement, Strength};
use parley_core::error::StrategyError;
use parley_core::evaluation::{EvaluationAnnotation, Evaluator, TriState};
use parley_core::scenario::{load_scenario, run_script};
use parley_core::strategy::{
    instantiate_recipe, is_critical, select_strategy, StrategyChoice, StrategyFacts, StrategyKind, StrategyRegistry,
};
use parley_core::transcript::UserInput;
use parley_core::tree::{ProposedBeliefTree, TreePayload};

const COURSE: &[u8] = include_bytes!("../../../scenarios/course-advisement.scenario");

fn stmt(s: &str) -> Statement {
    s.parse().unwrap()
}

/// The opening proposal of the course scenario, evaluated against its KB.
fn teaches() -> (KnowledgeBase, ProposedBeliefTree, EvaluationAnnotation) {
    let file = load_scenario(COURSE).unwrap();
    let kb = file.knowledge_base().unwrap();
    let payload = file
        .script
        .as_ref()
        .unwrap()
        .prelude
        .iter()
        .find_map(|t| match &t.input {
            UserInput::Propose { tree } => Some(tree.clone()),
            UserInput::Respond { .. } => None,
        })
        .unwrap();
    let tree = ProposedBeliefTree::from_payload(&payload, &kb).unwrap();
    let ann = Evaluator::new(&kb).evaluate_tree(&tree).node("u7").unwrap().belief.clone();
    (kb, tree, ann)
}

/// The embedded Postpone-Sabbatical proposal from branch 8d, as the engine
/// evaluated it.
fn postpone() -> (KnowledgeBase, ProposedBeliefTree, EvaluationAnnotation) {
    let s = run_script(&load_scenario(COURSE).unwrap(), Some("8d")).unwrap();
    let record = s
        .model
        .trees
        .iter()
        .find(|r| r.tree.root().belief.statement == stmt("Postpone-Sabbatical(Smith,1996)"))
        .unwrap();
    let eval = record.evaluation.as_ref().unwrap();
    (s.kb.clone(), record.tree.clone(), eval.root().belief.clone())
}

#[test]
fn teaches_selects_invite_attack_with_the_sabbatical_item() {
    let (kb, _, ann) = teaches();
    assert_eq!(ann.status(), TriState::Unsure);
    let choice = select_strategy(&ann, &kb).unwrap();
    assert_eq!(choice.kind, StrategyKind::InviteAttack);
    let item = choice.counterevidence.unwrap();
    assert_eq!(Statement::Fact(item.relation.child.clone()), stmt("On-Sabbatical(Smith,next-year)"));
    assert!(is_critical(&item, &ann.statement, &ann));
}

#[test]
fn postpone_selects_ask_why_with_the_ibm_counter() {
    let (kb, _, ann) = postpone();
    let facts = StrategyFacts::gather(&ann, &kb);
    assert!(facts.critical.is_empty());
    assert!(!facts.knowref);
    let choice = select_strategy(&ann, &kb).unwrap();
    assert_eq!(choice.kind, StrategyKind::AskWhyWithCounter);
    let item = choice.counterevidence.unwrap();
    assert_eq!(Statement::Fact(item.relation.child.clone()), stmt("At-IBM(Smith,next-year)"));
    assert!(!is_critical(&item, &ann.statement, &ann));
}

#[test]
fn nothing_known_selects_plain_ask_why() {
    let kb = KnowledgeBase::new();
    let ann = Evaluator::new(&kb).evaluate_statement(&stmt("Cancelled(AI-course)"), None);
    let choice = select_strategy(&ann, &kb).unwrap();
    assert_eq!(choice, StrategyChoice {
        kind: StrategyKind::AskWhy,
        counterevidence: None
    });
}

#[test]
fn invite_attack_binds_the_tree_root_as_top() {
    let (kb, tree, ann) = teaches();
    let registry = StrategyRegistry::with_builtins();
    let choice = registry.select(&StrategyFacts::gather(&ann, &kb)).unwrap();
    let action = instantiate_recipe(&registry, &choice, &ann, &tree, 0, &kb, 7).unwrap();
    assert_eq!(action.id, 7);
    assert_eq!(action.bindings.top, stmt("Better-Than(Logic,Algorithms)"));
    assert_eq!(action.bindings.bel1, stmt("Teaches(Smith,Logic)"));
    assert_eq!(action.bindings.bel2, Some(stmt("On-Sabbatical(Smith,next-year)")));
    assert_eq!(action.precondition_status(&kb), vec![false, false, false]);
}

#[test]
fn ask_why_is_inapplicable_when_counterevidence_exists() {
    let p = Proposition::new("P", ["a"]);
    let q = Proposition::new("Q", ["a"]);
    let mut kb = KnowledgeBase::new();
    kb.adopt(Belief::own("q", Statement::Fact(q.clone()), Strength::Strong));
    kb.adopt(Belief::own("r", Statement::supports(q, p.negate()), Strength::Weak));
    let tree = ProposedBeliefTree::from_payload(&TreePayload::leaf("n", p, SemanticForm::Hedged), &kb).unwrap();
    let ann = Evaluator::new(&kb).evaluate_tree(&tree).root().belief.clone();
    let registry = StrategyRegistry::with_builtins();
    let forced = StrategyChoice {
        kind: StrategyKind::AskWhy,
        counterevidence: None,
    };
    let err = instantiate_recipe(&registry, &forced, &ann, &tree, 0, &kb, 0).unwrap_err();
    assert!(matches!(err, StrategyError::ApplicabilityViolation { .. }), "{err:?}");
}

#[test]
fn invite_attack_is_inapplicable_with_non_critical_counterevidence() {
    let (kb, tree, ann) = postpone();
    let registry = StrategyRegistry::with_builtins();
    let item = StrategyFacts::gather(&ann, &kb).non_critical[0].clone();
    let forced = StrategyChoice {
        kind: StrategyKind::InviteAttack,
        counterevidence: Some(item),
    };
    let err = instantiate_recipe(&registry, &forced, &ann, &tree, 0, &kb, 0).unwrap_err();
    assert!(matches!(err, StrategyError::ApplicabilityViolation { .. }), "{err:?}");
}
