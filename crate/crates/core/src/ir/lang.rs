//! Typed languages: signature, rules, and context summaries.

use super::context::ContextSummary;
use super::kind::{Kind, Signature};
use super::rule::{Flavor, Formula, Pred, Rule, Span, VarInfo};
use super::term::{name, Term};

/// The error-context component as written in the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrCtxDecl {
    /// No `% errorcontext` directive: the checker computes the candidate.
    Absent,
    /// `% errorcontext none.`
    None,
    Explicit(ContextSummary),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedLanguage {
    pub name: String,
    pub signature: Signature,
    /// User rules in file order.
    pub rules: Vec<Rule>,
    pub ctx: ContextSummary,
    pub errctx: ErrCtxDecl,
    /// Generated reflexive-transitive closure rules for `stepstar`.
    pub closure: Vec<Rule>,
}

/// The four rule groups, by conclusion predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    pub typing: Vec<Rule>,
    pub step: Vec<Rule>,
    pub value: Vec<Rule>,
    pub error: Vec<Rule>,
}

/// Splits rules by conclusion predicate. `stepstar` conclusions are
/// generated, never user-written, and are not part of any group.
pub fn partition_rules(rules: &[Rule]) -> Partition {
    let mut p = Partition::default();
    for r in rules {
        match r.pred() {
            Pred::Typing => p.typing.push(r.clone()),
            Pred::Step => p.step.push(r.clone()),
            Pred::Value => p.value.push(r.clone()),
            Pred::Error => p.error.push(r.clone()),
            Pred::StepStar => {}
        }
    }
    p
}

/// `stepstar E E.` and `stepstar E1 E3 :- step E1 E2, stepstar E2 E3.`
pub fn stepstar_rules() -> Vec<Rule> {
    let var = |n: &str| VarInfo {
        name: name(n),
        flavor: Flavor::Expr,
        kind: Kind::EXP,
    };
    vec![
        Rule {
            name: "stepstar-refl".into(),
            premises: vec![],
            conclusion: Formula::StepStar(Term::Var(0), Term::Var(0)),
            vars: vec![var("E")],
            span: Span::default(),
        },
        Rule {
            name: "stepstar-trans".into(),
            premises: vec![
                Formula::Step(Term::Var(0), Term::Var(1)),
                Formula::StepStar(Term::Var(1), Term::Var(2)),
            ],
            conclusion: Formula::StepStar(Term::Var(0), Term::Var(2)),
            vars: vec![var("E1"), var("E2"), var("E3")],
            span: Span::default(),
        },
    ]
}

impl TypedLanguage {
    pub fn partition(&self) -> Partition {
        partition_rules(&self.rules)
    }

    pub fn typing_rule(&self, op: &str) -> Option<&Rule> {
        self.rules
            .iter()
            .find(|r| r.pred() == Pred::Typing && r.head_op().is_some_and(|h| &**h == op))
    }

    pub fn rule(&self, rule_name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == rule_name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rule_with(pred: Pred, i: usize) -> Rule {
        let args = match pred.arity() {
            1 => vec![Term::Var(0)],
            _ => vec![Term::Var(0), Term::Var(1)],
        };
        Rule {
            name: format!("r{i}"),
            premises: vec![],
            conclusion: Formula::atom(pred, args),
            vars: vec![],
            span: Span::default(),
        }
    }

    #[test]
    fn empty_rule_list_gives_empty_partition() {
        assert_eq!(partition_rules(&[]), Partition::default());
    }

    proptest! {
        #[test]
        fn partition_is_disjoint_and_covers_input(preds in proptest::collection::vec(0u8..4, 0..40)) {
            let rules: Vec<Rule> = preds.iter().enumerate().map(|(i, p)| {
                let pred = [Pred::Typing, Pred::Step, Pred::Value, Pred::Error][*p as usize];
                rule_with(pred, i)
            }).collect();
            let p = partition_rules(&rules);
            let mut names: Vec<String> = p.typing.iter().chain(&p.step).chain(&p.value).chain(&p.error)
                .map(|r| r.name.clone()).collect();
            prop_assert_eq!(names.len(), rules.len());
            names.sort();
            names.dedup();
            prop_assert_eq!(names.len(), rules.len());
            prop_assert!(p.typing.iter().all(|r| r.pred() == Pred::Typing));
            prop_assert!(p.step.iter().all(|r| r.pred() == Pred::Step));
            prop_assert!(p.value.iter().all(|r| r.pred() == Pred::Value));
            prop_assert!(p.error.iter().all(|r| r.pred() == Pred::Error));
        }
    }
}
