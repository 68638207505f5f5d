//! Translation of context summaries into step rules.

use crate::classify::classify;
use crate::ir::lang::stepstar_rules;
use crate::ir::{
    name, ContextSummary, ErrCtxDecl, Flavor, Formula, Kind, Rule, RoleEnv, Signature, Span, Term,
    TypedLanguage, VarInfo,
};
use crate::progress::{check_ctx_wellformed, expected_errctx, TopoOrder};

/// A language as an executable logic program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutableRuleSet {
    pub name: String,
    pub signature: Signature,
    /// User step rules, in file order.
    pub step: Vec<Rule>,
    /// One rule per evaluation-context entry.
    pub ctx: Vec<Rule>,
    /// One rule per error-context entry.
    pub errctx: Vec<Rule>,
    pub closure: Vec<Rule>,
    pub typing: Vec<Rule>,
    /// `value` and `error` definitions.
    pub defs: Vec<Rule>,
}

impl ExecutableRuleSet {
    /// Every rule, step rules first.
    pub fn all(&self) -> Vec<Rule> {
        let mut v = self.step.clone();
        v.extend(self.ctx.iter().cloned());
        v.extend(self.errctx.iter().cloned());
        v.extend(self.closure.iter().cloned());
        v.extend(self.defs.iter().cloned());
        v.extend(self.typing.iter().cloned());
        v
    }

    pub fn rule(&self, rule_name: &str) -> Option<&Rule> {
        [&self.step, &self.ctx, &self.errctx, &self.closure, &self.defs, &self.typing]
            .into_iter()
            .flatten()
            .find(|r| r.name == rule_name)
    }
}

/// Variables `X1..Xn` over the arguments of `op`, plus one extra.
fn arg_vars(sig: &Signature, op: &str) -> Vec<VarInfo> {
    let kind = sig.kind(op).cloned().unwrap_or(Kind::EXP);
    let mut vars: Vec<VarInfo> = kind
        .args()
        .iter()
        .enumerate()
        .map(|(i, k)| VarInfo {
            name: name(&format!("X{}", i + 1)),
            flavor: Flavor::Expr,
            kind: (*k).clone(),
        })
        .collect();
    vars.push(VarInfo {
        name: name("X'"),
        flavor: Flavor::Expr,
        kind: Kind::EXP,
    });
    vars
}

/// Position among all arguments of the expression argument `hole`.
fn position(sig: &Signature, op: &str, hole: u32) -> usize {
    sig.exp_positions(op)[hole as usize - 1]
}

fn app(op: &str, n: usize, replace: Option<(usize, u32)>) -> Term {
    Term::constant(
        op,
        (0..n)
            .map(|i| match replace {
                Some((p, v)) if p == i => Term::Var(v),
                _ => Term::Var(i as u32),
            })
            .collect(),
    )
}

fn value_premises(sig: &Signature, op: &str, deps: &std::collections::BTreeSet<u32>) -> Vec<Formula> {
    deps.iter()
        .map(|d| Formula::Value(Term::Var(position(sig, op, *d) as u32)))
        .collect()
}

/// `step (op .. Xi ..) (op .. X' ..) :- value Xj (j in deps), step Xi X'.`
pub fn ctx_rule(sig: &Signature, op: &str, hole: u32, deps: &std::collections::BTreeSet<u32>) -> Rule {
    let vars = arg_vars(sig, op);
    let n = vars.len() - 1;
    let p = position(sig, op, hole);
    let mut premises = value_premises(sig, op, deps);
    premises.push(Formula::Step(Term::Var(p as u32), Term::Var(n as u32)));
    Rule {
        name: format!("ctx-{op}-{hole}"),
        premises,
        conclusion: Formula::Step(app(op, n, None), app(op, n, Some((p, n as u32)))),
        vars,
        span: Span::default(),
    }
}

/// `step (op .. Xi ..) Xi :- value Xj (j in deps), error Xi.`
pub fn errctx_rule(sig: &Signature, op: &str, hole: u32, deps: &std::collections::BTreeSet<u32>) -> Rule {
    let mut vars = arg_vars(sig, op);
    vars.pop();
    let n = vars.len();
    let p = position(sig, op, hole);
    let mut premises = value_premises(sig, op, deps);
    premises.push(Formula::Error(Term::Var(p as u32)));
    Rule {
        name: format!("errctx-{op}-{hole}"),
        premises,
        conclusion: Formula::Step(app(op, n, None), Term::Var(p as u32)),
        vars,
        span: Span::default(),
    }
}

/// Holes of each operator in dependency order; holes caught in a cycle
/// follow in ascending order so that broken languages still elaborate.
fn hole_order(sig: &Signature, ctx: &ContextSummary) -> TopoOrder {
    let (mut topo, _) = check_ctx_wellformed(sig, ctx);
    for (op, order) in topo.iter_mut() {
        for h in ctx.holes(op) {
            if !order.contains(&h) {
                order.push(h);
            }
        }
    }
    topo
}

/// Error contexts as declared, or the computed candidate when none are
/// declared.
pub fn effective_errctx(lang: &TypedLanguage, roles: &RoleEnv) -> Option<ContextSummary> {
    match &lang.errctx {
        ErrCtxDecl::Absent => expected_errctx(&lang.ctx, roles),
        ErrCtxDecl::None => None,
        ErrCtxDecl::Explicit(s) => Some(s.clone()),
    }
}

pub fn elaborate_with(lang: &TypedLanguage, errctx: Option<&ContextSummary>) -> ExecutableRuleSet {
    let sig = &lang.signature;
    let part = lang.partition();
    let order = hole_order(sig, &lang.ctx);
    let mut ctx = Vec::new();
    for (op, holes) in &order {
        for &h in holes {
            if let Some(deps) = lang.ctx.deps(op, h) {
                ctx.push(ctx_rule(sig, op, h, deps));
            }
        }
    }
    let mut err = Vec::new();
    if let Some(e) = errctx {
        let order = hole_order(sig, e);
        for (op, holes) in &order {
            for &h in holes {
                if let Some(deps) = e.deps(op, h) {
                    err.push(errctx_rule(sig, op, h, deps));
                }
            }
        }
    }
    let mut defs = part.value;
    defs.extend(part.error);
    ExecutableRuleSet {
        name: lang.name.clone(),
        signature: sig.clone(),
        step: part.step,
        ctx,
        errctx: err,
        closure: if lang.closure.is_empty() {
            stepstar_rules()
        } else {
            lang.closure.clone()
        },
        typing: part.typing,
        defs,
    }
}

/// Elaborates a language that need not pass the checker. Roles needed for
/// the computed error contexts come from a best-effort classification.
pub fn elaborate(lang: &TypedLanguage) -> ExecutableRuleSet {
    let cls = classify(lang);
    let roles = RoleEnv {
        gamma_d: cls.gamma_d,
        gamma_t: cls.gamma_t,
        gamma_r: Vec::new(),
    };
    elaborate_with(lang, effective_errctx(lang, &roles).as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::load;

    const LISTS: &str = r"
type int typ.
type list typ -> typ.
type zero exp.
type raise exp -> exp.
type nil exp.
type cons exp -> exp -> exp.
type head exp -> exp.
typeOf zero int.
typeOf (raise E) T :- typeOf E int.
typeOf nil (list T).
typeOf (cons E1 E2) (list T) :- typeOf E1 T, typeOf E2 (list T).
typeOf (head E) T :- typeOf E (list T).
value zero.
value nil.
value (cons V1 V2).
error (raise V).
step (head (cons V1 V2)) V1.
step (head nil) (raise zero).
% context raise E.
% context cons v E.
% context cons E e.
% context head E.
";

    #[test]
    fn cons_contexts_in_dependency_order() {
        let rs = elaborate(&load("lists.mod", LISTS).unwrap());
        let cons: Vec<String> = rs
            .ctx
            .iter()
            .filter(|r| r.name.starts_with("ctx-cons"))
            .map(|r| r.to_clause())
            .collect();
        assert_eq!(
            cons,
            vec![
                "step (cons X1 X2) (cons X' X2) :- step X1 X'.",
                "step (cons X1 X2) (cons X1 X') :- value X1, step X2 X'.",
            ]
        );
    }

    #[test]
    fn error_context_rule_for_head() {
        let rs = elaborate(&load("lists.mod", LISTS).unwrap());
        let head = rs.rule("errctx-head-1").unwrap();
        assert_eq!(head.to_clause(), "step (head X1) X1 :- error X1.");
        assert_eq!(rs.errctx.len(), 4);
        assert_eq!(rs.ctx.len(), 4);
    }

    #[test]
    fn empty_ctx_gives_only_user_rules() {
        let text = LISTS
            .lines()
            .filter(|l| !l.starts_with('%'))
            .collect::<Vec<_>>()
            .join("\n");
        let rs = elaborate(&load("lists.mod", &text).unwrap());
        assert!(rs.ctx.is_empty() && rs.errctx.is_empty());
        assert_eq!(rs.step.len(), 2);
        assert_eq!(rs.closure.len(), 2);
    }

    #[test]
    fn elaboration_is_deterministic() {
        let lang = load("lists.mod", LISTS).unwrap();
        assert_eq!(elaborate(&lang), elaborate(&lang));
    }
}
