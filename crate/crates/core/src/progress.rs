//! Progress checks: context well-formedness, reduction-rule shapes,
//! exhaustiveness of eliminators and handlers, and error contexts.

use std::collections::{BTreeMap, BTreeSet};

use crate::classify::{distinct_vars, e200, split_head, Classification};
use crate::diag::{Code, Diagnostic};
use crate::ir::roles::fmt_set;
use crate::ir::{
    ContextSummary, ErrCtxDecl, Formula, IndexSet, Name, RedBinding, RoleEnv, Rule, Signature,
    Term, TypRole, TypedLanguage,
};

/// Evaluation order of contextual arguments per operator: every argument
/// comes after the arguments it depends on.
pub type TopoOrder = BTreeMap<Name, Vec<u32>>;

/// Checks that context dependencies refer to contextual arguments and are
/// acyclic, and returns a topological order as a witness.
pub fn check_ctx_wellformed(sig: &Signature, ctx: &ContextSummary) -> (TopoOrder, Vec<Diagnostic>) {
    let mut order = TopoOrder::new();
    let mut diags = Vec::new();
    for op in ctx.ops() {
        let holes = ctx.holes(op);
        let arity = sig.exp_arity(op) as u32;
        let mut deps: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        for e in ctx.entries_of(op) {
            let mut ok = BTreeSet::new();
            for &d in &e.deps {
                if d == 0 || d > arity || !holes.contains(&d) {
                    diags.push(
                        Diagnostic::new(
                            Code::E203,
                            format!(
                                "context for argument {} of `{op}` needs argument {d} to be a value, but argument {d} is not contextual",
                                e.hole
                            ),
                        )
                        .related([op.to_string(), format!("arg {d}")]),
                    );
                } else {
                    ok.insert(d);
                }
            }
            deps.insert(e.hole, ok);
        }
        // Kahn's algorithm, smallest index first for a stable witness.
        let mut done: Vec<u32> = Vec::new();
        let mut left: BTreeSet<u32> = holes.clone();
        while let Some(&next) = left
            .iter()
            .find(|h| deps[h].iter().all(|d| done.contains(d)))
        {
            done.push(next);
            left.remove(&next);
        }
        if !left.is_empty() {
            diags.push(
                Diagnostic::new(
                    Code::E201,
                    format!(
                        "contexts of `{op}` depend on each other in a cycle through arguments {}",
                        fmt_set(&left)
                    ),
                )
                .related([op.to_string()]),
            );
        }
        order.insert(op.clone(), done);
    }
    (order, diags)
}

fn rdiag(code: Code, rule: &Rule, msg: String) -> Diagnostic {
    Diagnostic::new(code, msg).in_rule(&rule.name, rule.span)
}

/// Classifies a step rule as an elimination, handler or plain rule.
/// Returns the binding whenever the rule's shape was recognised, even if
/// some of its side conditions fail, so that a single defect is reported
/// once.
pub fn classify_reduction_rule(
    sig: &Signature,
    ctx: &ContextSummary,
    gamma_t: &BTreeMap<Name, TypRole>,
    rule: &Rule,
) -> (Option<RedBinding>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let Some(head) = rule.conclusion.subject().and_then(|s| split_head(sig, s)) else {
        diags.push(rdiag(
            Code::E206,
            rule,
            "the source of a step rule must be an operator application".into(),
        ));
        return (None, diags);
    };
    let op1 = head.op.clone();
    let role = match gamma_t.get(&op1) {
        Some(r) if !r.is_value_or_error() => r.clone(),
        _ => return (None, diags),
    };

    let mut shape_ok = true;
    for (i, a) in head.exp.iter().enumerate().skip(1) {
        if a.as_var().is_none() {
            shape_ok = false;
            diags.push(rdiag(
                Code::E204,
                rule,
                format!(
                    "argument {} of `{op1}` is matched against a pattern; only argument 1 may be",
                    i + 1
                ),
            ));
        }
    }
    let values = rule.value_vars();
    let names = rule.printer();
    let printer = crate::ir::Printer {
        var_name: &names,
        ..Default::default()
    };
    for p in &rule.premises {
        if !matches!(p, Formula::Value(Term::Var(_))) {
            shape_ok = false;
            diags.push(rdiag(
                Code::E206,
                rule,
                format!(
                    "premise `{}` is not a valuehood test on a variable",
                    p.print(&printer)
                ),
            ));
        }
    }
    let vset: IndexSet = head
        .exp
        .iter()
        .enumerate()
        .filter(|(_, a)| a.as_var().is_some_and(|v| values.contains(&v)))
        .map(|(i, _)| i as u32 + 1)
        .collect();

    let inner = head.exp.first().and_then(|a| split_head(sig, a));
    let mut all_args: Vec<&Term> = head.exp.iter().skip(1).copied().collect();
    if let Some(inner) = &inner {
        all_args.extend(inner.exp.iter().copied());
    } else if let Some(a1) = head.exp.first() {
        all_args.push(a1);
    }
    if shape_ok && distinct_vars(&all_args).is_none() {
        let nested = inner
            .as_ref()
            .is_some_and(|i| i.exp.iter().any(|a| a.as_var().is_none()));
        shape_ok = false;
        diags.push(rdiag(
            Code::E104,
            rule,
            if nested {
                format!("the pattern in argument 1 of `{op1}` is nested more than one constructor deep")
            } else {
                format!("variables in the source of this `{op1}` rule must be distinct")
            },
        ));
    }
    if !shape_ok {
        return (None, diags);
    }

    let check_ctx = |required: &IndexSet, diags: &mut Vec<Diagnostic>| {
        for &i in required {
            if !ctx.contains(&op1, i) {
                let why = if i == 1 && inner.is_some() {
                    "is matched against a pattern"
                } else {
                    "must be a value"
                };
                diags.push(e200(&op1, i, rule, why));
            }
        }
    };

    let binding = match (&role, &inner) {
        (TypRole::Elim(_) | TypRole::ErrHandler, Some(inner)) => {
            let op2 = inner.op.clone();
            let n = match (&role, gamma_t.get(&op2)) {
                (TypRole::Elim(c), Some(TypRole::Value { ty, n })) if ty == c => n.clone(),
                (TypRole::ErrHandler, Some(TypRole::Error(n))) => n.clone(),
                // Already reported where `op2` failed to classify.
                (_, None) => return (None, diags),
                (TypRole::Elim(c), _) => {
                    diags.push(rdiag(
                        Code::E206,
                        rule,
                        format!("`{op1}` eliminates values of `{c}`, but `{op2}` is not one"),
                    ));
                    return (None, diags);
                }
                _ => {
                    diags.push(rdiag(
                        Code::E206,
                        rule,
                        format!("`{op1}` handles the error, but matches `{op2}`"),
                    ));
                    return (None, diags);
                }
            };
            let fired: IndexSet = inner
                .exp
                .iter()
                .enumerate()
                .filter(|(_, a)| a.as_var().is_some_and(|v| values.contains(&v)))
                .map(|(j, _)| j as u32 + 1)
                .collect();
            if fired != n {
                diags.push(rdiag(
                    Code::E205,
                    rule,
                    format!(
                        "`{op2}` is a value when arguments {} are values, but this rule requires arguments {}",
                        fmt_set(&n),
                        fmt_set(&fired)
                    ),
                ));
            }
            let mut required = vset.clone();
            required.insert(1);
            check_ctx(&required, &mut diags);
            RedBinding::Eliminates {
                op: op1.clone(),
                target: op2,
                rule: rule.name.clone(),
            }
        }
        (TypRole::ErrHandler, None) => {
            if !vset.contains(&1) {
                diags.push(rdiag(
                    Code::E207,
                    rule,
                    format!("this rule for `{op1}` does not require argument 1 to be a value, so it also fires on errors"),
                ));
            }
            let mut required = vset.clone();
            required.insert(1);
            check_ctx(&required, &mut diags);
            RedBinding::Plain {
                op: op1.clone(),
                rule: rule.name.clone(),
            }
        }
        (TypRole::Elim(c), None) => {
            diags.push(rdiag(
                Code::E206,
                rule,
                format!("`{op1}` eliminates `{c}`, so its step rules must match a value in argument 1"),
            ));
            return (None, diags);
        }
        (TypRole::Derived, None) => {
            check_ctx(&vset, &mut diags);
            RedBinding::Plain {
                op: op1.clone(),
                rule: rule.name.clone(),
            }
        }
        (TypRole::Derived, Some(inner)) => {
            diags.push(rdiag(
                Code::E206,
                rule,
                format!("`{op1}` has no eliminated argument, but this rule matches `{}`", inner.op),
            ));
            return (None, diags);
        }
        (TypRole::Value { .. } | TypRole::Error(_), _) => unreachable!(),
    };
    (Some(binding), diags)
}

fn typing_span(lang: &TypedLanguage, op: &str) -> (String, crate::ir::Span) {
    lang.typing_rule(op)
        .map(|r| (r.name.clone(), r.span))
        .unwrap_or_default()
}

/// Every eliminator handles every value of its type, and the handler both
/// eliminates the error and has a rule for non-errors.
pub fn check_exhaustiveness(lang: &TypedLanguage, roles: &RoleEnv) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for (op1, role) in &roles.gamma_t {
        match role {
            TypRole::Elim(c) => {
                for (op2, _) in roles.values_of(c) {
                    if roles.eliminates(op1, op2).is_empty() {
                        let (r, span) = typing_span(lang, op1);
                        diags.push(
                            Diagnostic::new(
                                Code::E210,
                                format!("`{op1}` does not eliminate `{op2}`"),
                            )
                            .in_rule(&r, span)
                            .related([op1.to_string(), op2.to_string()]),
                        );
                    }
                }
            }
            TypRole::ErrHandler => {
                let (r, span) = typing_span(lang, op1);
                if let Some((err, _)) = roles.error_op() {
                    if roles.eliminates(op1, err).is_empty() {
                        diags.push(
                            Diagnostic::new(
                                Code::E211,
                                format!("`{op1}` does not eliminate the error `{err}`"),
                            )
                            .in_rule(&r, span),
                        );
                    }
                }
                if roles.plain(op1).is_empty() {
                    diags.push(
                        Diagnostic::new(
                            Code::E211,
                            format!("`{op1}` has no step rule for a value in argument 1"),
                        )
                        .in_rule(&r, span),
                    );
                }
            }
            _ => {}
        }
    }
    diags
}

/// The error contexts the language must have, given its roles.
pub fn expected_errctx(ctx: &ContextSummary, roles: &RoleEnv) -> Option<ContextSummary> {
    crate::syntax::computed_errctx(ctx, roles)
}

fn show_entries(entries: &[(Name, crate::ir::Entry)]) -> String {
    entries
        .iter()
        .map(|(op, e)| format!("{op}@{}{}", e.hole, if e.deps.is_empty() { String::new() } else { fmt_set(&e.deps) }))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Compares the declared error contexts with the expected ones. Returns
/// the error contexts to use for elaboration.
pub fn check_error_contexts(
    lang: &TypedLanguage,
    roles: &RoleEnv,
) -> (Option<ContextSummary>, Vec<Diagnostic>) {
    let expected = expected_errctx(&lang.ctx, roles);
    let mut diags = Vec::new();
    let declared = match &lang.errctx {
        ErrCtxDecl::Absent => return (expected, diags),
        ErrCtxDecl::None => None,
        ErrCtxDecl::Explicit(s) => Some(s.clone()),
    };
    match (&declared, &expected) {
        (None, None) => {}
        (None, Some(_)) => diags.push(Diagnostic::new(
            Code::E202,
            format!(
                "error contexts are declared `none`, but `{}` is an error",
                roles.error_op().map(|(o, _)| o.to_string()).unwrap_or_default()
            ),
        )),
        (Some(_), None) => diags.push(Diagnostic::new(
            Code::E202,
            "error contexts are declared, but the language has no error",
        )),
        (Some(d), Some(e)) => {
            let extra = d.difference(e);
            let missing = e.difference(d);
            if !extra.is_empty() || !missing.is_empty() {
                let mut msg = String::from("declared error contexts differ from the expected ones");
                if !extra.is_empty() {
                    msg.push_str(&format!("; unexpected: {}", show_entries(&extra)));
                }
                if !missing.is_empty() {
                    msg.push_str(&format!("; missing: {}", show_entries(&missing)));
                }
                diags.push(Diagnostic::new(Code::E202, msg));
            }
        }
    }
    (declared, diags)
}

/// Contextual arguments that nothing requires to be a value.
pub fn unused_contexts(lang: &TypedLanguage, roles: &RoleEnv) -> Vec<Diagnostic> {
    let sig = &lang.signature;
    let mut needed: BTreeMap<Name, IndexSet> = BTreeMap::new();
    for (op, r) in &roles.gamma_d {
        let (crate::ir::DefRole::Value(n) | crate::ir::DefRole::Error(n)) = r;
        needed.entry(op.clone()).or_default().extend(n);
    }
    for (op, r) in &roles.gamma_t {
        if matches!(r, TypRole::Elim(_) | TypRole::ErrHandler) {
            needed.entry(op.clone()).or_default().insert(1);
        }
    }
    for (op, e) in lang.ctx.all() {
        needed.entry(op).or_default().extend(e.deps);
    }
    for rule in lang.partition().step {
        let Some(head) = rule.conclusion.subject().and_then(|s| split_head(sig, s)) else {
            continue;
        };
        let values = rule.value_vars();
        let set = needed.entry(head.op.clone()).or_default();
        for (i, a) in head.exp.iter().enumerate() {
            if a.as_var().is_some_and(|v| values.contains(&v)) {
                set.insert(i as u32 + 1);
            }
        }
    }
    let mut diags = Vec::new();
    for (op, e) in lang.ctx.all() {
        if !needed.get(&op).is_some_and(|s| s.contains(&e.hole)) {
            diags.push(
                Diagnostic::new(
                    Code::W001,
                    format!(
                        "argument {} of `{op}` is contextual but no rule needs it to be a value",
                        e.hole
                    ),
                )
                .related([op.to_string()]),
            );
        }
    }
    diags
}

#[derive(Clone, Debug, Default)]
pub struct ProgressReport {
    pub roles: RoleEnv,
    pub topo: TopoOrder,
    pub errctx: Option<ContextSummary>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn check_progress(lang: &TypedLanguage, cls: &Classification) -> ProgressReport {
    let sig = &lang.signature;
    let (topo, mut diagnostics) = check_ctx_wellformed(sig, &lang.ctx);
    let mut gamma_r = Vec::new();
    for rule in lang.partition().step {
        if cls.value_steps.contains(&rule.name) {
            continue;
        }
        let (b, ds) = classify_reduction_rule(sig, &lang.ctx, &cls.gamma_t, &rule);
        gamma_r.extend(b);
        diagnostics.extend(ds);
    }
    let roles = RoleEnv {
        gamma_d: cls.gamma_d.clone(),
        gamma_t: cls.gamma_t.clone(),
        gamma_r,
    };
    diagnostics.extend(check_exhaustiveness(lang, &roles));
    let (errctx, ds) = check_error_contexts(lang, &roles);
    diagnostics.extend(ds);
    diagnostics.extend(unused_contexts(lang, &roles));
    ProgressReport {
        roles,
        topo,
        errctx,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::syntax::load;

    const LISTS: &str = r"
type int typ.
type list typ -> typ.
type zero exp.
type raise exp -> exp.
type try exp -> exp -> exp.
type nil typ -> exp.
type cons exp -> exp -> exp.
type head exp -> exp.
type app exp -> exp -> exp.
type arrow typ -> typ -> typ.
typeOf zero int.
typeOf (raise E) T :- typeOf E int.
typeOf (try E1 E2) T :- typeOf E1 T, typeOf E2 (arrow int T).
typeOf (nil T) (list T).
typeOf (cons E1 E2) (list T) :- typeOf E1 T, typeOf E2 (list T).
typeOf (head E) T :- typeOf E (list T).
typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.
value zero.
value (nil T).
value (cons V1 V2).
error (raise V).
step (head (cons V1 V2)) V1.
step (head (nil T)) (raise zero).
step (try V E) V.
step (try (raise V) E) (app E V).
step (app E1 E2) E1.
% context raise E.
% context try E e.
% context cons E e.
% context cons v E.
% context head E.
% context app E e.
";

    fn check(text: &str) -> ProgressReport {
        let lang = load("lists.mod", text).unwrap();
        let cls = classify(&lang);
        assert!(cls.diagnostics.is_empty(), "{:?}", cls.diagnostics);
        check_progress(&lang, &cls)
    }

    fn codes(r: &ProgressReport) -> Vec<Code> {
        r.diagnostics.iter().filter(|d| d.is_error()).map(|d| d.code).collect()
    }

    #[test]
    fn lists_pass() {
        let r = check(LISTS);
        assert!(codes(&r).is_empty(), "{:?}", r.diagnostics);
        assert_eq!(r.topo[&crate::ir::name("cons")], vec![1, 2]);
        let expected = expected_errctx(&load("l.mod", LISTS).unwrap().ctx, &r.roles).unwrap();
        assert!(!expected.contains("try", 1));
        assert!(expected.contains("cons", 2));
    }

    #[test]
    fn missing_nil_case() {
        let r = check(&LISTS.replace("step (head (nil T)) (raise zero).", ""));
        assert_eq!(codes(&r), vec![Code::E210]);
        assert!(r.diagnostics[0].message.contains("`head` does not eliminate `nil`"));
    }

    #[test]
    fn cyclic_contexts() {
        let r = check(&LISTS.replace("% context cons E e.", "% context cons E v."));
        assert_eq!(codes(&r), vec![Code::E201]);
    }

    #[test]
    fn missing_context_for_eliminated_argument() {
        let r = check(&LISTS.replace("% context head E.", ""));
        assert_eq!(codes(&r), vec![Code::E200, Code::E200]);
    }

    #[test]
    fn handler_without_value_rule() {
        let r = check(&LISTS.replace("step (try V E) V.", ""));
        assert_eq!(codes(&r), vec![Code::E211]);
    }

    #[test]
    fn unrestricted_handler_rule() {
        let r = check(&LISTS.replace("step (try V E) V.", "step (try E1 E2) E1."));
        assert_eq!(codes(&r), vec![Code::E207]);
    }

    #[test]
    fn pattern_in_second_argument() {
        let r = check(&format!("{LISTS}\nstep (app E1 (cons V1 V2)) E1.\n"));
        assert_eq!(codes(&r), vec![Code::E204]);
    }

    #[test]
    fn pattern_fires_on_non_values() {
        let r = check(&LISTS.replace("step (head (cons V1 V2)) V1.", "step (head (cons V1 E2)) V1."));
        assert_eq!(codes(&r), vec![Code::E205]);
    }

    #[test]
    fn explicit_error_contexts_must_match() {
        let mut text = LISTS.to_string();
        for d in ["raise E", "try E e", "cons E e", "cons v E", "head E", "app E e"] {
            text.push_str(&format!("% errorcontext {d}.\n"));
        }
        let r = check(&text);
        assert_eq!(codes(&r), vec![Code::E202]);
        assert!(r.diagnostics[0].message.contains("try@1"));
        let ok = text.replace("% errorcontext try E e.\n", "");
        assert!(codes(&check(&ok)).is_empty());
    }

    #[test]
    fn error_contexts_none_with_an_error() {
        let r = check(&format!("{LISTS}\n% errorcontext none.\n"));
        assert_eq!(codes(&r), vec![Code::E202]);
    }

    #[test]
    fn unneeded_context_warns() {
        let r = check(&LISTS.replace("% context app E e.", "% context app E e.\n% context app v E."));
        assert!(codes(&r).is_empty());
        let w: Vec<_> = r.diagnostics.iter().filter(|d| d.code == Code::W001).collect();
        assert_eq!(w.len(), 1);
        assert!(w[0].message.starts_with("argument 2 of `app`"));
    }
}
