//! Role classification of definitions and typing rules.
//!
//! Definitions give `Γd` (which operators are values, which is the error).
//! Typing rules, read together with `Γd` and the step rules, give `Γt`.
//! Results never depend on the order of rules in the file.

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{Code, Diagnostic};
use crate::ir::{
    ContextSummary, DefRole, Formula, IndexSet, Name, Rule, Signature, Term, TypRole,
    TypedLanguage,
};

/// An operator application split into annotation and expression arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Head<'t> {
    pub op: &'t Name,
    pub annots: Vec<&'t Term>,
    /// Expression arguments; index 0 is argument 1.
    pub exp: Vec<&'t Term>,
}

pub fn split_head<'t>(sig: &Signature, t: &'t Term) -> Option<Head<'t>> {
    let Term::Const(op, args) = t else { return None };
    let positions = sig.exp_positions(op);
    let mut annots = Vec::new();
    let mut exp = Vec::new();
    for (i, a) in args.iter().enumerate() {
        if positions.contains(&i) {
            exp.push(a);
        } else {
            annots.push(a);
        }
    }
    Some(Head { op, annots, exp })
}

/// Expression arguments as variables, if they are pairwise distinct
/// variables.
pub fn distinct_vars(args: &[&Term]) -> Option<Vec<u32>> {
    let mut seen = BTreeSet::new();
    args.iter()
        .map(|a| a.as_var().filter(|v| seen.insert(*v)))
        .collect()
}

/// The meta-variable a typing premise is about: `X` in `typeOf X T`,
/// `pi x\ typeOf (R x) T`, or `pi x\ (typeOf x T1 => typeOf (R x) T2)`.
pub fn typed_var(p: &Formula) -> Option<u32> {
    match p.core() {
        Formula::Typing(s, _) => s.spine().0.as_var(),
        _ => None,
    }
}

/// Type assigned by a plain typing premise `typeOf X T`.
fn plain_premise_type(premises: &[Formula], v: u32) -> Option<&Term> {
    premises.iter().find_map(|p| match p {
        Formula::Typing(Term::Var(x), ty) if *x == v => Some(ty),
        _ => None,
    })
}

pub(crate) fn e200(op: &str, index: u32, rule: &Rule, why: &str) -> Diagnostic {
    Diagnostic::new(
        Code::E200,
        format!("argument {index} of `{op}` {why} but is not an evaluation context"),
    )
    .in_rule(&rule.name, rule.span)
    .related([op.to_string(), format!("arg {index}")])
}

#[derive(Clone, Debug, Default)]
pub struct DefClassification {
    pub gamma_d: BTreeMap<Name, DefRole>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Reads `value` and `error` definitions into `Γd`.
pub fn classify_definitions(
    sig: &Signature,
    ctx: &ContextSummary,
    defs: &[Rule],
) -> DefClassification {
    let mut out = DefClassification::default();
    let mut sources: BTreeMap<Name, (DefRole, String)> = BTreeMap::new();
    for rule in defs {
        let is_error = matches!(rule.conclusion, Formula::Error(_));
        let Some(subject) = rule.conclusion.subject() else { continue };
        let Some(head) = split_head(sig, subject) else {
            out.diagnostics.push(
                Diagnostic::new(
                    Code::E104,
                    "a definition must be about an operator applied to variables",
                )
                .in_rule(&rule.name, rule.span),
            );
            continue;
        };
        let Some(args) = distinct_vars(&head.exp) else {
            out.diagnostics.push(
                Diagnostic::new(
                    Code::E104,
                    format!("arguments of `{}` in a definition must be distinct variables", head.op),
                )
                .in_rule(&rule.name, rule.span),
            );
            continue;
        };
        let mut n = IndexSet::new();
        let mut restricted = false;
        for p in &rule.premises {
            match p {
                Formula::Value(Term::Var(x)) if args.contains(x) => {
                    let i = args.iter().position(|a| a == x).unwrap() as u32 + 1;
                    n.insert(i);
                }
                other => {
                    restricted = true;
                    let names = rule.printer();
                    let pr = crate::ir::Printer {
                        var_name: &names,
                        ..Default::default()
                    };
                    out.diagnostics.push(
                        Diagnostic::new(
                            Code::E120,
                            format!(
                                "definition of `{}` has premise `{}`; only `value` on arguments is allowed",
                                head.op,
                                other.print(&pr)
                            ),
                        )
                        .in_rule(&rule.name, rule.span),
                    );
                }
            }
        }
        if restricted {
            continue;
        }
        let why = if is_error {
            "must be a value for the error"
        } else {
            "must be a value for the value"
        };
        for &i in &n {
            if !ctx.contains(head.op, i) {
                out.diagnostics.push(e200(head.op, i, rule, why));
            }
        }
        let role = if is_error {
            DefRole::Error(n)
        } else {
            DefRole::Value(n)
        };
        match sources.get(head.op) {
            Some((prev, _)) if *prev == role => {}
            Some((prev, prev_rule)) => out.diagnostics.push(
                Diagnostic::new(
                    Code::E100,
                    format!(
                        "`{}` is defined as {role} here and as {prev} by {prev_rule}",
                        head.op
                    ),
                )
                .in_rule(&rule.name, rule.span),
            ),
            None => {
                sources.insert(head.op.clone(), (role, rule.name.clone()));
            }
        }
    }
    let errors: Vec<&Name> = sources
        .iter()
        .filter(|(_, (r, _))| matches!(r, DefRole::Error(_)))
        .map(|(op, _)| op)
        .collect();
    if errors.len() > 1 {
        let (_, second_rule) = &sources[errors[1]];
        let span = defs
            .iter()
            .find(|r| &r.name == second_rule)
            .map(|r| r.span)
            .unwrap_or_default();
        out.diagnostics.push(
            Diagnostic::new(
                Code::E101,
                format!(
                    "more than one error operator: {}",
                    errors.iter().map(|e| format!("`{e}`")).collect::<Vec<_>>().join(", ")
                ),
            )
            .in_rule(second_rule, span)
            .related(errors.iter()),
        );
    }
    out.gamma_d = sources.into_iter().map(|(k, (r, _))| (k, r)).collect();
    out
}

fn typ_diag(code: Code, rule: &Rule, msg: String) -> Diagnostic {
    Diagnostic::new(code, msg).in_rule(&rule.name, rule.span)
}

/// First expression argument of a step rule's source, with its head
/// operator when it is an operator application.
fn first_arg_op<'r>(sig: &Signature, step: &'r Rule) -> Option<&'r Name> {
    let src = step.conclusion.subject()?;
    let head = split_head(sig, src)?;
    head.exp.first()?.head()
}

/// Classifies one typing rule. `steps` are the step rules whose source is
/// headed by the same operator.
pub fn classify_typing_rule(
    sig: &Signature,
    gamma_d: &BTreeMap<Name, DefRole>,
    rule: &Rule,
    steps: &[&Rule],
) -> Result<(Name, TypRole), Vec<Diagnostic>> {
    let Formula::Typing(subject, assigned) = &rule.conclusion else {
        return Err(vec![typ_diag(Code::E102, rule, "not a typing rule".into())]);
    };
    let Some(head) = split_head(sig, subject) else {
        return Err(vec![typ_diag(
            Code::E102,
            rule,
            "the subject of a typing rule must be an operator application".into(),
        )]);
    };
    let op = head.op.clone();
    let Some(args) = distinct_vars(&head.exp) else {
        return Err(vec![typ_diag(
            Code::E104,
            rule,
            format!("arguments of `{op}` in its typing rule must be distinct variables"),
        )]);
    };

    let typed: BTreeSet<u32> = rule.premises.iter().filter_map(typed_var).collect();
    let untyped: Vec<Diagnostic> = args
        .iter()
        .enumerate()
        .filter(|(_, v)| !typed.contains(v))
        .map(|(i, v)| {
            typ_diag(
                Code::E111,
                rule,
                format!(
                    "argument {} (`{}`) of `{op}` has no typing premise",
                    i + 1,
                    rule.var_name(*v)
                ),
            )
        })
        .collect();
    if !untyped.is_empty() {
        return Err(untyped);
    }

    let role = match gamma_d.get(&op) {
        Some(DefRole::Value(n)) => match assigned {
            Term::Const(c, _) if sig.is_typ(c) => TypRole::Value {
                ty: c.clone(),
                n: n.clone(),
            },
            _ => {
                return Err(vec![typ_diag(
                    Code::E102,
                    rule,
                    format!("value `{op}` must be assigned a type built by a type constructor"),
                )])
            }
        },
        Some(DefRole::Error(n)) => {
            let Term::Var(t) = assigned else {
                return Err(vec![typ_diag(
                    Code::E212,
                    rule,
                    format!("error `{op}` must be assigned a type variable, so that it has every type"),
                )]);
            };
            let in_premise = rule.premises.iter().any(|p| match p.core() {
                Formula::Typing(_, ty) => ty.contains_var(*t),
                _ => p.vars().contains(t),
            });
            if in_premise {
                return Err(vec![typ_diag(
                    Code::E103,
                    rule,
                    format!(
                        "the type `{}` of error `{op}` occurs in a premise",
                        rule.var_name(*t)
                    ),
                )]);
            }
            TypRole::Error(n.clone())
        }
        None => {
            let first_ops: Vec<&Name> = steps.iter().filter_map(|s| first_arg_op(sig, s)).collect();
            let matches_value = first_ops
                .iter()
                .any(|o| matches!(gamma_d.get(*o), Some(DefRole::Value(_))));
            let matches_error = first_ops
                .iter()
                .any(|o| matches!(gamma_d.get(*o), Some(DefRole::Error(_))));
            if matches_value {
                let e1_ty = args.first().and_then(|v| plain_premise_type(&rule.premises, *v));
                match e1_ty {
                    Some(Term::Const(c, _)) if sig.is_typ(c) => TypRole::Elim(c.clone()),
                    _ => {
                        return Err(vec![typ_diag(
                            Code::E102,
                            rule,
                            format!(
                                "`{op}` matches values in its first argument, whose typing premise must assign a type built by a type constructor"
                            ),
                        )])
                    }
                }
            } else if matches_error {
                TypRole::ErrHandler
            } else if let Some(other) = first_ops.first() {
                return Err(vec![typ_diag(
                    Code::E104,
                    rule,
                    format!("step rules for `{op}` match `{other}`, which is neither a value nor the error"),
                )]);
            } else if !steps.is_empty() {
                TypRole::Derived
            } else {
                return Err(vec![typ_diag(
                    Code::E102,
                    rule,
                    format!("`{op}` is neither a value nor the error and has no step rules"),
                )]);
            }
        }
    };
    Ok((op, role))
}

#[derive(Clone, Debug, Default)]
pub struct Classification {
    pub gamma_d: BTreeMap<Name, DefRole>,
    pub gamma_t: BTreeMap<Name, TypRole>,
    /// Typing rule name per operator.
    pub typing_rule: BTreeMap<Name, String>,
    /// Step rules rejected because their source is a value or the error.
    pub value_steps: BTreeSet<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Runs definition and typing-rule classification over a whole language.
pub fn classify(lang: &TypedLanguage) -> Classification {
    let sig = &lang.signature;
    let part = lang.partition();
    let mut defs = part.value.clone();
    defs.extend(part.error.iter().cloned());
    let d = classify_definitions(sig, &lang.ctx, &defs);
    let mut out = Classification {
        gamma_d: d.gamma_d,
        diagnostics: d.diagnostics,
        ..Default::default()
    };

    let mut steps_of: BTreeMap<&Name, Vec<&Rule>> = BTreeMap::new();
    for s in &part.step {
        if let Some(op) = s.head_op() {
            steps_of.entry(op).or_default().push(s);
        }
    }
    for s in &part.step {
        if let Some(op) = s.head_op() {
            if let Some(r) = out.gamma_d.get(op) {
                let what = match r {
                    DefRole::Value(_) => "a value",
                    DefRole::Error(_) => "the error",
                };
                out.diagnostics.push(
                    Diagnostic::new(
                        Code::E110,
                        format!("`{op}` is {what} and must not have step rules"),
                    )
                    .in_rule(&s.name, s.span),
                );
                out.value_steps.insert(s.name.clone());
            }
        }
    }

    for rule in &part.typing {
        let op = rule.head_op().cloned();
        if let Some(op) = &op {
            if let Some(prev) = out.typing_rule.get(op) {
                out.diagnostics.push(
                    Diagnostic::new(
                        Code::E100,
                        format!("`{op}` already has the typing rule {prev}"),
                    )
                    .in_rule(&rule.name, rule.span),
                );
                continue;
            }
            out.typing_rule.insert(op.clone(), rule.name.clone());
        }
        let steps = op
            .as_ref()
            .and_then(|o| steps_of.get(o))
            .cloned()
            .unwrap_or_default();
        match classify_typing_rule(sig, &out.gamma_d, rule, &steps) {
            Ok((op, role)) => {
                out.gamma_t.insert(op, role);
            }
            Err(ds) => out.diagnostics.extend(ds),
        }
    }

    for (op, _) in sig.exp_constants() {
        if !out.typing_rule.contains_key(op) {
            out.diagnostics.push(Diagnostic::new(
                Code::E105,
                format!("expression operator `{op}` has no typing rule"),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::load;

    const STLC: &str = r"
type arrow typ -> typ -> typ.
type bool typ.
type abs typ -> (exp -> exp) -> exp.
type app exp -> exp -> exp.
type tt exp.
type ff exp.
type if exp -> exp -> exp -> exp.
typeOf (abs T1 R) (arrow T1 T2) :- pi x\ (typeOf x T1 => typeOf (R x) T2).
typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.
typeOf tt bool.
typeOf ff bool.
typeOf (if E1 E2 E3) T :- typeOf E1 bool, typeOf E2 T, typeOf E3 T.
value (abs T R).
value tt.
value ff.
step (app (abs T R) V) (R V).
step (if tt E1 E2) E1.
step (if ff E1 E2) E2.
% context app E e.
% context app v E.
% context if E e e.
";

    fn classify_text(text: &str) -> Classification {
        classify(&load("stlc.mod", text).unwrap())
    }

    fn codes(c: &Classification) -> Vec<Code> {
        c.diagnostics.iter().map(|d| d.code).collect()
    }

    #[test]
    fn stlc_roles() {
        let c = classify_text(STLC);
        assert!(c.diagnostics.is_empty(), "{:?}", c.diagnostics);
        assert_eq!(c.gamma_t[&crate::ir::name("app")], TypRole::Elim("arrow".into()));
        assert_eq!(c.gamma_t[&crate::ir::name("if")], TypRole::Elim("bool".into()));
        assert_eq!(
            c.gamma_t[&crate::ir::name("abs")],
            TypRole::Value {
                ty: "arrow".into(),
                n: IndexSet::new()
            }
        );
    }

    #[test]
    fn rule_order_does_not_matter() {
        let mut lines: Vec<&str> = STLC.lines().collect();
        lines.reverse();
        let c1 = classify_text(STLC);
        let c2 = classify_text(&lines.join("\n"));
        assert_eq!(c1.gamma_t, c2.gamma_t);
        assert_eq!(c1.gamma_d, c2.gamma_d);
    }

    #[test]
    fn step_rule_for_a_value_is_rejected() {
        let c = classify_text(&format!("{STLC}\nstep tt tt.\n"));
        assert_eq!(codes(&c), vec![Code::E110]);
    }

    #[test]
    fn missing_typing_premise() {
        let text = STLC.replace(
            "typeOf (if E1 E2 E3) T :- typeOf E1 bool, typeOf E2 T, typeOf E3 T.",
            "typeOf (if E1 E2 E3) T :- typeOf E1 bool, typeOf E2 T.",
        );
        assert_eq!(codes(&classify_text(&text)), vec![Code::E111]);
    }

    #[test]
    fn missing_typing_rule() {
        let text = STLC.replace("typeOf ff bool.", "");
        assert_eq!(codes(&classify_text(&text)), vec![Code::E105]);
    }

    const EXC: &str = r"
type int typ.
type arrow typ -> typ -> typ.
type zero exp.
type raise exp -> exp.
type try exp -> exp -> exp.
type app exp -> exp -> exp.
typeOf zero int.
typeOf (raise E) T :- typeOf E int.
typeOf (try E1 E2) T :- typeOf E1 T, typeOf E2 (arrow int T).
typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.
value zero.
error (raise V).
step (try V E) V.
step (try (raise V) E) (app E V).
step (app E1 E2) E1.
% context raise E.
% context try E e.
% context app E e.
";

    #[test]
    fn error_and_handler_roles() {
        let c = classify_text(EXC);
        assert!(c.diagnostics.is_empty(), "{:?}", c.diagnostics);
        let raise = crate::ir::name("raise");
        assert_eq!(c.gamma_t[&raise], TypRole::Error([1].into()));
        assert_eq!(c.gamma_t[&crate::ir::name("try")], TypRole::ErrHandler);
    }

    #[test]
    fn error_typed_at_a_fixed_type() {
        let text = EXC.replace("typeOf (raise E) T :- typeOf E int.", "typeOf (raise E) int :- typeOf E int.");
        assert_eq!(codes(&classify_text(&text)), vec![Code::E212]);
    }

    #[test]
    fn error_type_in_premise() {
        let text = EXC.replace("typeOf (raise E) T :- typeOf E int.", "typeOf (raise E) T :- typeOf E T.");
        assert_eq!(codes(&classify_text(&text)), vec![Code::E103]);
    }

    #[test]
    fn second_error_operator() {
        let text = format!("{EXC}\ntype fail exp.\ntypeOf fail T.\nerror fail.\n");
        assert_eq!(codes(&classify_text(&text)), vec![Code::E101]);
    }

    #[test]
    fn value_definition_outside_contexts() {
        let text = EXC.replace("% context raise E.", "");
        let c = classify_text(&text);
        assert_eq!(codes(&c), vec![Code::E200]);
        assert_eq!(c.diagnostics[0].related, vec!["raise", "arg 1"]);
    }

    #[test]
    fn definition_with_extra_premise() {
        let text = EXC.replace("error (raise V).", "error (raise V) :- typeOf V int.");
        assert!(codes(&classify_text(&text)).contains(&Code::E120));
    }
}
