//! Certificates: theorem statements and proof outlines for a checked
//! language, as plain text with stable section markers.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::diag::{Code, Diagnostic};
use crate::driver::{Analysis, Verdict};
use crate::ir::roles::fmt_set;
use crate::ir::{ContextSummary, Formula, IndexSet, Name, RoleEnv, Signature, TypRole, TypedLanguage};
use crate::oracle::ExecutableRuleSet;
use crate::progress::TopoOrder;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForms {
    pub ty: Name,
    /// Value constructors with the arguments that must be values.
    pub forms: Vec<(Name, IndexSet)>,
}

/// The values of type constructor `c`.
pub fn canonical_forms_entry(c: &Name, roles: &RoleEnv) -> CanonicalForms {
    CanonicalForms {
        ty: c.clone(),
        forms: roles
            .values_of(c)
            .into_iter()
            .map(|(op, n)| (op.clone(), n.clone()))
            .collect(),
    }
}

/// W005 for every type constructor without values.
pub fn uninhabited(sig: &Signature, roles: &RoleEnv) -> Vec<Diagnostic> {
    sig.typ_constants()
        .into_iter()
        .filter(|(c, _)| roles.values_of(c).is_empty())
        .map(|(c, _)| {
            Diagnostic::new(Code::W005, format!("type constructor `{c}` has no values"))
                .related([c.to_string()])
        })
        .collect()
}

/// One node of a progress case analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    /// Case analysis on the progress of argument `arg`.
    Case {
        arg: u32,
        step: Vec<String>,
        /// `None` when the language has no error.
        err: Option<Vec<String>>,
        value: Box<Node>,
    },
    /// All contextual arguments are values.
    Leaf { reason: String, cases: Vec<(String, Vec<String>)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressOutline {
    pub op: Name,
    pub role: TypRole,
    pub order: Vec<u32>,
    pub tree: Node,
}

fn def_rules(lang: &TypedLanguage, op: &str) -> Vec<String> {
    lang.rules
        .iter()
        .filter(|r| matches!(r.conclusion, Formula::Value(_) | Formula::Error(_)))
        .filter(|r| r.head_op().is_some_and(|h| &**h == op))
        .map(|r| r.name.clone())
        .collect()
}

fn strings(v: Vec<&str>) -> Vec<String> {
    v.into_iter().map(String::from).collect()
}

/// Case analysis over the contextual arguments of `op` in dependency order.
pub fn progress_lemma_outline(
    lang: &TypedLanguage,
    op: &Name,
    roles: &RoleEnv,
    topo: &TopoOrder,
    errctx: Option<&ContextSummary>,
) -> ProgressOutline {
    let role = roles.gamma_t[op].clone();
    let order = topo.get(op).cloned().unwrap_or_default();
    let leaf = match &role {
        TypRole::Value { .. } => Node::Leaf {
            reason: format!("`{op}` is a value"),
            cases: vec![(String::new(), def_rules(lang, op))],
        },
        TypRole::Error(_) => Node::Leaf {
            reason: format!("`{op}` is an error"),
            cases: vec![(String::new(), def_rules(lang, op))],
        },
        TypRole::Elim(c) => Node::Leaf {
            reason: format!("by canonical forms for `{c}`, argument 1 is built by one of"),
            cases: roles
                .values_of(c)
                .into_iter()
                .map(|(v, _)| (v.to_string(), strings(roles.eliminates(op, v))))
                .collect(),
        },
        TypRole::Derived => Node::Leaf {
            reason: format!("`{op}` steps by its own rule"),
            cases: vec![(String::new(), strings(roles.plain(op)))],
        },
        TypRole::ErrHandler => Node::Leaf {
            reason: "argument 1 is a value, so the handler steps".into(),
            cases: vec![(String::new(), strings(roles.plain(op)))],
        },
    };
    let error_op = roles.error_op().map(|(e, _)| e.clone());
    let tree = order.iter().rev().fold(leaf, |value, &i| {
        let err = error_op.as_ref().map(|e| {
            if errctx.is_some_and(|x| x.contains(op, i)) {
                vec![format!("errctx-{op}-{i}")]
            } else if i == 1 && matches!(role, TypRole::ErrHandler) {
                strings(roles.eliminates(op, e))
            } else {
                Vec::new()
            }
        });
        Node::Case {
            arg: i,
            step: vec![format!("ctx-{op}-{i}")],
            err,
            value: Box::new(value),
        }
    });
    ProgressOutline {
        op: op.clone(),
        role,
        order,
        tree,
    }
}

/// Problems found when checking outlines against the elaborated rules and
/// the dependency graph. Empty means the certificate is consistent.
pub fn cross_check(
    outlines: &[ProgressOutline],
    rules: &ExecutableRuleSet,
    ctx: &ContextSummary,
) -> Vec<String> {
    let mut problems = Vec::new();
    let cite = |problems: &mut Vec<String>, op: &Name, what: &str, names: &[String]| {
        if names.is_empty() {
            problems.push(format!("{op}: {what} cites no rule"));
        }
        for n in names {
            if rules.rule(n).is_none() {
                problems.push(format!("{op}: {what} cites missing rule {n}"));
            }
        }
    };
    for o in outlines {
        let mut node = &o.tree;
        loop {
            match node {
                Node::Case {
                    arg,
                    step,
                    err,
                    value,
                } => {
                    cite(&mut problems, &o.op, &format!("step case of argument {arg}"), step);
                    if let Some(e) = err {
                        cite(&mut problems, &o.op, &format!("error case of argument {arg}"), e);
                    }
                    node = value;
                }
                Node::Leaf { cases, .. } => {
                    for (c, names) in cases {
                        cite(&mut problems, &o.op, &format!("value case {c}"), names);
                    }
                    break;
                }
            }
        }
        let mut seen = BTreeSet::new();
        for &i in &o.order {
            for d in ctx.deps(&o.op, i).into_iter().flatten() {
                if !seen.contains(d) {
                    problems.push(format!(
                        "{}: argument {i} comes before its dependency {d}",
                        o.op
                    ));
                }
            }
            seen.insert(i);
        }
        if seen != ctx.holes(&o.op) {
            problems.push(format!("{}: order does not cover the contextual arguments", o.op));
        }
    }
    problems
}

fn arg_name(i: u32) -> String {
    format!("E{i}")
}

fn render_node(out: &mut String, node: &Node, indent: usize) {
    let pad = "  ".repeat(indent);
    match node {
        Node::Case {
            arg,
            step,
            err,
            value,
        } => {
            let e = arg_name(*arg);
            let _ = writeln!(out, "{pad}case {e} steps: by {}", step.join(", "));
            if let Some(err) = err {
                let _ = writeln!(out, "{pad}case {e} is an error: by {}", err.join(", "));
            }
            let _ = writeln!(out, "{pad}case {e} is a value:");
            render_node(out, value, indent + 1);
        }
        Node::Leaf { reason, cases } => {
            if cases.len() == 1 && cases[0].0.is_empty() {
                let _ = writeln!(out, "{pad}{reason}: by {}", cases[0].1.join(", "));
            } else {
                let names: Vec<&str> = cases.iter().map(|(c, _)| c.as_str()).collect();
                let _ = writeln!(out, "{pad}{reason}: {}", names.join(", "));
                for (c, rules) in cases {
                    let _ = writeln!(out, "{pad}  case {c}: by {}", rules.join(", "));
                }
            }
        }
    }
}

fn op_pattern(sig: &Signature, op: &str) -> String {
    let n = sig.exp_arity(op) as u32;
    let mut s = op.to_string();
    for i in 1..=n {
        s.push(' ');
        s.push_str(&arg_name(i));
    }
    if n > 0 {
        format!("({s})")
    } else {
        s
    }
}

/// Renders the certificate document.
pub fn emit_certificate(a: &Analysis) -> String {
    let mut out = String::new();
    let name = &a.report.language;
    let _ = writeln!(out, "== VERDICT ==");
    let _ = writeln!(out, "language: {name}");
    let _ = writeln!(out, "verdict: {}", a.report.verdict);
    let Some(lang) = &a.lang else {
        render_diagnostics(&mut out, a);
        return out;
    };
    if a.report.verdict != Verdict::Certified {
        render_diagnostics(&mut out, a);
        return out;
    }
    let has_error = a.roles.error_op().is_some();
    let outcome = if has_error {
        "value e', error e', or step e' e'' for some e''"
    } else {
        "value e', or step e' e'' for some e''"
    };
    let _ = writeln!(out);
    let _ = writeln!(out, "== THEOREM ==");
    let _ = writeln!(
        out,
        "Progress ({name}). For all e, T: if typeOf e T then {}.",
        outcome.replace("e'", "e").replace("ee", "e'")
    );
    let _ = writeln!(
        out,
        "Preservation ({name}). For all e, e', T: if typeOf e T and step e e' then typeOf e' T."
    );
    let _ = writeln!(
        out,
        "Soundness ({name}). For all e, e', T: if typeOf e T and stepstar e e' then {outcome}."
    );

    let sig = &lang.signature;
    for (c, k) in sig.typ_constants() {
        let cf = canonical_forms_entry(c, &a.roles);
        let ty = if k.args().is_empty() { c.to_string() } else { format!("({c} ..)") };
        let _ = writeln!(out);
        let _ = writeln!(out, "== LEMMA canonical-forms {c} ==");
        let _ = writeln!(out, "If typeOf e {ty} and value e, then e is one of:");
        if cf.forms.is_empty() {
            let _ = writeln!(out, "  (none)");
        }
        for (op, n) in &cf.forms {
            let _ = writeln!(out, "  {}  with values at {}", op_pattern(sig, op), fmt_set(n));
        }
    }

    for o in &a.outlines {
        let _ = writeln!(out);
        let _ = writeln!(out, "== LEMMA progress {} ==", o.op);
        let pat = op_pattern(sig, &o.op);
        let _ = writeln!(out, "role: {}", o.role);
        let _ = writeln!(
            out,
            "If typeOf {pat} T then {pat} is a value{}, or steps.",
            if has_error { ", an error" } else { "" }
        );
        let order: Vec<String> = o.order.iter().map(|i| arg_name(*i)).collect();
        let _ = writeln!(
            out,
            "order: {}",
            if order.is_empty() { "(no contextual arguments)".to_string() } else { order.join(", ") }
        );
        render_node(&mut out, &o.tree, 0);
    }

    let _ = writeln!(out);
    let _ = writeln!(out, "== PRESERVATION ==");
    for c in &a.preservation {
        let _ = writeln!(out, "rule {}", c.rule);
        let _ = writeln!(out, "  typing rules: {}", c.typing_rules.join(", "));
        let env = if c.environment.is_empty() {
            "(empty)".to_string()
        } else {
            c.environment.join(", ")
        };
        let _ = writeln!(out, "  environment: {env}");
        let _ = writeln!(out, "  type: {}", c.ty);
        let _ = writeln!(out, "  source {} : {:?}", c.source, c.source_answer);
        let _ = writeln!(out, "  target {} : {:?}", c.target, c.target_answer);
    }
    out
}

fn render_diagnostics(out: &mut String, a: &Analysis) {
    let _ = writeln!(out);
    let _ = writeln!(out, "== DIAGNOSTICS ==");
    for d in &a.report.diagnostics {
        let _ = writeln!(out, "{d}");
    }
}

/// Builds every progress outline of a language that passed the checker.
pub fn outlines(
    lang: &TypedLanguage,
    roles: &RoleEnv,
    topo: &TopoOrder,
    errctx: Option<&ContextSummary>,
) -> Vec<ProgressOutline> {
    roles
        .gamma_t
        .keys()
        .map(|op| progress_lemma_outline(lang, op, roles, topo, errctx))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{check_source, CheckOptions};
    use crate::ir::name;
    use crate::oracle::elaborate_with;

    const LISTS: &str = include_str!("../fixtures/corpus/lists.mod");
    const EXCEPTIONS: &str = include_str!("../fixtures/corpus/exceptions.mod");

    fn analysis(file: &str, text: &str) -> Analysis {
        let a = check_source(file, text, &CheckOptions::default());
        assert_eq!(a.report.verdict, Verdict::Certified, "{:?}", a.report.diagnostics);
        a
    }

    fn outline<'a>(a: &'a Analysis, op: &str) -> &'a ProgressOutline {
        a.outlines.iter().find(|o| &*o.op == op).unwrap()
    }

    fn leaf(mut n: &Node) -> &Node {
        while let Node::Case { value, .. } = n {
            n = value;
        }
        n
    }

    #[test]
    fn head_splits_on_list_values() {
        let a = analysis("lists.mod", LISTS);
        let o = outline(&a, "head");
        assert_eq!(o.order, vec![1]);
        let Node::Leaf { cases, .. } = leaf(&o.tree) else { unreachable!() };
        let cited: BTreeSet<&str> = cases.iter().flat_map(|(_, r)| r.iter().map(String::as_str)).collect();
        assert_eq!(cited, BTreeSet::from(["r-head-cons", "r-head-nil"]));
    }

    #[test]
    fn try_error_case_cites_the_handler() {
        let a = analysis("exceptions.mod", EXCEPTIONS);
        let Node::Case { arg, step, err, .. } = &outline(&a, "try").tree else {
            panic!("try has a contextual argument")
        };
        assert_eq!((*arg, step.as_slice()), (1, ["ctx-try-1".to_string()].as_slice()));
        assert_eq!(err.as_deref(), Some(["r-try-raise".to_string()].as_slice()));
    }

    #[test]
    fn outlines_cross_check() {
        for (f, t) in [("lists.mod", LISTS), ("exceptions.mod", EXCEPTIONS)] {
            let a = analysis(f, t);
            let lang = a.lang.as_ref().unwrap();
            let rules = elaborate_with(lang, a.errctx.as_ref());
            assert_eq!(cross_check(&a.outlines, &rules, &lang.ctx), Vec::<String>::new());
        }
    }

    #[test]
    fn cross_check_finds_a_bad_citation() {
        let a = analysis("lists.mod", LISTS);
        let lang = a.lang.as_ref().unwrap();
        let rules = elaborate_with(lang, a.errctx.as_ref());
        let mut bad = a.outlines.clone();
        let head = bad.iter_mut().find(|o| &*o.op == "head").unwrap();
        if let Node::Case { step, .. } = &mut head.tree {
            step[0] = "ctx-head-9".into();
        }
        let problems = cross_check(&bad, &rules, &lang.ctx);
        assert_eq!(problems, vec!["head: step case of argument 1 cites missing rule ctx-head-9"]);
    }

    #[test]
    fn canonical_forms_of_lists() {
        let a = analysis("lists.mod", LISTS);
        let cf = canonical_forms_entry(&name("list"), &a.roles);
        let ops: Vec<&str> = cf.forms.iter().map(|(o, _)| &**o).collect();
        assert_eq!(ops, vec!["cons", "nil"]);
    }

    #[test]
    fn certificate_sections() {
        let text = emit_certificate(&analysis("lists.mod", LISTS));
        for s in ["== VERDICT ==", "== THEOREM ==", "== LEMMA canonical-forms list ==", "== LEMMA progress head ==", "== PRESERVATION =="] {
            assert!(text.contains(s), "missing {s}");
        }
        assert!(text.contains("If typeOf e int and value e"));
    }

    #[test]
    fn rejected_certificate_lists_diagnostics() {
        let text = LISTS.replace("step (head nil) (raise zero).", "");
        let a = check_source("lists.mod", &text, &CheckOptions::default());
        let cert = emit_certificate(&a);
        assert!(cert.contains("verdict: rejected") && cert.contains("E210"));
        assert!(!cert.contains("== THEOREM =="));
    }
}
