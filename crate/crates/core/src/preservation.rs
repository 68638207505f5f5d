//! Type preservation of step rules by symbolic execution.
//!
//! For each step rule we build the typing environment its source forces:
//! the premises of the operator's typing rule instantiated with the source,
//! and, when the first argument is matched against a constructor, that
//! constructor's premises in place of the premise for the matched argument.
//! Remaining meta-variables are frozen into constants. The rule preserves
//! types if both source and target have the assigned type under that
//! environment.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::classify::split_head;
use crate::diag::{Code, Diagnostic};
use crate::engine::{Answer, Engine, Program};
use crate::ir::{Formula, Printer, Rule, Term, TypedLanguage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shape {
    /// Only the operator's own typing rule is used.
    One,
    /// The matched constructor's typing rule is used as well.
    Two,
}

/// A frozen typing environment. Terms refer to `Eigen(i)` for
/// `i < names.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicEnv {
    pub rule: String,
    pub shape: Shape,
    pub facts: Vec<Formula>,
    pub source: Term,
    pub target: Term,
    pub ty: Term,
    pub names: Vec<String>,
    /// Typing rules the environment was built from.
    pub typing_rules: Vec<String>,
}

impl SymbolicEnv {
    pub fn show(&self, t: &Term) -> String {
        let names = |e: u32| self.names.get(e as usize).cloned().unwrap_or_else(|| format!("_c{e}"));
        let vars = |v: u32| format!("_V{v}");
        Printer {
            var_name: &vars,
            eigen_name: &names,
        }
        .print(t)
    }

    pub fn show_formula(&self, f: &Formula) -> String {
        let names = |e: u32| self.names.get(e as usize).cloned().unwrap_or_else(|| format!("_c{e}"));
        let vars = |v: u32| format!("_V{v}");
        f.print(&Printer {
            var_name: &vars,
            eigen_name: &names,
        })
    }
}

fn ill_typed(rule: &Rule, msg: String) -> Diagnostic {
    Diagnostic::new(Code::E300p, msg).in_rule(&rule.name, rule.span)
}

/// The program used for entailment: the typing rules.
pub fn typing_program(lang: &TypedLanguage) -> Program {
    Program::new(lang.partition().typing)
}

/// Builds the frozen environment of a step rule.
pub fn build_symbolic_env(
    lang: &TypedLanguage,
    prog: &Program,
    rule: &Rule,
) -> Result<SymbolicEnv, Diagnostic> {
    let sig = &lang.signature;
    let mut e = Engine::new(prog);
    let (head, _, inst) = e.instantiate(rule);
    let Formula::Step(source, target) = head else {
        return Err(ill_typed(rule, "not a step rule".into()));
    };
    let Some(src_head) = split_head(sig, &source) else {
        return Err(ill_typed(rule, "the source is not an operator application".into()));
    };
    let op1 = src_head.op.clone();
    let Some(t1) = lang.typing_rule(&op1) else {
        return Err(ill_typed(rule, format!("`{op1}` has no typing rule")));
    };
    let (th, mut facts, inst1) = e.instantiate(t1);
    let Formula::Typing(subj1, ty) = th else { unreachable!() };
    let mut typing_rules = vec![t1.name.clone()];

    let mut named: Vec<(Term, String)> = inst
        .iter()
        .zip(&rule.vars)
        .map(|(t, v)| (t.clone(), v.name.to_string()))
        .collect();
    named.extend(inst1.iter().zip(&t1.vars).map(|(t, v)| (t.clone(), v.name.to_string())));

    let inner = src_head
        .exp
        .first()
        .and_then(|a| split_head(sig, a))
        .map(|h| (h.op.clone(), src_head.exp[0].clone()));

    // The premise about the first argument, identified before unification
    // binds its subject.
    let first_var = split_head(sig, &subj1)
        .and_then(|h| h.exp.first().and_then(|a| a.as_var()));
    if !e.unify(&subj1, &source) {
        return Err(ill_typed(
            rule,
            format!("the source does not match the typing rule {} of `{op1}`", t1.name),
        ));
    }

    let mut shape = Shape::One;
    if let Some((op2, arg1)) = inner {
        let Some(t2) = lang.typing_rule(&op2) else {
            return Err(ill_typed(rule, format!("`{op2}` has no typing rule")));
        };
        let pos = first_var.and_then(|v| {
            facts
                .iter()
                .position(|f| matches!(f, Formula::Typing(Term::Var(x), _) if *x == v))
        });
        let Some(pos) = pos else {
            return Err(ill_typed(
                rule,
                format!("the typing rule of `{op1}` has no plain premise for argument 1"),
            ));
        };
        let Formula::Typing(_, expected) = facts.remove(pos) else { unreachable!() };
        let (th2, facts2, inst2) = e.instantiate(t2);
        let Formula::Typing(subj2, ty2) = th2 else { unreachable!() };
        named.extend(inst2.iter().zip(&t2.vars).map(|(t, v)| (t.clone(), v.name.to_string())));
        if !e.unify(&subj2, &arg1) || !e.unify(&ty2, &expected) {
            return Err(ill_typed(
                rule,
                format!(
                    "`{op2}` cannot appear as argument 1 of `{op1}`: its typing rule {} does not fit",
                    t2.name
                ),
            ));
        }
        facts.extend(facts2);
        typing_rules.push(t2.name.clone());
        shape = Shape::Two;
    }
    e.store.flush();

    // Freeze: every residual variable becomes a named constant.
    let facts: Vec<Formula> = facts.iter().map(|f| e.resolve_formula(f)).collect();
    let source = e.resolve(&source);
    let target = e.resolve(&target);
    let ty = e.resolve(&ty);
    let mut residual: Vec<u32> = Vec::new();
    let mut note = |t: &Term| {
        for v in t.vars() {
            if !residual.contains(&v) {
                residual.push(v);
            }
        }
    };
    note(&source);
    for f in &facts {
        for t in f.terms() {
            note(t);
        }
    }
    note(&ty);
    note(&target);

    let mut var_name: BTreeMap<u32, String> = BTreeMap::new();
    for (t, n) in &named {
        if let Term::Var(v) = e.resolve(t) {
            var_name.entry(v).or_insert_with(|| n.clone());
        }
    }
    let mut used = BTreeSet::new();
    let mut names = Vec::new();
    let mut index: BTreeMap<u32, u32> = BTreeMap::new();
    for (i, v) in residual.iter().enumerate() {
        let base = var_name.get(v).cloned().unwrap_or_else(|| "T".into());
        let mut n = base.clone();
        let mut k = 1;
        while !used.insert(n.clone()) {
            k += 1;
            n = format!("{base}_{k}");
        }
        names.push(n);
        index.insert(*v, i as u32);
    }
    let freeze = |t: &Term| t.subst_vars(&|v| index.get(&v).map(|i| Term::Eigen(*i)));
    Ok(SymbolicEnv {
        rule: rule.name.clone(),
        shape,
        facts: facts
            .iter()
            .map(|f| f.map_terms(&mut |t, _| freeze(t)))
            .collect(),
        source: freeze(&source),
        target: freeze(&target),
        ty: freeze(&ty),
        names,
        typing_rules,
    })
}

/// Decides `facts ⊢ subject : ty` in the frozen environment.
pub fn entails(
    prog: &Program,
    env: &SymbolicEnv,
    subject: &Term,
    depth_limit: u32,
    trace: bool,
) -> (Answer, Vec<String>) {
    let mut e = Engine::new(prog);
    e.depth_limit = depth_limit;
    for (i, n) in env.names.iter().enumerate() {
        let c = e.fresh_eigen();
        debug_assert_eq!(c, Term::Eigen(i as u32));
        e.name_eigen(i as u32, n.clone());
    }
    e.set_env(env.facts.clone());
    if trace {
        e.enable_trace();
    }
    let answer = e.prove(&[Formula::Typing(subject.clone(), env.ty.clone())]);
    (answer, e.take_trace())
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleCheck {
    pub rule: String,
    pub shape: Shape,
    pub environment: Vec<String>,
    pub source: String,
    pub target: String,
    pub ty: String,
    pub source_answer: Answer,
    pub target_answer: Answer,
    pub typing_rules: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
}

impl RuleCheck {
    pub fn preserved(&self) -> bool {
        self.source_answer == Answer::Yes && self.target_answer == Answer::Yes
    }
}

pub fn check_rule(
    lang: &TypedLanguage,
    prog: &Program,
    rule: &Rule,
    depth_limit: u32,
    trace: bool,
) -> (Option<RuleCheck>, Vec<Diagnostic>) {
    let env = match build_symbolic_env(lang, prog, rule) {
        Ok(env) => env,
        Err(d) => return (None, vec![d]),
    };
    let (src, mut t1) = entails(prog, &env, &env.source, depth_limit, trace);
    let (tgt, t2) = entails(prog, &env, &env.target, depth_limit, trace);
    t1.extend(t2);
    let facts: Vec<String> = env.facts.iter().map(|f| env.show_formula(f)).collect();
    let check = RuleCheck {
        rule: rule.name.clone(),
        shape: env.shape,
        environment: facts.clone(),
        source: env.show(&env.source),
        target: env.show(&env.target),
        ty: env.show(&env.ty),
        source_answer: src,
        target_answer: tgt,
        typing_rules: env.typing_rules.clone(),
        trace: t1,
    };
    let ctx = if facts.is_empty() {
        "the empty environment".to_string()
    } else {
        facts.join(", ")
    };
    let d = |code, msg: String| Diagnostic::new(code, msg).in_rule(&rule.name, rule.span);
    let diag = match (src, tgt) {
        (Answer::Yes, Answer::Yes) => None,
        (Answer::DepthExceeded, _) | (_, Answer::DepthExceeded) => Some(d(
            Code::E301,
            format!(
                "could not decide whether the rule preserves `{}` within the depth limit",
                check.ty
            ),
        )),
        (Answer::No, _) => Some(d(
            Code::E300p,
            format!("the source `{}` does not have type `{}` under {ctx}", check.source, check.ty),
        )),
        (Answer::Yes, Answer::No) => Some(d(
            Code::E300,
            format!(
                "the target `{}` does not have type `{}` under {ctx}",
                check.target, check.ty
            ),
        )),
    };
    (Some(check), diag.into_iter().collect())
}

/// Checks every named step rule.
pub fn check_preservation(
    lang: &TypedLanguage,
    rules: &[&str],
    depth_limit: u32,
    trace: bool,
) -> (Vec<RuleCheck>, Vec<Diagnostic>) {
    let prog = typing_program(lang);
    let mut checks = Vec::new();
    let mut diags = Vec::new();
    for name in rules {
        let Some(rule) = lang.rule(name) else { continue };
        let (c, ds) = check_rule(lang, &prog, rule, depth_limit, trace);
        checks.extend(c);
        diags.extend(ds);
    }
    (checks, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::DEFAULT_DEPTH_LIMIT;
    use crate::syntax::load;

    const LANG: &str = r"
type arrow typ -> typ -> typ.
type int typ.
type list typ -> typ.
type forall (typ -> typ) -> typ.
type mu (typ -> typ) -> typ.
type abs typ -> (exp -> exp) -> exp.
type app exp -> exp -> exp.
type zero exp.
type raise exp -> exp.
type try exp -> exp -> exp.
type nil typ -> exp.
type cons exp -> exp -> exp.
type head exp -> exp.
type tail exp -> exp.
type fix exp -> exp.
type letrec typ -> (exp -> exp) -> (exp -> exp) -> exp.
type absT (typ -> exp) -> exp.
type appT typ -> exp -> exp.
type fold (typ -> typ) -> exp -> exp.
type unfold exp -> exp.
typeOf (abs T1 R) (arrow T1 T2) :- pi x\ (typeOf x T1 => typeOf (R x) T2).
typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.
typeOf zero int.
typeOf (raise E) T :- typeOf E int.
typeOf (try E1 E2) T :- typeOf E1 T, typeOf E2 (arrow int T).
typeOf (nil T) (list T).
typeOf (cons E1 E2) (list T) :- typeOf E1 T, typeOf E2 (list T).
typeOf (head E) T :- typeOf E (list T).
typeOf (tail E) (list T) :- typeOf E (list T).
typeOf (fix E) T :- typeOf E (arrow T T).
typeOf (letrec T1 R1 R2) T2 :- pi x\ (typeOf x T1 => typeOf (R1 x) T1), pi x\ (typeOf x T1 => typeOf (R2 x) T2).
typeOf (absT R) (forall T) :- pi x\ typeOf (R x) (T x).
typeOf (appT T1 E) (T2 T1) :- typeOf E (forall T2).
typeOf (fold F E) (mu F) :- typeOf E (F (mu F)).
typeOf (unfold E) (F (mu F)) :- typeOf E (mu F).
step (app (abs T R) V) (R V).
step (try V E) V.
step (try (raise V) E) (app E V).
step (head (cons V1 V2)) V1.
step (head (nil T)) (raise zero).
step (tail (cons V1 V2)) V2.
step (fix V) (app V (fix V)).
step (letrec T R1 R2) (R2 (fix (abs T R1))).
step (appT T (absT R)) (R T).
step (unfold (fold F V)) V.
";

    fn run(text: &str, rule: &str) -> (Option<RuleCheck>, Vec<Diagnostic>) {
        let lang = load("lang.mod", text).unwrap();
        let prog = typing_program(&lang);
        check_rule(&lang, &prog, lang.rule(rule).unwrap(), DEFAULT_DEPTH_LIMIT, false)
    }

    fn step_names(text: &str) -> Vec<String> {
        let lang = load("lang.mod", text).unwrap();
        lang.partition().step.iter().map(|r| r.name.clone()).collect()
    }

    #[test]
    fn all_rules_preserve_types() {
        for name in step_names(LANG) {
            let (c, d) = run(LANG, &name);
            assert!(d.is_empty(), "{name}: {d:?}");
            assert!(c.unwrap().preserved());
        }
    }

    #[test]
    fn head_environment_is_built_from_cons() {
        let name = step_names(LANG).into_iter().find(|n| n.starts_with("r-head-cons")).unwrap();
        let c = run(LANG, &name).0.unwrap();
        assert_eq!(c.shape, Shape::Two);
        assert_eq!(c.environment, vec!["typeOf V1 T", "typeOf V2 (list T)"]);
        assert_eq!(c.ty, "T");
    }

    #[test]
    fn wrong_projection_is_reported() {
        let text = LANG.replace("step (head (cons V1 V2)) V1.", "step (head (cons V1 V2)) V2.");
        let name = step_names(&text).into_iter().find(|n| n.starts_with("r-head-cons")).unwrap();
        let (c, d) = run(&text, &name);
        assert!(!c.unwrap().preserved());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::E300);
        assert!(d[0].message.contains("`V2` does not have type `T`"), "{}", d[0].message);
    }

    #[test]
    fn ill_typed_pattern() {
        let text = LANG.replace("step (head (nil T)) (raise zero).", "step (head zero) (raise zero).");
        let name = step_names(&text).into_iter().find(|n| n.starts_with("r-head-zero")).unwrap();
        assert_eq!(run(&text, &name).1[0].code, Code::E300p);
    }

    #[test]
    fn binder_rules_with_wrong_targets_fail() {
        for (from, to, prefix) in [
            ("step (fix V) (app V (fix V)).", "step (fix V) V.", "r-fix"),
            ("step (appT T (absT R)) (R T).", "step (appT T (absT R)) (absT R).", "r-appT"),
            ("step (letrec T R1 R2) (R2 (fix (abs T R1))).", "step (letrec T R1 R2) (fix (abs T R1)).", "r-letrec"),
        ] {
            let text = LANG.replace(from, to);
            let name = step_names(&text).into_iter().find(|n| n.starts_with(prefix)).unwrap();
            let (_, d) = run(&text, &name);
            assert_eq!(d.iter().map(|d| d.code).collect::<Vec<_>>(), vec![Code::E300], "{to}");
        }
    }
}
