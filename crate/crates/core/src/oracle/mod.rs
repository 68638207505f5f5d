//! Executable semantics: elaboration, evaluation, closed typing, and
//! randomized soundness testing.

mod elaborate;
mod fuzz;
mod generate;

pub use elaborate::{ctx_rule, effective_errctx, elaborate, elaborate_with, errctx_rule, ExecutableRuleSet};
pub use fuzz::{fuzz_soundness, FuzzConfig, FuzzFinding, FuzzReport};
pub use generate::{ground_type, GenerationFailed, Generator};

use serde::Serialize;

use crate::diag::{Code, Diagnostic};
use crate::engine::{Answer, Engine, Flow, Program};
use crate::ir::{Formula, Printer, Term};

/// Proof-depth bound for object-level queries; nesting of evaluation
/// contexts and typing derivations is what it limits.
pub const EVAL_DEPTH_LIMIT: u32 = 10_000;

/// Terms larger than this are not stepped further.
pub const MAX_TERM_SIZE: usize = 1_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EvalOutcome {
    Value { term: String },
    Error { term: String },
    Stuck { term: String },
    StepBudgetExhausted { term: String, steps: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosedType {
    Typed { ty: Term, ambiguous: bool },
    Untypable,
    Undecided,
}

pub fn print_closed(t: &Term) -> String {
    let v = |i: u32| format!("_V{i}");
    let e = |i: u32| format!("_c{i}");
    Printer {
        var_name: &v,
        eigen_name: &e,
    }
    .print(t)
}

/// Evaluator and type checker over an elaborated rule set.
pub struct Interpreter {
    pub rules: ExecutableRuleSet,
    program: Program,
    typing: Program,
    pub depth_limit: u32,
}

impl Interpreter {
    pub fn new(rules: ExecutableRuleSet) -> Self {
        let program = Program::new(rules.all());
        let typing = Program::new(rules.typing.clone());
        Interpreter {
            rules,
            program,
            typing,
            depth_limit: EVAL_DEPTH_LIMIT,
        }
    }

    fn engine(&self) -> Engine<'_> {
        let mut e = Engine::new(&self.program);
        e.depth_limit = self.depth_limit;
        e.step_limit = 2_000_000;
        e
    }

    fn typing_engine(&self) -> Engine<'_> {
        let mut e = Engine::new(&self.typing);
        e.depth_limit = self.depth_limit;
        e.step_limit = 2_000_000;
        e
    }

    pub fn is_value(&self, t: &Term) -> Answer {
        self.engine().prove(&[Formula::Value(t.clone())])
    }

    pub fn is_error(&self, t: &Term) -> Answer {
        self.engine().prove(&[Formula::Error(t.clone())])
    }

    /// All one-step successors, without duplicates, in rule order.
    pub fn step(&self, t: &Term) -> Vec<Term> {
        let mut e = self.engine();
        let x = e.fresh_var();
        let mut out: Vec<Term> = Vec::new();
        e.solve(&[Formula::Step(t.clone(), x.clone())], &mut |e: &mut Engine| {
            if !e.store.has_deferred() {
                let s = e.resolve(&x);
                if s.vars().is_empty() && !out.contains(&s) {
                    out.push(s);
                }
            }
            Flow::Continue
        });
        out
    }

    /// Evaluates by always taking the first successor.
    pub fn run(&self, t: &Term, max_steps: usize) -> (Vec<Term>, EvalOutcome) {
        let mut trace = vec![t.clone()];
        let mut cur = t.clone();
        for _ in 0..max_steps {
            let next = if cur.size() > MAX_TERM_SIZE {
                None
            } else {
                self.step(&cur).into_iter().next()
            };
            match next {
                Some(n) => {
                    trace.push(n.clone());
                    cur = n;
                }
                None => {
                    let term = print_closed(&cur);
                    let outcome = if cur.size() > MAX_TERM_SIZE {
                        EvalOutcome::StepBudgetExhausted {
                            term,
                            steps: trace.len() - 1,
                        }
                    } else if self.is_value(&cur) == Answer::Yes {
                        EvalOutcome::Value { term }
                    } else if self.is_error(&cur) == Answer::Yes {
                        EvalOutcome::Error { term }
                    } else {
                        EvalOutcome::Stuck { term }
                    };
                    return (trace, outcome);
                }
            }
        }
        let term = print_closed(&cur);
        let outcome = if self.step(&cur).is_empty() {
            if self.is_value(&cur) == Answer::Yes {
                EvalOutcome::Value { term }
            } else if self.is_error(&cur) == Answer::Yes {
                EvalOutcome::Error { term }
            } else {
                EvalOutcome::Stuck { term }
            }
        } else {
            EvalOutcome::StepBudgetExhausted {
                term,
                steps: max_steps,
            }
        };
        (trace, outcome)
    }

    /// Checks `t : ty` for a ground `ty`.
    pub fn has_type(&self, t: &Term, ty: &Term) -> Answer {
        self.typing_engine().prove(&[Formula::Typing(t.clone(), ty.clone())])
    }

    /// Infers the type of a closed term. Residual type variables are
    /// grounded to the language's base type; a second, different typing
    /// marks the result ambiguous.
    pub fn typeof_closed(&self, t: &Term) -> (ClosedType, Vec<Diagnostic>) {
        let mut diags = Vec::new();
        let base = self.base_type();
        let mut e = self.typing_engine();
        let x = e.fresh_var();
        let mut found: Vec<Term> = Vec::new();
        let mut residual = false;
        e.solve(&[Formula::Typing(t.clone(), x.clone())], &mut |e: &mut Engine| {
            if e.store.has_deferred() {
                return Flow::Continue;
            }
            let ty = e.resolve(&x);
            residual |= !ty.vars().is_empty();
            let ty = match &base {
                Some(b) => ty.subst_vars(&|_| Some(b.clone())),
                None => ty,
            };
            if !found.contains(&ty) {
                found.push(ty);
            }
            if found.len() >= 2 {
                Flow::Stop
            } else {
                Flow::Continue
            }
        });
        if residual && base.is_none() {
            diags.push(Diagnostic::new(
                Code::W004,
                "the language has no ground base type to instantiate type variables with",
            ));
        }
        let exceeded = e.exceeded();
        let mut found = found.into_iter();
        match (found.next(), found.next()) {
            (Some(ty), second) => {
                let ambiguous = second.is_some();
                if ambiguous {
                    diags.push(Diagnostic::new(
                        Code::W002,
                        format!("`{}` has more than one type", print_closed(t)),
                    ));
                }
                (ClosedType::Typed { ty, ambiguous }, diags)
            }
            (None, _) if exceeded => (ClosedType::Undecided, diags),
            (None, _) => (ClosedType::Untypable, diags),
        }
    }

    /// First declared type constant without arguments.
    pub fn base_type(&self) -> Option<Term> {
        self.rules
            .signature
            .typ_constants()
            .into_iter()
            .find(|(_, k)| k.args().is_empty())
            .map(|(n, _)| Term::Const(n.clone(), Vec::new().into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{load, parse_closed_term};

    pub(crate) const NAT: &str = r"
type int typ.
type bool typ.
type list typ -> typ.
type arrow typ -> typ -> typ.
type z exp.
type succ exp -> exp.
type pred exp -> exp.
type raise exp -> exp.
type nil exp.
type head exp -> exp.
type cons exp -> exp -> exp.
type app exp -> exp -> exp.
type abs typ -> (exp -> exp) -> exp.
typeOf z int.
typeOf (succ E) int :- typeOf E int.
typeOf (pred E) int :- typeOf E int.
typeOf (raise E) T :- typeOf E int.
typeOf nil (list T).
typeOf (cons E1 E2) (list T) :- typeOf E1 T, typeOf E2 (list T).
typeOf (head E) T :- typeOf E (list T).
typeOf (abs T1 R) (arrow T1 T2) :- pi x\ (typeOf x T1 => typeOf (R x) T2).
typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.
value z.
value (succ V).
value nil.
value (cons V1 V2).
value (abs T R).
error (raise V).
step (pred z) (raise z).
step (pred (succ V)) V.
step (head nil) (raise z).
step (head (cons V1 V2)) V1.
step (app (abs T R) V) (R V).
% context succ E.
% context pred E.
% context raise E.
% context cons E e.
% context cons v E.
% context head E.
% context app E e.
% context app e E.
";

    fn interp(text: &str) -> (Interpreter, crate::ir::Signature) {
        let lang = load("nat.mod", text).unwrap();
        let sig = lang.signature.clone();
        (Interpreter::new(elaborate(&lang)), sig)
    }

    fn steps(i: &Interpreter, sig: &crate::ir::Signature, t: &str) -> Vec<String> {
        let t = parse_closed_term(sig, t).unwrap();
        i.step(&t).iter().map(print_closed).collect()
    }

    #[test]
    fn predecessor_of_successor() {
        let (i, sig) = interp(NAT);
        assert_eq!(steps(&i, &sig, "pred (succ z)"), vec!["z"]);
    }

    #[test]
    fn error_propagates_through_succ() {
        let (i, sig) = interp(NAT);
        assert_eq!(steps(&i, &sig, "succ (raise z)"), vec!["raise z"]);
    }

    #[test]
    fn parallel_contexts_give_two_successors() {
        let (i, sig) = interp(NAT);
        let got = steps(&i, &sig, "app (pred (succ z)) (pred (succ z))");
        assert_eq!(got, vec!["app z (pred (succ z))", "app (pred (succ z)) z"]);
    }

    #[test]
    fn run_to_a_value() {
        let (i, sig) = interp(NAT);
        let t = parse_closed_term(&sig, "app (abs int (x\\ succ x)) (pred (succ z))").unwrap();
        let (trace, out) = i.run(&t, 100);
        assert_eq!(out, EvalOutcome::Value { term: "succ z".into() });
        assert_eq!(trace.len(), 3);
    }

    #[test]
    fn head_of_nil_raises() {
        let (i, sig) = interp(NAT);
        let t = parse_closed_term(&sig, "succ (head nil)").unwrap();
        let (_, out) = i.run(&t, 100);
        assert_eq!(out, EvalOutcome::Error { term: "raise z".into() });
    }

    #[test]
    fn stuck_without_nil_rule() {
        let (i, sig) = interp(&NAT.replace("step (head nil) (raise z).", ""));
        let t = parse_closed_term(&sig, "head nil").unwrap();
        assert_eq!(i.run(&t, 10).1, EvalOutcome::Stuck { term: "head nil".into() });
    }

    #[test]
    fn closed_typing() {
        let (i, sig) = interp(NAT);
        let ty = |s: &str| match i.typeof_closed(&parse_closed_term(&sig, s).unwrap()).0 {
            ClosedType::Typed { ty, .. } => Some(print_closed(&ty)),
            _ => None,
        };
        assert_eq!(ty("abs int (x\\ x)").as_deref(), Some("arrow int int"));
        assert_eq!(ty("head nil").as_deref(), Some("int"));
        assert_eq!(ty("app z z"), None);
    }
}
