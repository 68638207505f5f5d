//! Formulas over the fixed predicate table and inference rules.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::kind::Kind;
use super::term::{Hint, Name, Printer, Term};

/// 1-based line and column in a source file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pred {
    Typing,
    Step,
    StepStar,
    Value,
    Error,
}

impl Pred {
    pub fn surface(self) -> &'static str {
        match self {
            Pred::Typing => "typeOf",
            Pred::Step => "step",
            Pred::StepStar => "stepstar",
            Pred::Value => "value",
            Pred::Error => "error",
        }
    }

    pub fn from_surface(s: &str) -> Option<Pred> {
        Some(match s {
            "typeOf" => Pred::Typing,
            "step" => Pred::Step,
            "stepstar" => Pred::StepStar,
            "value" => Pred::Value,
            "error" => Pred::Error,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Pred::Value | Pred::Error => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Typing(Term, Term),
    Step(Term, Term),
    StepStar(Term, Term),
    Value(Term),
    Error(Term),
    /// `pi x\ body`; the body refers to `x` as `Bound(0)`.
    Generic(Hint, Kind, Box<Formula>),
    /// `assumption => conclusion`.
    Hypothetical(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: Pred, args: Vec<Term>) -> Formula {
        let mut it = args.into_iter();
        let mut next = || it.next().expect("predicate arity");
        match pred {
            Pred::Typing => Formula::Typing(next(), next()),
            Pred::Step => Formula::Step(next(), next()),
            Pred::StepStar => Formula::StepStar(next(), next()),
            Pred::Value => Formula::Value(next()),
            Pred::Error => Formula::Error(next()),
        }
    }

    pub fn pred(&self) -> Option<Pred> {
        Some(match self {
            Formula::Typing(..) => Pred::Typing,
            Formula::Step(..) => Pred::Step,
            Formula::StepStar(..) => Pred::StepStar,
            Formula::Value(_) => Pred::Value,
            Formula::Error(_) => Pred::Error,
            _ => return None,
        })
    }

    pub fn is_atom(&self) -> bool {
        self.pred().is_some()
    }

    /// Arguments of an atomic formula.
    pub fn args(&self) -> Vec<&Term> {
        match self {
            Formula::Typing(a, b) | Formula::Step(a, b) | Formula::StepStar(a, b) => vec![a, b],
            Formula::Value(a) | Formula::Error(a) => vec![a],
            _ => Vec::new(),
        }
    }

    /// First argument of an atomic formula: the subject of typing, the
    /// source of a step.
    pub fn subject(&self) -> Option<&Term> {
        self.args().into_iter().next()
    }

    pub fn map_terms(&self, f: &mut dyn FnMut(&Term, u32) -> Term) -> Formula {
        self.map_terms_at(0, f)
    }

    /// `f` receives each term together with the number of enclosing
    /// generic binders.
    fn map_terms_at(&self, depth: u32, f: &mut dyn FnMut(&Term, u32) -> Term) -> Formula {
        match self {
            Formula::Typing(a, b) => Formula::Typing(f(a, depth), f(b, depth)),
            Formula::Step(a, b) => Formula::Step(f(a, depth), f(b, depth)),
            Formula::StepStar(a, b) => Formula::StepStar(f(a, depth), f(b, depth)),
            Formula::Value(a) => Formula::Value(f(a, depth)),
            Formula::Error(a) => Formula::Error(f(a, depth)),
            Formula::Generic(h, k, body) => {
                Formula::Generic(h.clone(), k.clone(), Box::new(body.map_terms_at(depth + 1, f)))
            }
            Formula::Hypothetical(a, c) => Formula::Hypothetical(
                Box::new(a.map_terms_at(depth, f)),
                Box::new(c.map_terms_at(depth, f)),
            ),
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Formula::Generic(_, _, body) => body.terms(),
            Formula::Hypothetical(a, c) => {
                let mut v = a.terms();
                v.extend(c.terms());
                v
            }
            atom => atom.args(),
        }
    }

    /// Instantiates the outermost generic binder of a generic body.
    pub fn open(&self, arg: &Term) -> Formula {
        self.map_terms(&mut |t, d| t.open_at(d, arg))
    }

    pub fn shift_vars(&self, base: u32) -> Formula {
        self.map_terms(&mut |t, _| t.shift_vars(base))
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.terms().into_iter().flat_map(|t| t.vars()).collect()
    }

    /// Peels generic and hypothetical wrappers down to the final atom.
    pub fn core(&self) -> &Formula {
        match self {
            Formula::Generic(_, _, b) => b.core(),
            Formula::Hypothetical(_, c) => c.core(),
            atom => atom,
        }
    }

    pub fn print(&self, p: &Printer) -> String {
        let mut scope = Vec::new();
        self.print_in(p, &mut scope)
    }

    fn print_in(&self, p: &Printer, scope: &mut Vec<String>) -> String {
        match self {
            Formula::Generic(h, _, body) => {
                let base: &str = if h.0.is_empty() { "x" } else { &h.0 };
                let mut fresh = base.to_string();
                let mut n = 1;
                while scope.contains(&fresh) {
                    fresh = format!("{base}{n}");
                    n += 1;
                }
                scope.push(fresh.clone());
                let inner = body.print_in(p, scope);
                scope.pop();
                format!("pi {fresh}\\ {inner}")
            }
            Formula::Hypothetical(a, c) => {
                let lhs = a.print_in(p, scope);
                let lhs = if a.is_atom() { lhs } else { format!("({lhs})") };
                let rhs = c.print_in(p, scope);
                let rhs = if matches!(**c, Formula::Generic(..)) {
                    format!("({rhs})")
                } else {
                    rhs
                };
                format!("{lhs} => {rhs}")
            }
            atom => {
                let mut out = atom.pred().expect("atom").surface().to_string();
                for t in atom.args() {
                    out.push(' ');
                    // Generic-bound names are visible as binders of the
                    // enclosing scope: wrap the term in matching binders to
                    // reuse the term printer's name resolution.
                    out.push_str(&print_scoped(p, t, scope));
                }
                out
            }
        }
    }
}

/// Prints `t`, resolving loose `Bound` indices against `scope`.
fn print_scoped(p: &Printer, t: &Term, scope: &[String]) -> String {
    if scope.is_empty() || !t.has_loose_bound() {
        let s = p.print(t);
        return if needs_parens(t) { format!("({s})") } else { s };
    }
    let closed = t.map_leaves(&mut |leaf, d| match leaf {
        Term::Bound(i) if *i >= d => {
            let idx = (*i - d) as usize;
            scope
                .len()
                .checked_sub(1 + idx)
                .map(|k| Term::atom(&scope[k]))
        }
        _ => None,
    });
    let s = p.print(&closed);
    if needs_parens(t) {
        format!("({s})")
    } else {
        s
    }
}

fn needs_parens(t: &Term) -> bool {
    match t {
        Term::Const(_, args) => !args.is_empty(),
        Term::Bind(..) | Term::App(..) => true,
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Flavor {
    Expr,
    Value,
    Type,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarInfo {
    pub name: Name,
    pub flavor: Flavor,
    pub kind: Kind,
}

/// An inference rule. Meta-variables are `Term::Var(i)` with `i` indexing
/// `vars`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub vars: Vec<VarInfo>,
    pub span: Span,
}

impl Rule {
    pub fn pred(&self) -> Pred {
        self.conclusion.pred().expect("rule conclusions are atomic")
    }

    /// Head constant of the conclusion's first argument.
    pub fn head_op(&self) -> Option<&Name> {
        self.conclusion.subject().and_then(Term::head)
    }

    /// Variables that carry a `value X` premise.
    pub fn value_vars(&self) -> BTreeSet<u32> {
        self.premises
            .iter()
            .filter_map(|p| match p {
                Formula::Value(Term::Var(v)) => Some(*v),
                _ => None,
            })
            .collect()
    }

    pub fn var_name(&self, v: u32) -> String {
        self.vars
            .get(v as usize)
            .map(|i| i.name.to_string())
            .unwrap_or_else(|| format!("_V{v}"))
    }

    pub fn printer(&self) -> impl Fn(u32) -> String + '_ {
        move |v| self.var_name(v)
    }

    /// Renders the rule as a clause of the surface syntax.
    pub fn to_clause(&self) -> String {
        let names = self.printer();
        let p = Printer {
            var_name: &names,
            ..Printer::default()
        };
        let head = self.conclusion.print(&p);
        if self.premises.is_empty() {
            format!("{head}.")
        } else {
            let body: Vec<String> = self.premises.iter().map(|f| f.print(&p)).collect();
            format!("{head} :- {}.", body.join(", "))
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_clause())
    }
}
