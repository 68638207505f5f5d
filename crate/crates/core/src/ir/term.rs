//! Meta-level terms over a signature.
//!
//! Binders are locally nameless: the surface name survives only as a
//! printing [`Hint`], the body refers to its binder through [`Term::Bound`]
//! de Bruijn indices. Alpha-equivalent terms are therefore structurally
//! equal.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Binder name used only for printing. Ignored by equality and hashing.
#[derive(Clone, Debug, Default)]
pub struct Hint(pub Name);

impl PartialEq for Hint {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Hint {}

impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl Hint {
    pub fn new(s: &str) -> Self {
        Hint(name(s))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// A signature constant applied to exactly its arity of arguments.
    Const(Name, Arc<[Term]>),
    /// A meta-variable. Inside a [`crate::ir::Rule`] the index points into
    /// the rule's variable table; inside the engine it is a unification
    /// variable.
    Var(u32),
    /// A rigid local constant: a frozen meta-variable or a variable
    /// introduced by a generic goal.
    Eigen(u32),
    /// De Bruijn index of an enclosing [`Term::Bind`] or generic formula.
    Bound(u32),
    Bind(Hint, Arc<Term>),
    /// Application of a higher-kinded meta-variable (`R x`).
    App(Arc<Term>, Arc<Term>),
}

impl Term {
    pub fn constant(head: &str, args: Vec<Term>) -> Term {
        Term::Const(name(head), args.into())
    }

    pub fn atom(head: &str) -> Term {
        Term::Const(name(head), Arc::from(Vec::new()))
    }

    pub fn bind(hint: &str, body: Term) -> Term {
        Term::Bind(Hint::new(hint), Arc::new(body))
    }

    pub fn app(head: Term, arg: Term) -> Term {
        Term::App(Arc::new(head), Arc::new(arg))
    }

    /// Head constant name, if this is a constant application.
    pub fn head(&self) -> Option<&Name> {
        match self {
            Term::Const(c, _) => Some(c),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Const(_, args) => args,
            _ => &[],
        }
    }

    pub fn as_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    /// Splits `((h a1) a2) ...` into the head and its argument spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(h, a) = cur {
            args.push(&**a);
            cur = h;
        }
        args.reverse();
        (cur, args)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Const(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::Bind(_, b) => 1 + b.size(),
            Term::App(h, a) => 1 + h.size() + a.size(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Const(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Bind(_, b) => 1 + b.depth(),
            Term::App(h, a) => 1 + h.depth().max(a.depth()),
            _ => 1,
        }
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Var(v) = t {
                out.insert(*v);
            }
        });
        out
    }

    pub fn eigens(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Eigen(e) = t {
                out.insert(*e);
            }
        });
        out
    }

    pub fn constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Const(c, _) = t {
                out.insert(c.clone());
            }
        });
        out
    }

    pub fn contains_var(&self, v: u32) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= matches!(t, Term::Var(w) if *w == v));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Const(_, args) => args.iter().for_each(|a| a.visit(f)),
            Term::Bind(_, b) => b.visit(f),
            Term::App(h, a) => {
                h.visit(f);
                a.visit(f);
            }
            _ => {}
        }
    }

    /// Rebuilds the term bottom-up, replacing leaves via `f`. `f` receives
    /// the current binder depth and returns `None` to keep the leaf.
    pub fn map_leaves(&self, f: &mut dyn FnMut(&Term, u32) -> Option<Term>) -> Term {
        self.map_leaves_at(0, f).unwrap_or_else(|| self.clone())
    }

    /// `None` when nothing changed, so unchanged subterms stay shared.
    fn map_leaves_at(&self, depth: u32, f: &mut dyn FnMut(&Term, u32) -> Option<Term>) -> Option<Term> {
        match self {
            Term::Const(c, args) => {
                let mut changed: Option<Vec<Term>> = None;
                for (i, a) in args.iter().enumerate() {
                    match (a.map_leaves_at(depth, f), changed.as_mut()) {
                        (Some(n), Some(v)) => v.push(n),
                        (Some(n), None) => {
                            let mut v = args[..i].to_vec();
                            v.push(n);
                            changed = Some(v);
                        }
                        (None, Some(v)) => v.push(a.clone()),
                        (None, None) => {}
                    }
                }
                changed.map(|v| Term::Const(c.clone(), v.into()))
            }
            Term::Bind(h, b) => b
                .map_leaves_at(depth + 1, f)
                .map(|n| Term::Bind(h.clone(), Arc::new(n))),
            Term::App(h, a) => {
                let (nh, na) = (h.map_leaves_at(depth, f), a.map_leaves_at(depth, f));
                if nh.is_none() && na.is_none() {
                    return None;
                }
                Some(Term::App(
                    nh.map(Arc::new).unwrap_or_else(|| h.clone()),
                    na.map(Arc::new).unwrap_or_else(|| a.clone()),
                ))
            }
            leaf => f(leaf, depth),
        }
    }

    /// Offsets every variable index by `base`.
    pub fn shift_vars(&self, base: u32) -> Term {
        if base == 0 {
            return self.clone();
        }
        self.map_leaves(&mut |t, _| match t {
            Term::Var(v) => Some(Term::Var(v + base)),
            _ => None,
        })
    }

    pub fn subst_vars(&self, f: &dyn Fn(u32) -> Option<Term>) -> Term {
        self.map_leaves(&mut |t, _| match t {
            Term::Var(v) => f(*v),
            _ => None,
        })
    }

    pub fn subst_eigens(&self, f: &dyn Fn(u32) -> Option<Term>) -> Term {
        self.map_leaves(&mut |t, _| match t {
            Term::Eigen(e) => f(*e),
            _ => None,
        })
    }

    /// True when some `Bound` index escapes every enclosing binder.
    pub fn has_loose_bound(&self) -> bool {
        let mut loose = false;
        self.map_leaves(&mut |t, d| {
            if let Term::Bound(i) = t {
                loose |= *i >= d;
            }
            None
        });
        loose
    }

    /// Replaces the loose index `k` (counting from the outermost binder
    /// being opened) by `arg`, decrementing indices above it. `arg` must be
    /// closed with respect to `Bound`.
    pub fn open_at(&self, k: u32, arg: &Term) -> Term {
        self.map_leaves(&mut |t, d| match t {
            Term::Bound(i) if *i == k + d => Some(arg.clone()),
            Term::Bound(i) if *i > k + d => Some(Term::Bound(i - 1)),
            _ => None,
        })
    }

    /// Body of a binder instantiated with `arg` (capture-free since `arg`
    /// carries no loose indices).
    pub fn open(&self, arg: &Term) -> Term {
        self.open_at(0, arg)
    }

    /// Abstracts the given eigen constants, innermost last: the result is
    /// meant to sit under `eigens.len()` binders, the first eigen bound by
    /// the outermost one.
    pub fn abstract_eigens(&self, eigens: &[u32]) -> Term {
        let n = eigens.len() as u32;
        self.map_leaves(&mut |t, d| match t {
            Term::Eigen(e) => eigens
                .iter()
                .rposition(|x| x == e)
                .map(|i| Term::Bound(d + n - 1 - i as u32)),
            _ => None,
        })
    }
}

/// Capture-avoiding substitution of `arg` for the variable bound by the
/// binder `body`.
pub fn substitute(body: &Term, arg: &Term) -> Result<Term, SubstError> {
    match body {
        Term::Bind(_, b) => {
            if arg.has_loose_bound() {
                return Err(SubstError::OpenArgument);
            }
            Ok(b.open(arg))
        }
        _ => Err(SubstError::NotABinder),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("substitution target is not a binder")]
    NotABinder,
    #[error("substituted term has unbound de Bruijn indices")]
    OpenArgument,
}

/// Renders terms in the surface syntax.
pub struct Printer<'a> {
    pub var_name: &'a dyn Fn(u32) -> String,
    pub eigen_name: &'a dyn Fn(u32) -> String,
}

impl Default for Printer<'_> {
    fn default() -> Self {
        Printer {
            var_name: &|v| format!("_V{v}"),
            eigen_name: &|e| format!("_c{e}"),
        }
    }
}

impl Printer<'_> {
    pub fn print(&self, t: &Term) -> String {
        let mut out = String::new();
        let mut scope = Vec::new();
        self.write(t, &mut scope, false, &mut out);
        out
    }

    fn write(&self, t: &Term, scope: &mut Vec<String>, nested: bool, out: &mut String) {
        match t {
            Term::Const(c, args) => {
                if args.is_empty() {
                    out.push_str(c);
                    return;
                }
                if nested {
                    out.push('(');
                }
                out.push_str(c);
                for a in args.iter() {
                    out.push(' ');
                    self.write(a, scope, true, out);
                }
                if nested {
                    out.push(')');
                }
            }
            Term::Var(v) => out.push_str(&(self.var_name)(*v)),
            Term::Eigen(e) => out.push_str(&(self.eigen_name)(*e)),
            Term::Bound(i) => {
                let i = *i as usize;
                if i < scope.len() {
                    out.push_str(&scope[scope.len() - 1 - i]);
                } else {
                    out.push_str(&format!("#{i}"));
                }
            }
            Term::Bind(h, body) => {
                let base: &str = if h.0.is_empty() { "x" } else { &h.0 };
                let used: HashSet<&str> = scope.iter().map(String::as_str).collect();
                let mut fresh = base.to_string();
                let mut n = 1;
                while used.contains(fresh.as_str()) {
                    fresh = format!("{base}{n}");
                    n += 1;
                }
                if nested {
                    out.push('(');
                }
                out.push_str(&fresh);
                out.push_str("\\ ");
                scope.push(fresh);
                self.write(body, scope, false, out);
                scope.pop();
                if nested {
                    out.push(')');
                }
            }
            Term::App(..) => {
                let (head, args) = t.spine();
                if nested {
                    out.push('(');
                }
                self.write(head, scope, true, out);
                for a in args {
                    out.push(' ');
                    self.write(a, scope, true, out);
                }
                if nested {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Printer::default().print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: &str, args: Vec<Term>) -> Term {
        Term::constant(n, args)
    }

    /// Independent named-substitution oracle: converts to a named tree,
    /// substitutes with explicit renaming, converts back.
    mod named {
        use super::super::*;

        #[derive(Clone, Debug, PartialEq)]
        pub enum N {
            C(String, Vec<N>),
            V(String),
            L(String, Box<N>),
        }

        pub fn to_named(t: &Term, scope: &mut Vec<String>, counter: &mut u32) -> N {
            match t {
                Term::Const(c, args) => N::C(
                    c.to_string(),
                    args.iter().map(|a| to_named(a, scope, counter)).collect(),
                ),
                Term::Bound(i) => N::V(scope[scope.len() - 1 - *i as usize].clone()),
                Term::Bind(_, b) => {
                    *counter += 1;
                    let x = format!("v{counter}");
                    scope.push(x.clone());
                    let body = to_named(b, scope, counter);
                    scope.pop();
                    N::L(x, Box::new(body))
                }
                other => panic!("unexpected {other:?}"),
            }
        }

        pub fn subst(t: &N, x: &str, by: &N) -> N {
            match t {
                N::C(c, args) => N::C(c.clone(), args.iter().map(|a| subst(a, x, by)).collect()),
                N::V(y) if y == x => by.clone(),
                N::V(y) => N::V(y.clone()),
                N::L(y, _) if y == x => t.clone(),
                N::L(y, b) => N::L(y.clone(), Box::new(subst(b, x, by))),
            }
        }

        pub fn alpha_eq(a: &N, b: &N, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (N::C(c, xs), N::C(d, ys)) => {
                    c == d
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| alpha_eq(x, y, env))
                }
                (N::V(x), N::V(y)) => match env.iter().rev().find(|(l, r)| l == x || r == y) {
                    Some((l, r)) => l == x && r == y,
                    None => x == y,
                },
                (N::L(x, b1), N::L(y, b2)) => {
                    env.push((x.clone(), y.clone()));
                    let r = alpha_eq(b1, b2, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
    }

    #[test]
    fn substitute_identity_binder() {
        let id = Term::bind("x", Term::Bound(0));
        assert_eq!(substitute(&id, &Term::atom("z")).unwrap(), Term::atom("z"));
    }

    #[test]
    fn substitute_single_occurrence() {
        let b = Term::bind("x", c("succ", vec![Term::Bound(0)]));
        assert_eq!(
            substitute(&b, &Term::atom("z")).unwrap(),
            c("succ", vec![Term::atom("z")])
        );
    }

    #[test]
    fn substitute_under_inner_binder_matches_named_oracle() {
        // x\ abs T (y\ app x y)  applied to v
        let body = Term::bind(
            "x",
            c(
                "abs",
                vec![
                    Term::atom("bool"),
                    Term::bind("y", c("app", vec![Term::Bound(1), Term::Bound(0)])),
                ],
            ),
        );
        let got = substitute(&body, &Term::atom("v")).unwrap();
        let expected = c(
            "abs",
            vec![
                Term::atom("bool"),
                Term::bind("y", c("app", vec![Term::atom("v"), Term::Bound(0)])),
            ],
        );
        assert_eq!(got, expected);

        let mut counter = 0;
        let named_body = named::to_named(&body, &mut Vec::new(), &mut counter);
        let named::N::L(x, inner) = named_body else { panic!() };
        let oracle = named::subst(&inner, &x, &named::N::C("v".into(), vec![]));
        let named_got = named::to_named(&got, &mut Vec::new(), &mut counter);
        assert!(named::alpha_eq(&oracle, &named_got, &mut Vec::new()));
    }

    #[test]
    fn substitute_rejects_non_binder() {
        assert_eq!(
            substitute(&Term::atom("z"), &Term::atom("z")),
            Err(SubstError::NotABinder)
        );
    }

    #[test]
    fn alpha_equivalent_binders_are_equal() {
        let a = Term::bind("x", Term::Bound(0));
        let b = Term::bind("y", Term::Bound(0));
        assert_eq!(a, b);
    }

    #[test]
    fn abstract_then_open_roundtrips() {
        let t = c("app", vec![Term::Eigen(3), Term::Eigen(7)]);
        let body = t.abstract_eigens(&[3, 7]);
        assert_eq!(body, c("app", vec![Term::Bound(1), Term::Bound(0)]));
        let lam = Term::bind("a", Term::bind("b", body));
        let Term::Bind(_, inner) = &lam else { unreachable!() };
        let once = inner.open(&Term::Eigen(3));
        let Term::Bind(_, inner2) = &once else { unreachable!() };
        assert_eq!(inner2.open(&Term::Eigen(7)), t);
    }

    #[test]
    fn printer_renames_shadowed_binders() {
        let t = Term::bind("x", Term::bind("x", c("app", vec![Term::Bound(1), Term::Bound(0)])));
        assert_eq!(t.to_string(), "x\\ x1\\ app x x1");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn closed_term(depth: u32) -> impl Strategy<Value = Term> {
            let leaf = prop_oneof![Just(Term::atom("z")), Just(Term::atom("tt"))];
            leaf.prop_recursive(depth, 24, 2, |inner| {
                prop_oneof![
                    inner.clone().prop_map(|a| Term::constant("succ", vec![a])),
                    (inner.clone(), inner).prop_map(|(a, b)| Term::constant("app", vec![a, b])),
                ]
            })
        }

        proptest! {
            // Substituting for two distinct binders commutes when the
            // substituted terms are closed.
            #[test]
            fn substitution_commutes_on_independent_variables(
                a in closed_term(3), b in closed_term(3), pick in 0u8..4
            ) {
                let body = match pick {
                    0 => Term::constant("app", vec![Term::Bound(0), Term::Bound(1)]),
                    1 => Term::constant("succ", vec![Term::Bound(1)]),
                    2 => Term::constant("app", vec![Term::Bound(0), Term::atom("z")]),
                    _ => Term::constant("app", vec![Term::Bound(1), Term::bind("w", Term::Bound(1))]),
                };
                // body sits under binders y (index 1) and x (index 0)
                let x_first = body.open_at(0, &a).open_at(0, &b);
                let y_first = body.open_at(1, &b).open_at(0, &a);
                prop_assert_eq!(x_first, y_first);
            }
        }
    }
}
