//! Binding store and higher-order pattern unification.
//!
//! Variables and eigen constants carry stamps from a shared clock. A
//! variable may only be instantiated with terms whose eigens are older than
//! (or as old as) the variable itself; binding lowers the stamps of the
//! variables it captures so the restriction propagates.

use std::cell::RefCell;
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::sync::Arc;

use crate::ir::{Hint, Term};

#[derive(Clone, Debug)]
enum TrailEntry {
    Bind(u32),
    Stamp(u32, u32),
    Deferred(Vec<(Term, Term)>),
}

/// Snapshot for backtracking.
#[derive(Clone, Copy, Debug)]
pub struct Mark {
    trail: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Store {
    bindings: Vec<Option<Term>>,
    var_stamp: Vec<u32>,
    eigen_stamp: Vec<u32>,
    clock: u32,
    trail: Vec<TrailEntry>,
    /// Flex equations outside the pattern fragment, retried later.
    deferred: Vec<(Term, Term)>,
    /// Argument lists known to be closed: no variables, eigens,
    /// applications or loose indices. Keyed by address; holding the `Arc`
    /// keeps the address from being reused.
    closed: RefCell<HashMap<usize, Arc<[Term]>, BuildHasherDefault<AddrHasher>>>,
}

/// Hasher for addresses.
#[derive(Default)]
struct AddrHasher(u64);

impl Hasher for AddrHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 = (self.0 << 8 | u64::from(*b)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }

    fn write_usize(&mut self, n: usize) {
        self.0 = (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
}

/// Cheap identity test: same constructor over the same shared children.
fn same(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Const(c, xs), Term::Const(d, ys)) => c == d && Arc::ptr_eq(xs, ys),
        (Term::Bind(_, x), Term::Bind(_, y)) => Arc::ptr_eq(x, y),
        (Term::App(f, x), Term::App(g, y)) => Arc::ptr_eq(f, g) && Arc::ptr_eq(x, y),
        _ => a == b && !matches!(a, Term::Const(..) | Term::Bind(..) | Term::App(..)),
    }
}

/// Rebuilds `args` only if `f` changes one of them.
fn map_args(args: &Arc<[Term]>, mut f: impl FnMut(&Term) -> Option<Term>) -> Option<Arc<[Term]>> {
    let mut changed: Option<Vec<Term>> = None;
    for (i, a) in args.iter().enumerate() {
        match (f(a), changed.as_mut()) {
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
    changed.map(Into::into)
}

/// Lifts loose `Bound` indices by `n`.
fn lift(t: &Term, n: u32) -> Term {
    if n == 0 {
        return t.clone();
    }
    t.map_leaves(&mut |l, d| match l {
        Term::Bound(i) if *i >= d => Some(Term::Bound(i + n)),
        _ => None,
    })
}

enum Prune {
    Ok(Term),
    Fail,
    Defer,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_var(&mut self) -> Term {
        self.bindings.push(None);
        self.var_stamp.push(self.clock);
        Term::Var(self.bindings.len() as u32 - 1)
    }

    /// Allocates `n` consecutive variables, returning the first index.
    pub fn fresh_vars(&mut self, n: usize) -> u32 {
        let base = self.bindings.len() as u32;
        for _ in 0..n {
            self.fresh_var();
        }
        base
    }

    pub fn fresh_eigen(&mut self) -> Term {
        self.clock += 1;
        self.eigen_stamp.push(self.clock);
        Term::Eigen(self.eigen_stamp.len() as u32 - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.bindings.len()
    }

    pub fn binding(&self, v: u32) -> Option<&Term> {
        self.bindings.get(v as usize).and_then(Option::as_ref)
    }

    pub fn has_deferred(&self) -> bool {
        !self.deferred.is_empty()
    }

    pub fn mark(&self) -> Mark {
        Mark {
            trail: self.trail.len(),
        }
    }

    pub fn undo(&mut self, m: Mark) {
        while self.trail.len() > m.trail {
            match self.trail.pop().expect("trail entry") {
                TrailEntry::Bind(v) => self.bindings[v as usize] = None,
                TrailEntry::Stamp(v, old) => self.var_stamp[v as usize] = old,
                TrailEntry::Deferred(old) => self.deferred = old,
            }
        }
    }

    fn bind(&mut self, v: u32, t: Term) {
        debug_assert!(self.bindings[v as usize].is_none());
        self.bindings[v as usize] = Some(t);
        self.trail.push(TrailEntry::Bind(v));
    }

    fn lower_stamp(&mut self, v: u32, to: u32) {
        let old = self.var_stamp[v as usize];
        if to < old {
            self.var_stamp[v as usize] = to;
            self.trail.push(TrailEntry::Stamp(v, old));
        }
    }

    fn defer(&mut self, a: Term, b: Term) {
        let old = self.deferred.clone();
        self.trail.push(TrailEntry::Deferred(old));
        self.deferred.push((a, b));
    }

    fn eigen_visible(&self, e: u32, v: u32) -> bool {
        self.eigen_stamp
            .get(e as usize)
            .is_none_or(|s| *s <= self.var_stamp[v as usize])
    }

    /// Dereferences the head and beta-reduces until the head is rigid or an
    /// unbound variable.
    pub fn whnf(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.binding(*v) {
                Some(b) => self.whnf(b),
                None => t.clone(),
            },
            Term::App(h, a) => match self.whnf(h) {
                Term::Bind(_, body) => self.whnf(&self.beta(&body, a)),
                h2 => Term::App(Arc::new(h2), a.clone()),
            },
            _ => t.clone(),
        }
    }

    /// Fully instantiates and beta-normalizes.
    pub fn resolve(&self, t: &Term) -> Term {
        self.resolve_opt(t).unwrap_or_else(|| t.clone())
    }

    /// `None` when `t` is already resolved.
    fn resolve_opt(&self, t: &Term) -> Option<Term> {
        match t {
            Term::Var(v) => self.binding(*v).map(|b| self.resolve(b)),
            Term::Const(c, args) => {
                if args.is_empty() || self.known_closed(args) {
                    return None;
                }
                map_args(args, |a| self.resolve_opt(a)).map(|n| Term::Const(c.clone(), n))
            }
            Term::Bind(h, b) => self.resolve_opt(b).map(|n| Term::Bind(h.clone(), Arc::new(n))),
            Term::App(..) => Some(match self.whnf(t) {
                Term::App(h, a) => Term::App(Arc::new(self.resolve(&h)), Arc::new(self.resolve(&a))),
                other => self.resolve(&other),
            }),
            Term::Eigen(_) | Term::Bound(_) => None,
        }
    }

    /// Head and argument spine after `whnf`.
    fn flex_head(&self, t: &Term) -> Option<(u32, Vec<Term>)> {
        let (h, args) = t.spine();
        match h {
            Term::Var(v) if self.binding(*v).is_none() => {
                Some((*v, args.into_iter().map(|a| self.whnf(a)).collect()))
            }
            _ => None,
        }
    }

    /// Eigen arguments of a pattern, or `None` if `args` leave the
    /// fragment: not distinct eigens, or eigens already visible to `v`.
    fn pattern_args(&self, v: u32, args: &[Term]) -> Option<Vec<u32>> {
        let mut out = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Term::Eigen(e) if !out.contains(e) && !self.eigen_visible(*e, v) => out.push(*e),
                _ => return None,
            }
        }
        Some(out)
    }

    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.whnf(a);
        let b = self.whnf(b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Eigen(x), Term::Eigen(y)) => x == y,
            (Term::Bound(x), Term::Bound(y)) => x == y,
            (Term::Const(c, xs), Term::Const(d, ys)) => {
                c == d && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, y))
            }
            // A bare variable is bound as is, without eta-expanding the
            // other side.
            (Term::Var(_), _) | (_, Term::Var(_)) => self.unify_flex(a, b),
            (Term::Bind(_, x), Term::Bind(_, y)) => {
                let e = self.fresh_eigen();
                self.unify(&x.open(&e), &y.open(&e))
            }
            (Term::Bind(_, x), other) | (other, Term::Bind(_, x)) => {
                let e = self.fresh_eigen();
                let lhs = x.open(&e);
                let rhs = Term::app(other.clone(), e);
                self.unify(&lhs, &rhs)
            }
            _ => self.unify_flex(a, b),
        }
    }

    fn unify_flex(&mut self, a: Term, b: Term) -> bool {
        let fa = self.flex_head(&a);
        let fb = self.flex_head(&b);
        match (fa, fb) {
            (Some((x, xs)), Some((y, ys))) => self.flex_flex(x, xs, y, ys, a, b),
            (Some((x, xs)), None) => self.flex_rigid(x, &xs, &b, &a),
            (None, Some((y, ys))) => self.flex_rigid(y, &ys, &a, &b),
            (None, None) => self.rigid_rigid(&a, &b),
        }
    }

    fn rigid_rigid(&mut self, a: &Term, b: &Term) -> bool {
        let (ha, xs) = a.spine();
        let (hb, ys) = b.spine();
        if xs.is_empty() || xs.len() != ys.len() {
            return false;
        }
        let heads_agree = match (ha, hb) {
            (Term::Eigen(x), Term::Eigen(y)) => x == y,
            (Term::Bound(x), Term::Bound(y)) => x == y,
            _ => false,
        };
        heads_agree && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
    }

    fn flex_rigid(&mut self, v: u32, args: &[Term], rigid: &Term, whole: &Term) -> bool {
        let Some(eigens) = self.pattern_args(v, args) else {
            self.defer(whole.clone(), rigid.clone());
            return true;
        };
        let rigid = self.resolve(rigid);
        let pruned = if self.is_closed(&rigid) {
            Prune::Ok(rigid.clone())
        } else {
            self.prune(v, &eigens, &rigid)
        };
        match pruned {
            Prune::Ok(body) => {
                let mut t = if eigens.is_empty() { body } else { body.abstract_eigens(&eigens) };
                for _ in &eigens {
                    t = Term::Bind(Hint::new("x"), Arc::new(t));
                }
                self.bind(v, t);
                true
            }
            Prune::Fail => false,
            Prune::Defer => {
                self.defer(whole.clone(), rigid);
                true
            }
        }
    }

    fn flex_flex(&mut self, x: u32, xs: Vec<Term>, y: u32, ys: Vec<Term>, a: Term, b: Term) -> bool {
        if xs.is_empty() {
            return self.flex_rigid(x, &xs, &b, &a);
        }
        if ys.is_empty() {
            return self.flex_rigid(y, &ys, &a, &b);
        }
        let (Some(ex), Some(ey)) = (self.pattern_args(x, &xs), self.pattern_args(y, &ys)) else {
            self.defer(a, b);
            return true;
        };
        let stamp = self.var_stamp[x as usize].min(self.var_stamp[y as usize]);
        let common: Vec<u32> = ex.iter().copied().filter(|e| ey.contains(e)).collect();
        let z = self.fresh_var();
        let Term::Var(zi) = z else { unreachable!() };
        self.lower_stamp(zi, stamp);
        let mut zapp = z;
        for e in &common {
            zapp = Term::app(zapp, Term::Eigen(*e));
        }
        let close = |eigens: &[u32]| {
            let mut t = zapp.abstract_eigens(eigens);
            for _ in eigens {
                t = Term::Bind(Hint::new("x"), Arc::new(t));
            }
            t
        };
        let tx = close(&ex);
        self.bind(x, tx);
        if x == y {
            return true;
        }
        let ty = close(&ey);
        self.bind(y, ty);
        true
    }

    /// Whether `t` has no variables, eigens, applications or loose
    /// indices. Such terms are their own resolution and need no pruning.
    pub fn is_closed(&self, t: &Term) -> bool {
        self.closed_at(t, 0)
    }

    fn known_closed(&self, args: &Arc<[Term]>) -> bool {
        self.closed.borrow().contains_key(&(args.as_ptr() as *const u8 as usize))
    }

    fn closed_at(&self, t: &Term, depth: u32) -> bool {
        match t {
            Term::Const(_, args) => {
                if args.is_empty() || self.known_closed(args) {
                    return true;
                }
                let key = args.as_ptr() as *const u8 as usize;
                let ok = args.iter().all(|a| self.closed_at(a, depth));
                if ok && depth == 0 {
                    self.closed.borrow_mut().insert(key, args.clone());
                }
                ok
            }
            Term::Bind(_, b) => self.closed_at(b, depth + 1),
            Term::Bound(i) => *i < depth,
            Term::Var(_) | Term::Eigen(_) | Term::App(..) => false,
        }
    }

    /// `body[arg/0]` where `arg` may itself contain loose indices.
    fn beta(&self, body: &Term, arg: &Term) -> Term {
        let closed = self.is_closed(arg);
        body.map_leaves(&mut |l, d| match l {
            Term::Bound(i) if *i == d => Some(if closed { arg.clone() } else { lift(arg, d) }),
            Term::Bound(i) if *i > d => Some(Term::Bound(i - 1)),
            _ => None,
        })
    }

    /// Checks that `t` may become the body of `v`'s solution abstracted
    /// over `eigens`, raising or pruning captured variables as needed.
    fn prune(&mut self, v: u32, eigens: &[u32], t: &Term) -> Prune {
        match t {
            Term::Const(_, args) if args.is_empty() || self.known_closed(args) => Prune::Ok(t.clone()),
            Term::Eigen(e) => {
                if eigens.contains(e) || self.eigen_visible(*e, v) {
                    Prune::Ok(t.clone())
                } else {
                    Prune::Fail
                }
            }
            Term::Bound(_) => Prune::Ok(t.clone()),
            Term::Var(y) => {
                let y = *y;
                if y == v {
                    return Prune::Fail;
                }
                let stamp = self.var_stamp[v as usize];
                if self.var_stamp[y as usize] <= stamp {
                    return Prune::Ok(t.clone());
                }
                // `y` may see some of the abstracted eigens: raise it over
                // exactly those.
                let seen: Vec<u32> = eigens
                    .iter()
                    .copied()
                    .filter(|e| self.eigen_visible(*e, y))
                    .collect();
                if seen.is_empty() {
                    self.lower_stamp(y, stamp);
                    return Prune::Ok(t.clone());
                }
                let fresh = self.fresh_var();
                let Term::Var(fi) = fresh else { unreachable!() };
                self.lower_stamp(fi, stamp);
                let mut raised = fresh;
                for e in &seen {
                    raised = Term::app(raised, Term::Eigen(*e));
                }
                self.bind(y, raised.clone());
                Prune::Ok(raised)
            }
            Term::Const(c, args) => {
                let mut out = Vec::with_capacity(args.len());
                let mut changed = false;
                for a in args.iter() {
                    match self.prune(v, eigens, a) {
                        Prune::Ok(x) => {
                            changed |= !same(&x, a);
                            out.push(x);
                        }
                        other => return other,
                    }
                }
                if changed {
                    Prune::Ok(Term::Const(c.clone(), out.into()))
                } else {
                    Prune::Ok(t.clone())
                }
            }
            Term::Bind(h, b) => match self.prune(v, eigens, b) {
                Prune::Ok(x) if same(&x, b) => Prune::Ok(t.clone()),
                Prune::Ok(x) => Prune::Ok(Term::Bind(h.clone(), Arc::new(x))),
                other => other,
            },
            Term::App(..) => {
                let (head, args) = t.spine();
                if let Term::Var(y) = head {
                    if *y == v {
                        return Prune::Fail;
                    }
                    if self.var_stamp[*y as usize] > self.var_stamp[v as usize] {
                        return Prune::Defer;
                    }
                }
                let head = match head {
                    Term::Var(_) => head.clone(),
                    other => match self.prune(v, eigens, other) {
                        Prune::Ok(x) => x,
                        r => return r,
                    },
                };
                let mut acc = head;
                for a in args {
                    match self.prune(v, eigens, a) {
                        Prune::Ok(x) => acc = Term::app(acc, x),
                        other => return other,
                    }
                }
                Prune::Ok(acc)
            }
        }
    }

    /// Retries deferred equations. Returns false if one became unsolvable.
    pub fn flush(&mut self) -> bool {
        if self.deferred.is_empty() {
            return true;
        }
        let pending = std::mem::take(&mut self.deferred);
        self.trail.push(TrailEntry::Deferred(pending.clone()));
        for (a, b) in pending {
            let (ra, rb) = (self.resolve(&a), self.resolve(&b));
            if ra == rb {
                continue;
            }
            if !self.unify(&ra, &rb) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: &str, args: Vec<Term>) -> Term {
        Term::constant(n, args)
    }

    #[test]
    fn first_order_binding_and_undo() {
        let mut s = Store::new();
        let x = s.fresh_var();
        let m = s.mark();
        assert!(s.unify(&x, &c("succ", vec![Term::atom("z")])));
        assert_eq!(s.resolve(&x).to_string(), "succ z");
        s.undo(m);
        assert_eq!(s.resolve(&x), x);
    }

    #[test]
    fn occurs_check() {
        let mut s = Store::new();
        let x = s.fresh_var();
        assert!(!s.unify(&x, &c("succ", vec![x.clone()])));
    }

    #[test]
    fn pattern_solution_abstracts_eigen() {
        let mut s = Store::new();
        let r = s.fresh_var();
        let e = s.fresh_eigen();
        let lhs = Term::app(r.clone(), e.clone());
        assert!(s.unify(&lhs, &c("succ", vec![e.clone()])));
        let sol = s.resolve(&r);
        assert_eq!(sol, Term::bind("x", c("succ", vec![Term::Bound(0)])));
        assert_eq!(s.resolve(&Term::app(r, Term::atom("z"))).to_string(), "succ z");
    }

    #[test]
    fn eigen_escape_is_rejected() {
        let mut s = Store::new();
        let x = s.fresh_var();
        let e = s.fresh_eigen();
        assert!(!s.unify(&x, &e));
        let y = s.fresh_var();
        assert!(s.unify(&y, &e));
    }

    #[test]
    fn raising_keeps_newer_variables_general() {
        let mut s = Store::new();
        let r = s.fresh_var();
        let e = s.fresh_eigen();
        let a = s.fresh_var();
        let b = s.fresh_var();
        assert!(s.unify(&Term::app(r.clone(), e.clone()), &c("app", vec![a.clone(), b.clone()])));
        // `a` may still be instantiated with the eigen.
        assert!(s.unify(&a, &e));
        let lhs = s.resolve(&Term::app(r, e.clone()));
        let rhs = s.resolve(&c("app", vec![a, b]));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn binders_unify_up_to_alpha() {
        let mut s = Store::new();
        let a = Term::bind("x", c("succ", vec![Term::Bound(0)]));
        let b = Term::bind("y", c("succ", vec![Term::Bound(0)]));
        assert!(s.unify(&a, &b));
        let x = s.fresh_var();
        assert!(s.unify(&Term::bind("x", Term::app(x.clone(), Term::Bound(0))), &a));
        assert_eq!(s.resolve(&x), a);
    }

    #[test]
    fn non_pattern_is_deferred_then_solved() {
        let mut s = Store::new();
        let r = s.fresh_var();
        let x = s.fresh_var();
        let lhs = Term::app(r.clone(), x.clone());
        assert!(s.unify(&lhs, &Term::atom("z")));
        assert!(s.has_deferred());
        assert!(s.unify(&r, &Term::bind("y", Term::Bound(0))));
        assert!(s.flush());
        assert_eq!(s.resolve(&x).to_string(), "z");
    }
}
