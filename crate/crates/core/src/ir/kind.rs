//! Simple kinds and the signature of declared constants.

use std::collections::BTreeMap;
use std::fmt;

use super::term::{Name, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Exp,
    Typ,
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::Exp => "exp",
            Base::Typ => "typ",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Base(Base),
    Arrow(Box<Kind>, Box<Kind>),
}

impl Kind {
    pub const EXP: Kind = Kind::Base(Base::Exp);
    pub const TYP: Kind = Kind::Base(Base::Typ);

    pub fn arrow(from: Kind, to: Kind) -> Kind {
        Kind::Arrow(Box::new(from), Box::new(to))
    }

    /// Builds `a1 -> ... -> an -> result`.
    pub fn chain(args: Vec<Kind>, result: Kind) -> Kind {
        args.into_iter()
            .rev()
            .fold(result, |acc, a| Kind::arrow(a, acc))
    }

    pub fn args(&self) -> Vec<&Kind> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Kind::Arrow(a, r) = cur {
            out.push(&**a);
            cur = r;
        }
        out
    }

    pub fn result(&self) -> Base {
        match self {
            Kind::Base(b) => *b,
            Kind::Arrow(_, r) => r.result(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Kind::Base(_) => 0,
            Kind::Arrow(_, r) => 1 + r.arity(),
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Kind::Base(_))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Base(b) => write!(f, "{b}"),
            Kind::Arrow(a, r) => {
                if a.is_base() {
                    write!(f, "{a} -> {r}")
                } else {
                    write!(f, "({a}) -> {r}")
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstDecl {
    pub kind: Kind,
    /// Declaration order, used for deterministic listings.
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KindError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(Name),
    #[error("`{name}` expects {expected} arguments but is given {found}")]
    ArityMismatch {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("expected a term of kind {expected} but found {found}")]
    KindMismatch { expected: Kind, found: Kind },
    #[error("constant `{0}` is declared twice")]
    Duplicate(Name),
    #[error("constant `{0}` must produce exp or typ")]
    BadResult(Name),
}

/// Declared constants, split by result kind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    consts: BTreeMap<Name, ConstDecl>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: Name, kind: Kind) -> Result<(), KindError> {
        if self.consts.contains_key(&name) {
            return Err(KindError::Duplicate(name));
        }
        let order = self.consts.len();
        self.consts.insert(name, ConstDecl { kind, order });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ConstDecl> {
        self.consts.get(name)
    }

    pub fn kind(&self, name: &str) -> Option<&Kind> {
        self.consts.get(name).map(|d| &d.kind)
    }

    pub fn is_exp(&self, name: &str) -> bool {
        self.kind(name).is_some_and(|k| k.result() == Base::Exp)
    }

    pub fn is_typ(&self, name: &str) -> bool {
        self.kind(name).is_some_and(|k| k.result() == Base::Typ)
    }

    fn ordered(&self, base: Base) -> Vec<(&Name, &Kind)> {
        let mut v: Vec<_> = self
            .consts
            .iter()
            .filter(|(_, d)| d.kind.result() == base)
            .collect();
        v.sort_by_key(|(_, d)| d.order);
        v.into_iter().map(|(n, d)| (n, &d.kind)).collect()
    }

    /// Expression constants in declaration order.
    pub fn exp_constants(&self) -> Vec<(&Name, &Kind)> {
        self.ordered(Base::Exp)
    }

    /// Type constants in declaration order.
    pub fn typ_constants(&self) -> Vec<(&Name, &Kind)> {
        self.ordered(Base::Typ)
    }

    /// Argument positions (0-based, over all arguments) that hold
    /// expressions, i.e. whose kind produces `exp`. The i-th entry is the
    /// position of EXP argument i+1.
    pub fn exp_positions(&self, op: &str) -> Vec<usize> {
        self.kind(op)
            .map(|k| {
                k.args()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.result() == Base::Exp)
                    .map(|(i, _)| i)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn annotation_positions(&self, op: &str) -> Vec<usize> {
        self.kind(op)
            .map(|k| {
                k.args()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.result() == Base::Typ)
                    .map(|(i, _)| i)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn exp_arity(&self, op: &str) -> usize {
        self.exp_positions(op).len()
    }

    /// Kind of the EXP argument with 1-based index `i`.
    pub fn exp_arg_kind(&self, op: &str, i: u32) -> Option<Kind> {
        let pos = *self.exp_positions(op).get((i as usize).checked_sub(1)?)?;
        self.kind(op).map(|k| k.args()[pos].clone())
    }

    /// True when every annotation argument precedes every EXP argument.
    pub fn annotations_first(&self, op: &str) -> bool {
        let Some(k) = self.kind(op) else { return true };
        let mut seen_exp = false;
        for a in k.args() {
            match a.result() {
                Base::Exp => seen_exp = true,
                Base::Typ if seen_exp => return false,
                Base::Typ => {}
            }
        }
        true
    }

    /// Kind of a term whose variables and eigen constants have the kinds
    /// given by `leaf` and whose loose bound indices have the kinds in
    /// `bound` (innermost last).
    pub fn kind_of(
        &self,
        t: &Term,
        leaf: &dyn Fn(&Term) -> Option<Kind>,
        bound: &mut Vec<Kind>,
    ) -> Result<Kind, KindError> {
        match t {
            Term::Const(c, args) => {
                let k = self
                    .kind(c)
                    .ok_or_else(|| KindError::UnknownConstant(c.clone()))?;
                let params = k.args();
                if params.len() != args.len() {
                    return Err(KindError::ArityMismatch {
                        name: c.clone(),
                        expected: params.len(),
                        found: args.len(),
                    });
                }
                for (p, a) in params.iter().zip(args.iter()) {
                    let ak = self.check_arg(a, p, leaf, bound)?;
                    if &ak != *p {
                        return Err(KindError::KindMismatch {
                            expected: (*p).clone(),
                            found: ak,
                        });
                    }
                }
                Ok(Kind::Base(k.result()))
            }
            Term::Var(_) | Term::Eigen(_) => {
                leaf(t).ok_or_else(|| KindError::UnknownConstant(t.to_string().into()))
            }
            Term::Bound(i) => bound
                .iter()
                .rev()
                .nth(*i as usize)
                .cloned()
                .ok_or_else(|| KindError::UnknownConstant(format!("#{i}").into())),
            Term::Bind(_, _) => Err(KindError::KindMismatch {
                expected: Kind::EXP,
                found: Kind::arrow(Kind::EXP, Kind::EXP),
            }),
            Term::App(h, a) => {
                let hk = self.kind_of(h, leaf, bound)?;
                let ak = self.kind_of(a, leaf, bound)?;
                match hk {
                    Kind::Arrow(from, to) if *from == ak => Ok(*to),
                    Kind::Arrow(from, _) => Err(KindError::KindMismatch {
                        expected: *from,
                        found: ak,
                    }),
                    other => Err(KindError::KindMismatch {
                        expected: Kind::arrow(ak, Kind::EXP),
                        found: other,
                    }),
                }
            }
        }
    }

    /// Infers the kind of `a`, using the expected kind to type the bound
    /// variables of binders.
    fn check_arg(
        &self,
        a: &Term,
        expected: &Kind,
        leaf: &dyn Fn(&Term) -> Option<Kind>,
        bound: &mut Vec<Kind>,
    ) -> Result<Kind, KindError> {
        match (a, expected) {
            (Term::Bind(_, body), Kind::Arrow(from, to)) => {
                bound.push((**from).clone());
                let r = self.check_arg(body, to, leaf, bound);
                bound.pop();
                Ok(Kind::arrow((**from).clone(), r?))
            }
            _ => self.kind_of(a, leaf, bound),
        }
    }

    /// Kind of a closed term built from constants only.
    pub fn kind_of_closed(&self, t: &Term) -> Result<Kind, KindError> {
        self.kind_of(t, &|_| None, &mut Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::term::name;

    fn stlc() -> Signature {
        let mut s = Signature::new();
        s.declare(name("arrow"), Kind::chain(vec![Kind::TYP, Kind::TYP], Kind::TYP))
            .unwrap();
        s.declare(name("bool"), Kind::TYP).unwrap();
        s.declare(
            name("abs"),
            Kind::chain(vec![Kind::TYP, Kind::arrow(Kind::EXP, Kind::EXP)], Kind::EXP),
        )
        .unwrap();
        s.declare(name("app"), Kind::chain(vec![Kind::EXP, Kind::EXP], Kind::EXP))
            .unwrap();
        s.declare(name("tt"), Kind::EXP).unwrap();
        s
    }

    #[test]
    fn application_of_abstraction_is_exp() {
        let s = stlc();
        let t = Term::constant(
            "app",
            vec![
                Term::constant("abs", vec![Term::Var(0), Term::Var(1)]),
                Term::Var(2),
            ],
        );
        let kinds = |t: &Term| match t {
            Term::Var(0) => Some(Kind::TYP),
            Term::Var(1) => Some(Kind::arrow(Kind::EXP, Kind::EXP)),
            _ => Some(Kind::EXP),
        };
        assert_eq!(s.kind_of(&t, &kinds, &mut Vec::new()), Ok(Kind::EXP));
    }

    #[test]
    fn arrow_type_is_typ() {
        let s = stlc();
        let t = Term::constant("arrow", vec![Term::atom("bool"), Term::atom("bool")]);
        assert_eq!(s.kind_of_closed(&t), Ok(Kind::TYP));
    }

    #[test]
    fn app_of_arrows_is_kind_mismatch() {
        let s = stlc();
        let arrow = Term::constant("arrow", vec![Term::atom("bool"), Term::atom("bool")]);
        let t = Term::constant("app", vec![arrow.clone(), arrow]);
        assert!(matches!(
            s.kind_of_closed(&t),
            Err(KindError::KindMismatch { .. })
        ));
    }

    #[test]
    fn unknown_and_arity_errors() {
        let s = stlc();
        assert!(matches!(
            s.kind_of_closed(&Term::atom("nope")),
            Err(KindError::UnknownConstant(_))
        ));
        assert!(matches!(
            s.kind_of_closed(&Term::constant("app", vec![Term::atom("tt")])),
            Err(KindError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn exp_positions_skip_annotations() {
        let s = stlc();
        assert_eq!(s.exp_positions("abs"), vec![1]);
        assert_eq!(s.exp_arity("app"), 2);
        assert!(s.annotations_first("abs"));
    }

    #[test]
    fn kinding_is_deterministic() {
        let s = stlc();
        let t = Term::constant("arrow", vec![Term::atom("bool"), Term::atom("bool")]);
        assert_eq!(s.kind_of_closed(&t), s.kind_of_closed(&t.clone()));
    }
}
