//! Concrete syntax tree of a specification file.

use crate::ir::{Kind, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpec {
    pub path: String,
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Decl(Decl),
    Clause(Clause),
    Context(Directive),
    ErrorContext(ErrDirective),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub kind: Kind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Prem>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prem {
    Atom(Atom),
    Pi(String, Box<Prem>, Span),
    Imp(Box<Prem>, Box<Prem>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<STerm>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum STerm {
    /// Lowercase identifier: a constant or a bound variable.
    Name(String, Span),
    /// Meta-variable.
    Var(String, Span),
    /// Head applied to one or more arguments.
    App(Box<STerm>, Vec<STerm>),
    Bind(String, Box<STerm>, Span),
}

impl STerm {
    pub fn span(&self) -> Span {
        match self {
            STerm::Name(_, s) | STerm::Var(_, s) | STerm::Bind(_, _, s) => *s,
            STerm::App(h, _) => h.span(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// `E`: the hole.
    Hole,
    /// `v`: must be a value first.
    Value,
    /// `e`: unconstrained.
    Any,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Directive {
    pub op: String,
    pub slots: Vec<Slot>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrDirective {
    None(Span),
    Entry(Directive),
}
