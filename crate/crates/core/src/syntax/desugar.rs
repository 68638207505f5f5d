//! Turns a [`SourceSpec`] into a kinded [`TypedLanguage`].
//!
//! Meta-variables whose name starts with `V` become value variables and
//! contribute an explicit `value V` premise. Kinds of meta-variables and of
//! `pi`-bound variables are inferred by unification over kind terms.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::ast::*;
use crate::diag::{Code, Diagnostic};
use crate::ir::lang::stepstar_rules;
use crate::ir::{
    name, Base, ContextSummary, ErrCtxDecl, Flavor, Formula, Hint, Kind, Pred, RoleEnv, Rule,
    Signature, Span, Term, TypRole, TypedLanguage, VarInfo,
};

#[derive(Clone, Debug, PartialEq, Eq)]
enum KTerm {
    Var(usize),
    Base(Base),
    Arrow(Box<KTerm>, Box<KTerm>),
}

impl KTerm {
    fn from_kind(k: &Kind) -> KTerm {
        match k {
            Kind::Base(b) => KTerm::Base(*b),
            Kind::Arrow(a, r) => KTerm::Arrow(Box::new(KTerm::from_kind(a)), Box::new(KTerm::from_kind(r))),
        }
    }
}

#[derive(Default)]
struct KindInfer {
    subst: Vec<Option<KTerm>>,
}

impl KindInfer {
    fn fresh(&mut self) -> KTerm {
        self.subst.push(None);
        KTerm::Var(self.subst.len() - 1)
    }

    fn walk(&self, k: &KTerm) -> KTerm {
        match k {
            KTerm::Var(v) => match &self.subst[*v] {
                Some(t) => self.walk(t),
                None => k.clone(),
            },
            other => other.clone(),
        }
    }

    fn occurs(&self, v: usize, k: &KTerm) -> bool {
        match self.walk(k) {
            KTerm::Var(w) => v == w,
            KTerm::Base(_) => false,
            KTerm::Arrow(a, r) => self.occurs(v, &a) || self.occurs(v, &r),
        }
    }

    fn unify(&mut self, a: &KTerm, b: &KTerm) -> bool {
        let (a, b) = (self.walk(a), self.walk(b));
        match (a, b) {
            (KTerm::Var(x), KTerm::Var(y)) if x == y => true,
            (KTerm::Var(x), t) | (t, KTerm::Var(x)) => {
                if self.occurs(x, &t) {
                    return false;
                }
                self.subst[x] = Some(t);
                true
            }
            (KTerm::Base(x), KTerm::Base(y)) => x == y,
            (KTerm::Arrow(a1, r1), KTerm::Arrow(a2, r2)) => {
                self.unify(&a1, &a2) && self.unify(&r1, &r2)
            }
            _ => false,
        }
    }

    /// Resolves to a kind, defaulting unconstrained parts to `exp`.
    fn resolve(&self, k: &KTerm) -> Kind {
        match self.walk(k) {
            KTerm::Var(_) => Kind::EXP,
            KTerm::Base(b) => Kind::Base(b),
            KTerm::Arrow(a, r) => Kind::arrow(self.resolve(&a), self.resolve(&r)),
        }
    }

    fn show(&self, k: &KTerm) -> String {
        match self.walk(k) {
            KTerm::Var(_) => "?".into(),
            KTerm::Base(b) => b.to_string(),
            KTerm::Arrow(a, r) => format!("({} -> {})", self.show(&a), self.show(&r)),
        }
    }
}

/// Per-clause conversion state.
struct ClauseCx<'a> {
    sig: &'a Signature,
    vars: Vec<(String, KTerm)>,
    index: HashMap<String, u32>,
    infer: KindInfer,
    errors: Vec<Diagnostic>,
    /// Kinds of `pi` binders, resolved after inference.
    generic_kinds: Vec<KTerm>,
}

fn kind_error(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(Code::E010, msg).at(span)
}

impl<'a> ClauseCx<'a> {
    fn new(sig: &'a Signature) -> Self {
        ClauseCx {
            sig,
            vars: Vec::new(),
            index: HashMap::new(),
            infer: KindInfer::default(),
            errors: Vec::new(),
            generic_kinds: Vec::new(),
        }
    }

    fn var(&mut self, v: &str) -> u32 {
        if v != "_" {
            if let Some(i) = self.index.get(v) {
                return *i;
            }
        }
        let k = self.infer.fresh();
        let i = self.vars.len() as u32;
        let display = if v == "_" { format!("_{i}") } else { v.to_string() };
        self.vars.push((display, k));
        if v != "_" {
            self.index.insert(v.to_string(), i);
        }
        i
    }

    fn var_kind(&self, v: u32) -> KTerm {
        self.vars[v as usize].1.clone()
    }

    /// Converts a term; `scope` holds bound names and their kinds,
    /// innermost last.
    fn term(&mut self, t: &STerm, scope: &mut Vec<(String, KTerm)>) -> Option<(Term, KTerm)> {
        match t {
            STerm::Name(n, span) => self.apply_name(n, *span, &[], scope),
            STerm::Var(v, _) => {
                let i = self.var(v);
                Some((Term::Var(i), self.var_kind(i)))
            }
            STerm::App(h, args) => match &**h {
                STerm::Name(n, span) => self.apply_name(n, *span, args, scope),
                other => {
                    let (mut acc, mut k) = self.term(other, scope)?;
                    for a in args {
                        let (at, ak) = self.term(a, scope)?;
                        let r = self.infer.fresh();
                        let want = KTerm::Arrow(Box::new(ak), Box::new(r.clone()));
                        if !self.infer.unify(&k, &want) {
                            self.errors.push(kind_error(
                                a.span(),
                                format!(
                                    "`{}` of kind {} cannot be applied",
                                    super::pretty::print_term(other, false),
                                    self.infer.show(&k)
                                ),
                            ));
                            return None;
                        }
                        acc = Term::app(acc, at);
                        k = r;
                    }
                    Some((acc, k))
                }
            },
            STerm::Bind(x, body, _) => {
                let kx = self.infer.fresh();
                scope.push((x.clone(), kx.clone()));
                let r = self.term(body, scope);
                scope.pop();
                let (bt, bk) = r?;
                Some((Term::bind(x, bt), KTerm::Arrow(Box::new(kx), Box::new(bk))))
            }
        }
    }

    fn apply_name(
        &mut self,
        n: &str,
        span: Span,
        args: &[STerm],
        scope: &mut Vec<(String, KTerm)>,
    ) -> Option<(Term, KTerm)> {
        if let Some(pos) = scope.iter().rposition(|(x, _)| x == n) {
            let idx = (scope.len() - 1 - pos) as u32;
            let mut acc = Term::Bound(idx);
            let mut k = scope[pos].1.clone();
            for a in args {
                let (at, ak) = self.term(a, scope)?;
                let r = self.infer.fresh();
                let want = KTerm::Arrow(Box::new(ak), Box::new(r.clone()));
                if !self.infer.unify(&k, &want) {
                    self.errors
                        .push(kind_error(span, format!("bound variable `{n}` cannot be applied here")));
                    return None;
                }
                acc = Term::app(acc, at);
                k = r;
            }
            return Some((acc, k));
        }
        let Some(kind) = self.sig.kind(n).cloned() else {
            self.errors
                .push(kind_error(span, format!("unknown constant `{n}`")));
            return None;
        };
        let params = kind.args();
        if params.len() != args.len() {
            self.errors.push(kind_error(
                span,
                format!(
                    "`{n}` expects {} arguments but is given {}",
                    params.len(),
                    args.len()
                ),
            ));
            return None;
        }
        let mut out = Vec::with_capacity(args.len());
        for (p, a) in params.iter().zip(args) {
            let (at, ak) = self.term(a, scope)?;
            let want = KTerm::from_kind(p);
            if !self.infer.unify(&ak, &want) {
                self.errors.push(kind_error(
                    a.span(),
                    format!(
                        "argument `{}` of `{n}` has kind {} but {} is expected",
                        super::pretty::print_term(a, false),
                        self.infer.show(&ak),
                        p
                    ),
                ));
                return None;
            }
            out.push(at);
        }
        Some((Term::Const(name(n), out.into()), KTerm::Base(kind.result())))
    }

    fn atom(&mut self, a: &Atom, scope: &mut Vec<(String, KTerm)>) -> Option<Formula> {
        let pred = Pred::from_surface(&a.pred)?;
        if a.args.len() != pred.arity() {
            self.errors.push(kind_error(
                a.span,
                format!(
                    "`{}` takes {} arguments but is given {}",
                    a.pred,
                    pred.arity(),
                    a.args.len()
                ),
            ));
            return None;
        }
        let expected: &[Base] = match pred {
            Pred::Typing => &[Base::Exp, Base::Typ],
            Pred::Value | Pred::Error => &[Base::Exp],
            Pred::Step | Pred::StepStar => &[Base::Exp, Base::Exp],
        };
        let mut args = Vec::new();
        for (t, b) in a.args.iter().zip(expected) {
            let (tt, k) = self.term(t, scope)?;
            if !self.infer.unify(&k, &KTerm::Base(*b)) {
                self.errors.push(kind_error(
                    t.span(),
                    format!(
                        "`{}` has kind {} but `{}` expects {b}",
                        super::pretty::print_term(t, false),
                        self.infer.show(&k),
                        a.pred
                    ),
                ));
                return None;
            }
            args.push(tt);
        }
        Some(Formula::atom(pred, args))
    }

    fn prem(&mut self, p: &Prem, scope: &mut Vec<(String, KTerm)>) -> Option<Formula> {
        match p {
            Prem::Atom(a) => self.atom(a, scope),
            Prem::Pi(x, body, span) => {
                let k = self.infer.fresh();
                scope.push((x.clone(), k.clone()));
                let b = self.prem(body, scope);
                scope.pop();
                let b = b?;
                if let Formula::Hypothetical(assume, _) = &b {
                    let ok = matches!(&**assume, Formula::Typing(Term::Bound(0), _));
                    if !ok {
                        self.errors.push(kind_error(
                            *span,
                            "the assumption of a hypothetical premise must type the bound variable",
                        ));
                        return None;
                    }
                }
                let slot = self.generic_kinds.len();
                self.generic_kinds.push(k);
                // The kind is patched in after inference; the slot number
                // travels in the hint's place until then.
                Some(Formula::Generic(
                    Hint(name(&format!("{x}\u{0}{slot}"))),
                    Kind::EXP,
                    Box::new(b),
                ))
            }
            Prem::Imp(a, c) => {
                let a = self.prem(a, scope)?;
                if !matches!(a, Formula::Typing(..)) {
                    self.errors.push(kind_error(
                        Span::default(),
                        "only typing formulas can be assumed",
                    ));
                    return None;
                }
                let c = self.prem(c, scope)?;
                Some(Formula::Hypothetical(Box::new(a), Box::new(c)))
            }
        }
    }

    fn patch_generics(&self, f: Formula) -> Formula {
        match f {
            Formula::Generic(h, _, body) => {
                let (x, slot) = h.0.split_once('\u{0}').expect("generic slot");
                let k = self.infer.resolve(&self.generic_kinds[slot.parse::<usize>().unwrap()]);
                Formula::Generic(Hint::new(x), k, Box::new(self.patch_generics(*body)))
            }
            Formula::Hypothetical(a, c) => Formula::Hypothetical(
                Box::new(self.patch_generics(*a)),
                Box::new(self.patch_generics(*c)),
            ),
            atom => atom,
        }
    }
}

fn is_value_name(v: &str) -> bool {
    v.starts_with('V')
}

fn default_rule_name(sig: &Signature, conclusion: &Formula) -> String {
    let subject = conclusion.subject();
    let op = subject.and_then(Term::head).map(|h| h.to_string());
    let Some(op) = op else {
        return conclusion.pred().map(|p| p.surface()).unwrap_or("rule").to_string();
    };
    match conclusion {
        Formula::Typing(..) => format!("t-{op}"),
        Formula::Value(_) => format!("d-value-{op}"),
        Formula::Error(_) => format!("d-error-{op}"),
        Formula::Step(src, _) => {
            let first = sig
                .exp_positions(&op)
                .first()
                .and_then(|p| src.args().get(*p))
                .and_then(Term::head)
                .map(|h| h.to_string());
            match first {
                Some(p) => format!("r-{op}-{p}"),
                None => format!("r-{op}"),
            }
        }
        _ => format!("rule-{op}"),
    }
}

fn build_signature(spec: &SourceSpec, diags: &mut Vec<Diagnostic>) -> Signature {
    let mut sig = Signature::new();
    for item in &spec.items {
        let Item::Decl(d) = item else { continue };
        if d.kind.result() == Base::Typ && d.kind.args().iter().any(|a| a.result() == Base::Exp) {
            diags.push(kind_error(
                d.span,
                format!("type constant `{}` cannot take expression arguments", d.name),
            ));
            continue;
        }
        if let Err(e) = sig.declare(name(&d.name), d.kind.clone()) {
            diags.push(kind_error(d.span, e.to_string()));
            continue;
        }
        if d.kind.result() == Base::Exp && !sig.annotations_first(&d.name) {
            diags.push(
                Diagnostic::new(
                    Code::E011,
                    format!(
                        "type annotation arguments of `{}` must precede its expression arguments",
                        d.name
                    ),
                )
                .at(d.span),
            );
        }
    }
    sig
}

fn clause_to_rule(sig: &Signature, c: &Clause, diags: &mut Vec<Diagnostic>) -> Option<Rule> {
    let mut cx = ClauseCx::new(sig);
    let mut scope = Vec::new();
    let head = cx.atom(&c.head, &mut scope);
    let mut premises = Vec::new();
    for p in &c.body {
        if let Some(f) = cx.prem(p, &mut scope) {
            premises.push(f);
        }
    }
    if !cx.errors.is_empty() {
        diags.append(&mut cx.errors);
        return None;
    }
    let head = head?;
    if matches!(head, Formula::StepStar(..)) {
        diags.push(kind_error(c.span, "`stepstar` rules are generated and cannot be written"));
        return None;
    }
    let premises: Vec<Formula> = premises.into_iter().map(|f| cx.patch_generics(f)).collect();
    let vars: Vec<VarInfo> = cx
        .vars
        .iter()
        .map(|(n, k)| {
            let kind = cx.infer.resolve(k);
            let flavor = if kind.result() == Base::Typ {
                Flavor::Type
            } else if is_value_name(n) {
                Flavor::Value
            } else {
                Flavor::Expr
            };
            VarInfo {
                name: name(n),
                flavor,
                kind,
            }
        })
        .collect();
    let mut implicit = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        if v.flavor == Flavor::Value {
            let p = Formula::Value(Term::Var(i as u32));
            if !premises.contains(&p) {
                implicit.push(p);
            }
        }
    }
    implicit.extend(premises);
    Some(Rule {
        name: default_rule_name(sig, &head),
        premises: implicit,
        conclusion: head,
        vars,
        span: c.span,
    })
}

fn directive_entry(
    sig: &Signature,
    d: &Directive,
    code: Code,
) -> Result<(u32, BTreeSet<u32>), Diagnostic> {
    let err = |m: String| Diagnostic::new(code, m).at(d.span);
    if !sig.is_exp(&d.op) {
        return Err(err(format!("`{}` is not an expression constant", d.op)));
    }
    let arity = sig.exp_arity(&d.op);
    if d.slots.len() != arity {
        return Err(err(format!(
            "`{}` has {arity} expression arguments but the directive lists {}",
            d.op,
            d.slots.len()
        )));
    }
    let holes: Vec<u32> = d
        .slots
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Slot::Hole)
        .map(|(i, _)| i as u32 + 1)
        .collect();
    let [hole] = holes[..] else {
        return Err(err(format!(
            "a directive for `{}` must mark exactly one argument with `E`",
            d.op
        )));
    };
    if sig.exp_arg_kind(&d.op, hole).is_some_and(|k| !k.is_base()) {
        return Err(err(format!(
            "argument {hole} of `{}` is under a binder and cannot be a context",
            d.op
        )));
    }
    let deps = d
        .slots
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Slot::Value)
        .map(|(i, _)| i as u32 + 1)
        .collect();
    Ok((hole, deps))
}

fn language_name(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| path.to_string())
}

/// Desugars and kind-checks a parsed file.
pub fn desugar(spec: &SourceSpec) -> Result<TypedLanguage, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let sig = build_signature(spec, &mut diags);

    let mut rules = Vec::new();
    let mut used: HashMap<String, usize> = HashMap::new();
    for item in &spec.items {
        let Item::Clause(c) = item else { continue };
        if let Some(mut r) = clause_to_rule(&sig, c, &mut diags) {
            let n = used.entry(r.name.clone()).or_insert(0);
            *n += 1;
            if *n > 1 {
                r.name = format!("{}-{}", r.name, n);
            }
            rules.push(r);
        }
    }

    let mut ctx = ContextSummary::new();
    for item in &spec.items {
        let Item::Context(d) = item else { continue };
        match directive_entry(&sig, d, Code::E010) {
            Ok((hole, deps)) => {
                if let Err(e) = ctx.insert(name(&d.op), hole, deps) {
                    diags.push(Diagnostic::new(Code::E012, e.to_string()).at(d.span));
                }
            }
            Err(e) => diags.push(e),
        }
    }

    let mut saw_none = None;
    let mut explicit = ContextSummary::new();
    let mut saw_entry = false;
    for item in &spec.items {
        let Item::ErrorContext(ed) = item else { continue };
        match ed {
            ErrDirective::None(span) => saw_none = Some(*span),
            ErrDirective::Entry(d) => {
                saw_entry = true;
                match directive_entry(&sig, d, Code::E013) {
                    Ok((hole, deps)) => {
                        if let Err(e) = explicit.insert(name(&d.op), hole, deps) {
                            diags.push(Diagnostic::new(Code::E013, e.to_string()).at(d.span));
                        }
                    }
                    Err(e) => diags.push(e),
                }
            }
        }
    }
    let errctx = match (saw_none, saw_entry) {
        (Some(span), true) => {
            diags.push(
                Diagnostic::new(
                    Code::E013,
                    "`% errorcontext none.` cannot be combined with error-context entries",
                )
                .at(span),
            );
            ErrCtxDecl::Absent
        }
        (Some(_), false) => ErrCtxDecl::None,
        (None, true) => ErrCtxDecl::Explicit(explicit),
        (None, false) => ErrCtxDecl::Absent,
    };

    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(TypedLanguage {
        name: language_name(&spec.path),
        signature: sig,
        rules,
        ctx,
        errctx,
        closure: stepstar_rules(),
    })
}

/// Parses and desugars a file's contents.
pub fn load(path: &str, text: &str) -> Result<TypedLanguage, Vec<Diagnostic>> {
    let spec = super::parser::parse(path, text)?;
    desugar(&spec)
}

/// Converts a closed surface term against a signature.
pub fn desugar_term(sig: &Signature, t: &STerm) -> Result<Term, Diagnostic> {
    desugar_closed(sig, t, Base::Exp)
}

fn desugar_closed(sig: &Signature, t: &STerm, base: Base) -> Result<Term, Diagnostic> {
    let mut cx = ClauseCx::new(sig);
    let r = cx.term(t, &mut Vec::new());
    if let Some(e) = cx.errors.into_iter().next() {
        return Err(e);
    }
    let (term, k) = r.ok_or_else(|| kind_error(t.span(), "ill-kinded term"))?;
    if !cx.vars.is_empty() {
        return Err(kind_error(t.span(), "terms given for evaluation must be closed"));
    }
    let mut infer = cx.infer;
    if !infer.unify(&k, &KTerm::Base(base)) {
        let what = match base {
            Base::Exp => "expected an expression",
            Base::Typ => "expected a type",
        };
        return Err(kind_error(t.span(), what));
    }
    Ok(term)
}

/// Parses and converts a closed expression.
pub fn parse_closed_term(sig: &Signature, text: &str) -> Result<Term, Diagnostic> {
    let st = super::parser::parse_term(text)?;
    desugar_term(sig, &st)
}

/// Parses and converts a closed type.
pub fn parse_closed_type(sig: &Signature, text: &str) -> Result<Term, Diagnostic> {
    let st = super::parser::parse_term(text)?;
    desugar_closed(sig, &st, Base::Typ)
}

/// The error-context summary to validate: the explicit directives if any,
/// otherwise the candidate computed from the roles (err-none, err-only,
/// err-handler).
pub fn load_errctx(lang: &TypedLanguage, roles: &RoleEnv) -> Option<ContextSummary> {
    match &lang.errctx {
        ErrCtxDecl::None => None,
        ErrCtxDecl::Explicit(s) => Some(s.clone()),
        ErrCtxDecl::Absent => computed_errctx(&lang.ctx, roles),
    }
}

pub fn computed_errctx(ctx: &ContextSummary, roles: &RoleEnv) -> Option<ContextSummary> {
    roles.error_op()?;
    let mut out = ctx.clone();
    let handler = roles
        .gamma_t
        .iter()
        .find(|(_, r)| matches!(r, TypRole::ErrHandler))
        .map(|(op, _)| op.clone());
    if let Some(h) = handler {
        out.remove(&h, 1, &BTreeSet::new());
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::DefRole;

    const STLC: &str = "\
type arrow typ -> typ -> typ.
type bool typ.
type abs typ -> (exp -> exp) -> exp.
type app exp -> exp -> exp.
type tt exp.
typeOf (abs T1 R) (arrow T1 T2) :- pi x\\ (typeOf x T1 => typeOf (R x) T2).
typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.
typeOf tt bool.
value (abs T R).
value tt.
step (app (abs T R) V) (R V).
% context app E e.
% context app v E.
";

    fn lang(text: &str) -> TypedLanguage {
        load("stlc.mod", text).unwrap()
    }

    fn codes(text: &str) -> Vec<Code> {
        load("x.mod", text).unwrap_err().iter().map(|d| d.code).collect()
    }

    #[test]
    fn context_directives_accumulate() {
        let l = lang(STLC);
        assert_eq!(l.ctx.holes("app"), [1, 2].into_iter().collect());
        assert_eq!(l.ctx.deps("app", 2), Some(&[1].into_iter().collect()));
        assert_eq!(l.name, "stlc");
    }

    #[test]
    fn beta_gets_an_implicit_value_premise() {
        let l = lang(STLC);
        let beta = l.rule("r-app-abs").unwrap();
        let v = beta.vars.iter().position(|v| &*v.name == "V").unwrap() as u32;
        assert_eq!(beta.premises, vec![Formula::Value(Term::Var(v))]);
        assert_eq!(beta.vars[v as usize].flavor, Flavor::Value);
        let Formula::Step(_, target) = &beta.conclusion else { panic!() };
        assert!(matches!(target, Term::App(..)));
    }

    #[test]
    fn hypothetical_premise_is_generic_with_exp_kind() {
        let l = lang(STLC);
        let t = l.rule("t-abs").unwrap();
        let Formula::Generic(h, k, body) = &t.premises[0] else { panic!() };
        assert_eq!(&*h.0, "x");
        assert_eq!(k, &Kind::EXP);
        assert!(matches!(**body, Formula::Hypothetical(..)));
        let r = t.vars.iter().find(|v| &*v.name == "R").unwrap();
        assert_eq!(r.kind, Kind::arrow(Kind::EXP, Kind::EXP));
    }

    #[test]
    fn value_definition_records_value_variables() {
        let text = format!(
            "{STLC}type nil exp.\ntype cons exp -> exp -> exp.\ntype list typ -> typ.\nvalue (cons V1 V2).\n"
        );
        let l = lang(&text);
        let d = l.rule("d-value-cons").unwrap();
        assert_eq!(d.premises.len(), 2);
        assert_eq!(d.value_vars(), [0, 1].into_iter().collect());
    }

    #[test]
    fn kind_error_for_type_in_expression_position() {
        assert_eq!(
            codes(&format!("{STLC}typeOf (app arrow arrow) T.\n")),
            vec![Code::E010]
        );
    }

    #[test]
    fn annotation_after_expression_is_e011() {
        assert_eq!(codes("type bad exp -> typ -> exp.\n"), vec![Code::E011]);
    }

    #[test]
    fn duplicate_context_is_e012() {
        assert_eq!(codes(&format!("{STLC}% context app E e.\n")), vec![Code::E012]);
    }

    #[test]
    fn wrong_slot_count_is_e010() {
        assert_eq!(codes(&format!("{STLC}% context app E.\n")), vec![Code::E010]);
    }

    #[test]
    fn context_on_binder_argument_is_rejected() {
        assert_eq!(codes(&format!("{STLC}% context abs E.\n")), vec![Code::E010]);
    }

    #[test]
    fn malformed_errorcontext_is_e013() {
        assert_eq!(
            codes(&format!("{STLC}% errorcontext none.\n% errorcontext app E e.\n")),
            vec![Code::E013]
        );
        assert_eq!(codes(&format!("{STLC}% errorcontext nope E.\n")), vec![Code::E013]);
    }

    #[test]
    fn closure_rules_are_appended() {
        let l = lang(STLC);
        assert_eq!(l.closure.len(), 2);
        assert!(l.closure.iter().all(|r| r.pred() == Pred::StepStar));
    }

    #[test]
    fn errctx_without_error_is_none() {
        let l = lang(STLC);
        assert_eq!(load_errctx(&l, &RoleEnv::default()), None);
    }

    #[test]
    fn errctx_with_handler_drops_its_first_argument() {
        let mut ctx = ContextSummary::new();
        ctx.insert(name("try"), 1, BTreeSet::new()).unwrap();
        ctx.insert(name("succ"), 1, BTreeSet::new()).unwrap();
        let mut roles = RoleEnv::default();
        roles.gamma_d.insert(name("raise"), DefRole::Error([1].into_iter().collect()));
        roles.gamma_t.insert(name("raise"), TypRole::Error([1].into_iter().collect()));
        roles.gamma_t.insert(name("try"), TypRole::ErrHandler);
        let got = computed_errctx(&ctx, &roles).unwrap();
        assert_eq!(got.ops().cloned().collect::<Vec<_>>(), vec![name("succ")]);
        roles.gamma_t.remove("try");
        assert_eq!(computed_errctx(&ctx, &roles), Some(ctx));
    }

    #[test]
    fn closed_term_from_text() {
        let l = lang(STLC);
        let t = parse_closed_term(&l.signature, "app (abs bool x\\ x) tt").unwrap();
        assert_eq!(t.to_string(), "app (abs bool (x\\ x)) tt");
        assert!(parse_closed_term(&l.signature, "app tt").is_err());
        assert!(parse_closed_term(&l.signature, "app X tt").is_err());
    }
}
