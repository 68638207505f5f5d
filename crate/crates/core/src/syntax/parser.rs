//! Recursive-descent parser producing a [`SourceSpec`].

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use crate::diag::{Code, Diagnostic};
use crate::ir::{Kind, Pred, Span};

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: Span,
}

type PResult<T> = Result<T, Diagnostic>;

fn syntax(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(Code::E001, msg).at(span)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok) -> PResult<Span> {
        let span = self.span();
        match self.bump() {
            Some(t) if &t.tok == want => Ok(t.span),
            Some(t) => Err(syntax(
                span,
                format!("expected {} but found {}", want.describe(), t.tok.describe()),
            )),
            None => Err(syntax(span, format!("expected {} at end of input", want.describe()))),
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        let span = self.span();
        match self.bump() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) => Ok((s, span)),
            Some(t) => Err(syntax(
                span,
                format!("expected an identifier but found {}", t.tok.describe()),
            )),
            None => Err(syntax(span, "expected an identifier at end of input")),
        }
    }

    /// Skips past the next `.` to resume after an error.
    fn recover(&mut self) {
        while let Some(t) = self.bump() {
            if t.tok == Tok::Dot {
                break;
            }
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let span = self.span();
        match self.peek() {
            Some(Tok::ContextDirective) => {
                self.bump();
                Ok(Item::Context(self.directive(span)?))
            }
            Some(Tok::ErrorContextDirective) => {
                self.bump();
                if matches!(self.peek(), Some(Tok::Ident(s)) if s == "none") {
                    self.bump();
                    self.expect(&Tok::Dot)?;
                    return Ok(Item::ErrorContext(ErrDirective::None(span)));
                }
                Ok(Item::ErrorContext(ErrDirective::Entry(self.directive(span)?)))
            }
            Some(Tok::Ident(s)) if s == "type" => {
                self.bump();
                let (name, _) = self.ident()?;
                let kind = self.kind()?;
                self.expect(&Tok::Dot)?;
                Ok(Item::Decl(Decl { name, kind, span }))
            }
            _ => {
                let head = self.atom()?;
                let mut body = Vec::new();
                if self.peek() == Some(&Tok::Turnstile) {
                    self.bump();
                    body.push(self.prem()?);
                    while self.peek() == Some(&Tok::Comma) {
                        self.bump();
                        body.push(self.prem()?);
                    }
                }
                self.expect(&Tok::Dot)?;
                Ok(Item::Clause(Clause { head, body, span }))
            }
        }
    }

    fn directive(&mut self, span: Span) -> PResult<Directive> {
        let (op, _) = self.ident()?;
        let mut slots = Vec::new();
        loop {
            let s = self.span();
            match self.bump().map(|t| t.tok) {
                Some(Tok::Dot) => break,
                Some(Tok::Var(v)) if v == "E" => slots.push(Slot::Hole),
                Some(Tok::Ident(v)) if v == "v" => slots.push(Slot::Value),
                Some(Tok::Ident(v)) if v == "e" => slots.push(Slot::Any),
                Some(t) => {
                    return Err(syntax(
                        s,
                        format!("context slots are `E`, `v` or `e`, found {}", t.describe()),
                    ))
                }
                None => return Err(syntax(s, "unterminated context directive")),
            }
        }
        Ok(Directive { op, slots, span })
    }

    fn kind(&mut self) -> PResult<Kind> {
        let lhs = self.kind_atom()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.kind()?;
            return Ok(Kind::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn kind_atom(&mut self) -> PResult<Kind> {
        let span = self.span();
        match self.bump().map(|t| t.tok) {
            Some(Tok::Ident(s)) if s == "exp" => Ok(Kind::EXP),
            Some(Tok::Ident(s)) if s == "typ" => Ok(Kind::TYP),
            Some(Tok::LParen) => {
                let k = self.kind()?;
                self.expect(&Tok::RParen)?;
                Ok(k)
            }
            Some(t) => Err(syntax(
                span,
                format!("expected `exp`, `typ` or `(` in a kind, found {}", t.describe()),
            )),
            None => Err(syntax(span, "unexpected end of input in a kind")),
        }
    }

    fn prem(&mut self) -> PResult<Prem> {
        let lhs = self.prem_primary()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.prem()?;
            return Ok(Prem::Imp(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn prem_primary(&mut self) -> PResult<Prem> {
        let span = self.span();
        match self.peek() {
            Some(Tok::Ident(s)) if s == "pi" && self.peek2() != Some(&Tok::Backslash) => {
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(&Tok::Backslash)?;
                let body = self.prem()?;
                Ok(Prem::Pi(x, Box::new(body), span))
            }
            Some(Tok::LParen) => {
                self.bump();
                let p = self.prem()?;
                self.expect(&Tok::RParen)?;
                Ok(p)
            }
            _ => Ok(Prem::Atom(self.atom()?)),
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let (pred, span) = self.ident()?;
        if Pred::from_surface(&pred).is_none() {
            return Err(syntax(
                span,
                format!("unknown predicate `{pred}`; expected typeOf, step, value or error"),
            ));
        }
        let mut args = Vec::new();
        while self.starts_arg() {
            args.push(self.arg()?);
        }
        Ok(Atom { pred, args, span })
    }

    fn starts_arg(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_)) | Some(Tok::Var(_)) | Some(Tok::LParen)
        )
    }

    fn term(&mut self) -> PResult<STerm> {
        let head = self.arg()?;
        if matches!(head, STerm::Bind(..)) {
            return Ok(head);
        }
        let mut args = Vec::new();
        while self.starts_arg() {
            let a = self.arg()?;
            let is_bind = matches!(a, STerm::Bind(..));
            args.push(a);
            if is_bind {
                break;
            }
        }
        if args.is_empty() {
            Ok(head)
        } else {
            Ok(STerm::App(Box::new(head), args))
        }
    }

    fn arg(&mut self) -> PResult<STerm> {
        let span = self.span();
        match self.bump().map(|t| t.tok) {
            Some(Tok::Ident(x)) if self.peek() == Some(&Tok::Backslash) => {
                self.bump();
                let body = self.term()?;
                Ok(STerm::Bind(x, Box::new(body), span))
            }
            Some(Tok::Ident(x)) => Ok(STerm::Name(x, span)),
            Some(Tok::Var(v)) => Ok(STerm::Var(v, span)),
            Some(Tok::LParen) => {
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Some(t) => Err(syntax(span, format!("unexpected {} in a term", t.describe()))),
            None => Err(syntax(span, "unexpected end of input in a term")),
        }
    }
}

/// Parses a whole file. On failure, returns every syntax error found,
/// resuming after the next `.` each time.
pub fn parse(path: &str, text: &str) -> Result<SourceSpec, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|e| vec![syntax(e.span, e.message)])?;
    let end = Span {
        line: text.lines().count().max(1) as u32,
        col: 1,
    };
    let mut p = Parser { toks, pos: 0, end };
    let mut items = Vec::new();
    let mut errors = Vec::new();
    while p.pos < p.toks.len() {
        match p.item() {
            Ok(item) => items.push(item),
            Err(d) => {
                errors.push(d);
                p.recover();
            }
        }
    }
    if errors.is_empty() {
        Ok(SourceSpec {
            path: path.to_string(),
            items,
        })
    } else {
        Err(errors)
    }
}

/// Parses a standalone term, as given on the command line.
pub fn parse_term(text: &str) -> Result<STerm, Diagnostic> {
    let toks = lex(text).map_err(|e| syntax(e.span, e.message))?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: Span { line: 1, col: 1 },
    };
    let t = p.term()?;
    if p.pos < p.toks.len() {
        return Err(syntax(p.span(), "trailing input after term"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(text: &str) -> Item {
        let spec = parse("t.mod", text).unwrap();
        assert_eq!(spec.items.len(), 1);
        spec.items.into_iter().next().unwrap()
    }

    #[test]
    fn context_directive_with_hole_first() {
        let Item::Context(d) = one("% context app E e.") else { panic!() };
        assert_eq!(d.op, "app");
        assert_eq!(d.slots, vec![Slot::Hole, Slot::Any]);
    }

    #[test]
    fn context_directive_with_value_sibling() {
        let Item::Context(d) = one("% context cons v E.") else { panic!() };
        assert_eq!(d.slots, vec![Slot::Value, Slot::Hole]);
    }

    #[test]
    fn typing_rule_with_two_premises() {
        let Item::Clause(c) = one("typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.")
        else {
            panic!()
        };
        assert_eq!(c.head.pred, "typeOf");
        assert_eq!(c.body.len(), 2);
    }

    #[test]
    fn hypothetical_premise_under_pi() {
        let Item::Clause(c) =
            one("typeOf (abs T1 R) (arrow T1 T2) :- pi x\\ (typeOf x T1 => typeOf (R x) T2).")
        else {
            panic!()
        };
        assert!(matches!(&c.body[0], Prem::Pi(x, b, _) if x == "x" && matches!(**b, Prem::Imp(..))));
    }

    #[test]
    fn binder_as_last_argument_extends_to_the_right() {
        let t = parse_term("abs bool x\\ app x x").unwrap();
        let STerm::App(_, args) = t else { panic!() };
        assert_eq!(args.len(), 2);
        assert!(matches!(&args[1], STerm::Bind(_, body, _) if matches!(**body, STerm::App(..))));
    }

    #[test]
    fn declarations_parse_arrow_kinds() {
        let Item::Decl(d) = one("type abs typ -> (exp -> exp) -> exp.") else { panic!() };
        assert_eq!(
            d.kind,
            Kind::chain(vec![Kind::TYP, Kind::arrow(Kind::EXP, Kind::EXP)], Kind::EXP)
        );
    }

    #[test]
    fn errors_are_collected_with_locations() {
        let errs = parse("t.mod", "value tt\nstep (a b.\nvalue ff.").unwrap_err();
        assert!(!errs.is_empty());
        assert!(errs.iter().all(|d| d.code == Code::E001 && d.location.line.is_some()));
    }

    #[test]
    fn unknown_predicate_is_a_syntax_error() {
        let errs = parse("t.mod", "reduces a b.").unwrap_err();
        assert_eq!(errs[0].code, Code::E001);
    }

    #[test]
    fn error_context_none() {
        assert!(matches!(one("% errorcontext none."), Item::ErrorContext(ErrDirective::None(_))));
    }
}
