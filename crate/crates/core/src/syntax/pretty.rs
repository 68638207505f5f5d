//! Prints a [`SourceSpec`] back in the surface syntax.

use super::ast::*;
use crate::ir::Kind;

pub fn print_spec(spec: &SourceSpec) -> String {
    let mut out = String::new();
    for item in &spec.items {
        out.push_str(&print_item(item));
        out.push('\n');
    }
    out
}

pub fn print_item(item: &Item) -> String {
    match item {
        Item::Decl(d) => format!("type {} {}.", d.name, print_kind(&d.kind)),
        Item::Clause(c) => {
            let head = print_atom(&c.head);
            if c.body.is_empty() {
                format!("{head}.")
            } else {
                let body: Vec<String> = c.body.iter().map(|p| print_prem(p, false)).collect();
                format!("{head} :- {}.", body.join(", "))
            }
        }
        Item::Context(d) => format!("% context {}.", print_directive(d)),
        Item::ErrorContext(ErrDirective::None(_)) => "% errorcontext none.".to_string(),
        Item::ErrorContext(ErrDirective::Entry(d)) => {
            format!("% errorcontext {}.", print_directive(d))
        }
    }
}

fn print_directive(d: &Directive) -> String {
    let mut s = d.op.clone();
    for slot in &d.slots {
        s.push(' ');
        s.push_str(match slot {
            Slot::Hole => "E",
            Slot::Value => "v",
            Slot::Any => "e",
        });
    }
    s
}

fn print_kind(k: &Kind) -> String {
    k.to_string()
}

fn print_prem(p: &Prem, nested: bool) -> String {
    match p {
        Prem::Atom(a) => print_atom(a),
        Prem::Pi(x, body, _) => {
            let s = format!("pi {x}\\ {}", print_prem(body, true));
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
        Prem::Imp(a, c) => {
            let s = format!("{} => {}", print_prem(a, true), print_prem(c, false));
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

fn print_atom(a: &Atom) -> String {
    let mut s = a.pred.clone();
    for t in &a.args {
        s.push(' ');
        s.push_str(&print_term(t, true));
    }
    s
}

pub fn print_term(t: &STerm, nested: bool) -> String {
    match t {
        STerm::Name(n, _) | STerm::Var(n, _) => n.clone(),
        STerm::App(h, args) => {
            let mut s = print_term(h, true);
            for a in args {
                s.push(' ');
                s.push_str(&print_term(a, true));
            }
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
        STerm::Bind(x, body, _) => {
            let s = format!("{x}\\ {}", print_term(body, false));
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
    }
}
