//! Tokenizer for specification files.

use crate::ir::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial identifier: constants, bound variables, keywords.
    Ident(String),
    /// Uppercase- or underscore-initial identifier: meta-variables.
    Var(String),
    Backslash,
    LParen,
    RParen,
    Dot,
    Comma,
    Turnstile,
    Implies,
    Arrow,
    /// Start of a `% context` line.
    ContextDirective,
    /// Start of a `% errorcontext` line.
    ErrorContextDirective,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Backslash => "`\\`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Turnstile => "`:-`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::ContextDirective => "`% context`".into(),
            Tok::ErrorContextDirective => "`% errorcontext`".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno as u32 + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let at_line_start = |i: usize| chars[..i].iter().all(|c| c.is_whitespace());
        while i < chars.len() {
            let c = chars[i];
            let span = Span {
                line: line_no,
                col: i as u32 + 1,
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '%' {
                if at_line_start(i) {
                    let rest: String = chars[i + 1..].iter().collect();
                    let rest = rest.trim_start();
                    let keyword = rest
                        .split(|ch: char| !is_ident_char(ch))
                        .next()
                        .unwrap_or("");
                    let directive = match keyword {
                        "context" => Some(Tok::ContextDirective),
                        "errorcontext" => Some(Tok::ErrorContextDirective),
                        _ => None,
                    };
                    if let Some(tok) = directive {
                        out.push(Token { tok, span });
                        let skipped = chars.len() - i - 1 - rest.chars().count();
                        i = i + 1 + skipped + keyword.chars().count();
                        continue;
                    }
                }
                break;
            }
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let (tok, len) = match (c, two.as_str()) {
                (_, ":-") => (Tok::Turnstile, 2),
                (_, "=>") => (Tok::Implies, 2),
                (_, "->") => (Tok::Arrow, 2),
                ('\\', _) => (Tok::Backslash, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('.', _) => (Tok::Dot, 1),
                (',', _) => (Tok::Comma, 1),
                _ if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    let word: String = chars[start..j].iter().collect();
                    let tok = if c.is_uppercase() || c == '_' {
                        Tok::Var(word)
                    } else {
                        Tok::Ident(word)
                    };
                    (tok, j - start)
                }
                _ if c.is_ascii_digit() => {
                    let start = i;
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    (Tok::Ident(chars[start..j].iter().collect()), j - start)
                }
                _ => {
                    return Err(LexError {
                        span,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            out.push(Token { tok, span });
            i += len;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn comments_are_skipped_but_directives_are_not() {
        assert_eq!(toks("% a comment\n"), vec![]);
        assert_eq!(
            toks("% context app E e."),
            vec![
                Tok::ContextDirective,
                Tok::Ident("app".into()),
                Tok::Var("E".into()),
                Tok::Ident("e".into()),
                Tok::Dot
            ]
        );
        assert_eq!(toks("%context app E e.")[0], Tok::ContextDirective);
        assert_eq!(toks("% contextual remark"), vec![]);
        assert_eq!(toks("%  errorcontext none.")[0], Tok::ErrorContextDirective);
    }

    #[test]
    fn trailing_percent_is_a_comment() {
        assert_eq!(
            toks("value tt. % context app E e."),
            vec![Tok::Ident("value".into()), Tok::Ident("tt".into()), Tok::Dot]
        );
    }

    #[test]
    fn operators_and_binders() {
        assert_eq!(
            toks("a :- pi x\\ b => c, d -> e"),
            vec![
                Tok::Ident("a".into()),
                Tok::Turnstile,
                Tok::Ident("pi".into()),
                Tok::Ident("x".into()),
                Tok::Backslash,
                Tok::Ident("b".into()),
                Tok::Implies,
                Tok::Ident("c".into()),
                Tok::Comma,
                Tok::Ident("d".into()),
                Tok::Arrow,
                Tok::Ident("e".into()),
            ]
        );
    }

    #[test]
    fn spans_are_one_based() {
        let t = lex("\n  value tt.").unwrap();
        assert_eq!(t[0].span, Span { line: 2, col: 3 });
    }

    #[test]
    fn bad_character_is_reported() {
        assert!(lex("value $.").is_err());
    }
}
