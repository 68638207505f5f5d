//! Coded diagnostics and their catalog.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::ir::Span;

macro_rules! codes {
    ($($v:ident => $s:literal, $sev:ident, $title:literal;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Code { $($v),* }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$v),*];

            pub fn as_str(self) -> &'static str {
                match self { $(Code::$v => $s),* }
            }

            pub fn severity(self) -> Severity {
                match self { $(Code::$v => Severity::$sev),* }
            }

            pub fn title(self) -> &'static str {
                match self { $(Code::$v => $title),* }
            }
        }

        impl FromStr for Code {
            type Err = UnknownCode;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($s => Ok(Code::$v),)*
                    _ => Err(UnknownCode(s.to_string())),
                }
            }
        }
    };
}

codes! {
    E001 => "E001", Error, "syntax error";
    E010 => "E010", Error, "kind or arity error";
    E011 => "E011", Error, "type annotation after an expression argument";
    E012 => "E012", Error, "duplicate context directive";
    E013 => "E013", Error, "malformed error-context directive";
    E100 => "E100", Error, "operator given more than one role";
    E101 => "E101", Error, "more than one error operator";
    E102 => "E102", Error, "typing rule matches no classification shape";
    E103 => "E103", Error, "error type occurs in a premise";
    E104 => "E104", Error, "unsupported argument pattern";
    E105 => "E105", Error, "operator without a typing rule";
    E110 => "E110", Error, "step rule for a value or error operator";
    E111 => "E111", Error, "argument without a typing premise";
    E120 => "E120", Error, "definition restricted by more than valuehood";
    E200 => "E200", Error, "progress-dependent argument is not contextual";
    E201 => "E201", Error, "circular context dependencies";
    E202 => "E202", Error, "error contexts do not match evaluation contexts";
    E203 => "E203", Error, "context dependency out of range";
    E204 => "E204", Error, "pattern outside the eliminated argument";
    E205 => "E205", Error, "pattern does not fire exactly on values";
    E206 => "E206", Error, "step rule matches no reduction shape";
    E207 => "E207", Error, "unrestricted error-handler rule";
    E210 => "E210", Error, "eliminator misses a value";
    E211 => "E211", Error, "incomplete error handler";
    E212 => "E212", Error, "error not typed at every type";
    E300 => "E300", Error, "step rule is not type preserving";
    E300p => "E300p", Error, "step rule pattern is ill-typed";
    E301 => "E301", Error, "preservation query undecided";
    W001 => "W001", Warning, "contextual argument is not progress-dependent";
    W002 => "W002", Warning, "ambiguous closed typing";
    W003 => "W003", Warning, "value that also steps or is an error";
    W004 => "W004", Warning, "no ground base type";
    W005 => "W005", Warning, "type constructor without values";
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown diagnostic code `{0}`")]
pub struct UnknownCode(pub String);

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Location {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub location: Location,
    pub message: String,
    pub related: Vec<String>,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            location: Location {
                file: None,
                line: None,
                col: None,
                rule: None,
            },
            message: message.into(),
            related: Vec::new(),
        }
    }

    pub fn at(mut self, span: Span) -> Self {
        if span.line > 0 {
            self.location.line = Some(span.line);
            self.location.col = Some(span.col);
        }
        self
    }

    pub fn in_rule(mut self, rule: &str, span: Span) -> Self {
        self.location.rule = Some(rule.to_string());
        self.at(span)
    }

    pub fn related<I: IntoIterator<Item = S>, S: ToString>(mut self, items: I) -> Self {
        self.related.extend(items.into_iter().map(|s| s.to_string()));
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Sort key that keeps reports stable regardless of checking order.
    pub fn sort_key(&self) -> (u32, u32, Code, String) {
        (
            self.location.line.unwrap_or(u32::MAX),
            self.location.col.unwrap_or(0),
            self.code,
            self.message.clone(),
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let loc = &self.location;
        if let Some(file) = &loc.file {
            write!(f, "{file}:")?;
        }
        if let (Some(l), Some(c)) = (loc.line, loc.col) {
            write!(f, "{l}:{c}: ")?;
        } else if loc.file.is_some() {
            f.write_str(" ")?;
        }
        write!(f, "{} {}: {}", self.severity, self.code, self.message)?;
        if let Some(rule) = &loc.rule {
            write!(f, " [rule {rule}]")?;
        }
        Ok(())
    }
}

pub fn sort(diags: &mut [Diagnostic]) {
    diags.sort_by_key(Diagnostic::sort_key);
}

/// Longer explanation and a minimal example for `--explain`.
pub fn explain(code: Code) -> &'static str {
    match code {
        Code::E001 => "The file could not be tokenized or parsed.\n\
            Clauses end with `.`, premises are separated by `,`, binders are written `x\\ body`.\n\
            Example: `typeOf tt bool` (missing final period).",
        Code::E010 => "A term does not respect the declared kinds: a type was used where an\n\
            expression is expected, a constant got the wrong number of arguments, or a\n\
            directive lists the wrong number of slots.\n\
            Example: `typeOf (app arrow arrow) T.`",
        Code::E011 => "Type annotation arguments of an expression constructor must come before\n\
            its expression arguments, so that argument indices count expressions only.\n\
            Example: `type abs (exp -> exp) -> typ -> exp.`",
        Code::E012 => "Two `% context` directives declare the same argument of the same operator.\n\
            Example: `% context app E e.` written twice.",
        Code::E013 => "An `% errorcontext` directive is malformed: unknown operator, wrong slots,\n\
            or `none` mixed with explicit entries.",
        Code::E100 => "Each operator has a single role and a single typing rule.\n\
            Example: two `typeOf (app E1 E2) ...` clauses.",
        Code::E101 => "A language may define at most one error operator.\n\
            Example: `error (raise V).` and `error (crash V).`",
        Code::E102 => "A typing rule must classify its operator as a value, the error, an\n\
            eliminator, an error handler, or a derived operator. Values need a constructed\n\
            assigned type; eliminators need a constructed type for the first argument;\n\
            operators that are neither values nor errors need step rules.",
        Code::E103 => "The error operator must be typable at any type: its assigned type is a\n\
            variable that does not occur in any premise.\n\
            Example: `typeOf (raise E) T :- typeOf E T.`",
        Code::E104 => "Arguments of definitions and rule heads must be distinct variables, and\n\
            an eliminated argument may be matched against one constructor whose own\n\
            arguments are variables.\n\
            Example: `step (head (cons (succ V) V2)) V.`",
        Code::E105 => "Every expression operator needs a typing rule.",
        Code::E110 => "Values and errors do not step: a step rule whose source is built by a\n\
            value or error operator breaks this.\n\
            Example: `step (succ V) V.` when `value (succ V).`",
        Code::E111 => "Every expression argument must be the subject of a typing premise.\n\
            Example: `typeOf (ite E1 E2 E3) T :- typeOf E2 T, typeOf E3 T.`",
        Code::E120 => "Value and error definitions may only require some arguments to be values.\n\
            Example: `value (cons V1 V2) :- typeOf V1 T.`",
        Code::E200 => "Arguments that must be values before a rule applies must be evaluation\n\
            contexts, otherwise a term can wait forever for a value that never forms.\n\
            Example: beta requires the function position of `app` to be contextual:\n\
            `% context app E e.`",
        Code::E201 => "Context dependencies of an operator must be acyclic.\n\
            Example: `% context cons E v.` together with `% context cons v E.`",
        Code::E202 => "Without an error handler the error contexts coincide with the evaluation\n\
            contexts; with a handler they exclude the handler's first argument; without an\n\
            error there are none.",
        Code::E203 => "A context dependency refers to an argument index the operator does not have.",
        Code::E204 => "Only the first expression argument may be matched against a constructor.\n\
            Example: `step (app V (abs T R)) ...`",
        Code::E205 => "A reduction that eliminates a value must fire exactly when the matched\n\
            constructor forms a value: its value variables must be the ones required by\n\
            the value definition.\n\
            Example: `step (head (cons V1 E2)) V1.` when `value (cons V1 V2).`",
        Code::E206 => "A step rule must be an elimination, an error handling rule, a handler rule\n\
            for values, or a derived rule whose premises only require values.",
        Code::E207 => "The error handler's rule for non-errors must require a value, otherwise it\n\
            can preempt the handling of the error.\n\
            Example: `step (try E1 E2) E1.`",
        Code::E210 => "An eliminator must have a step rule for every value of the type it\n\
            eliminates.\n\
            Example: `ite` with a rule for `tt` only.",
        Code::E211 => "The error handler must both handle the error and step on values.\n\
            Example: `try` with a rule for `raise` only.",
        Code::E212 => "The error's typing rule must assign a type variable.\n\
            Example: `typeOf (raise E) int :- typeOf E int.`",
        Code::E300 => "The source and target of a step rule do not have the same type under the\n\
            symbolic environment built from the typing rules of the source.\n\
            Example: `step (head (cons V1 V2)) V2.`",
        Code::E300p => "The source of a step rule could not be unified with the typing rules of\n\
            its operators.",
        Code::E301 => "The preservation query exceeded the search depth and was not decided.\n\
            Raise LANGCERT_DEPTH_LIMIT to search deeper.",
        Code::W001 => "A contextual argument is never required to be a value. This is allowed but\n\
            is usually unintended.",
        Code::W002 => "A closed term has several incompatible types.",
        Code::W003 => "A term is a value and also steps or is an error.",
        Code::W004 => "The language declares no type constant of arity 0, so residual type\n\
            variables cannot be grounded.",
        Code::W005 => "A type constructor has no value constructors.",
    }
}
