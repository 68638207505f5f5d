//! Role environments produced by classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::term::Name;

pub type IndexSet = BTreeSet<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DefRole {
    Value(IndexSet),
    Error(IndexSet),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypRole {
    Value { ty: Name, n: IndexSet },
    Error(IndexSet),
    Elim(Name),
    Derived,
    ErrHandler,
}

impl TypRole {
    pub fn is_value_or_error(&self) -> bool {
        matches!(self, TypRole::Value { .. } | TypRole::Error(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RedBinding {
    Eliminates { op: Name, target: Name, rule: String },
    Plain { op: Name, rule: String },
}

impl RedBinding {
    pub fn op(&self) -> &Name {
        match self {
            RedBinding::Eliminates { op, .. } | RedBinding::Plain { op, .. } => op,
        }
    }

    pub fn rule(&self) -> &str {
        match self {
            RedBinding::Eliminates { rule, .. } | RedBinding::Plain { rule, .. } => rule,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoleEnv {
    pub gamma_d: BTreeMap<Name, DefRole>,
    pub gamma_t: BTreeMap<Name, TypRole>,
    pub gamma_r: Vec<RedBinding>,
}

impl RoleEnv {
    pub fn error_op(&self) -> Option<(&Name, &IndexSet)> {
        self.gamma_t.iter().find_map(|(op, r)| match r {
            TypRole::Error(n) => Some((op, n)),
            _ => None,
        })
    }

    pub fn handler_op(&self) -> Option<&Name> {
        self.gamma_t
            .iter()
            .find_map(|(op, r)| matches!(r, TypRole::ErrHandler).then_some(op))
    }

    /// Value constructors of the type constructor `c`, in name order.
    pub fn values_of(&self, c: &str) -> Vec<(&Name, &IndexSet)> {
        self.gamma_t
            .iter()
            .filter_map(|(op, r)| match r {
                TypRole::Value { ty, n } if &**ty == c => Some((op, n)),
                _ => None,
            })
            .collect()
    }

    pub fn eliminates(&self, op: &str, target: &str) -> Vec<&str> {
        self.gamma_r
            .iter()
            .filter_map(|b| match b {
                RedBinding::Eliminates { op: o, target: t, rule } if &**o == op && &**t == target => {
                    Some(rule.as_str())
                }
                _ => None,
            })
            .collect()
    }

    pub fn plain(&self, op: &str) -> Vec<&str> {
        self.gamma_r
            .iter()
            .filter_map(|b| match b {
                RedBinding::Plain { op: o, rule } if &**o == op => Some(rule.as_str()),
                _ => None,
            })
            .collect()
    }
}

pub fn fmt_set(s: &IndexSet) -> String {
    let v: Vec<String> = s.iter().map(u32::to_string).collect();
    format!("{{{}}}", v.join(","))
}

impl fmt::Display for TypRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypRole::Value { ty, n } => write!(f, "value {ty} {}", fmt_set(n)),
            TypRole::Error(n) => write!(f, "error {}", fmt_set(n)),
            TypRole::Elim(c) => write!(f, "elim {c}"),
            TypRole::Derived => f.write_str("derived"),
            TypRole::ErrHandler => f.write_str("errHandler"),
        }
    }
}

impl fmt::Display for DefRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DefRole::Value(n) => write!(f, "value {}", fmt_set(n)),
            DefRole::Error(n) => write!(f, "error {}", fmt_set(n)),
        }
    }
}

/// Serializable view used in JSON reports.
#[derive(Serialize)]
pub struct RoleView {
    pub op: String,
    pub role: String,
}

impl RoleEnv {
    pub fn view(&self) -> Vec<RoleView> {
        self.gamma_t
            .iter()
            .map(|(op, r)| RoleView {
                op: op.to_string(),
                role: r.to_string(),
            })
            .collect()
    }
}
