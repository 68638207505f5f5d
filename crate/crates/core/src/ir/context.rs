//! Context summaries: which arguments of an operator are evaluation
//! contexts and which siblings must be values first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::term::Name;

/// One declared context: the hole index and the indices that must already
/// be values. Indices count EXP arguments only, starting at 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entry {
    pub hole: u32,
    pub deps: BTreeSet<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ContextSummary {
    entries: BTreeMap<Name, BTreeMap<u32, BTreeSet<u32>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContextError {
    #[error("context for argument {hole} of `{op}` is declared twice")]
    Duplicate { op: Name, hole: u32 },
    #[error("a context hole cannot depend on itself (argument {hole} of `{op}`)")]
    SelfDependency { op: Name, hole: u32 },
    #[error("context index must be positive")]
    ZeroIndex,
}

impl ContextSummary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, op: Name, hole: u32, deps: BTreeSet<u32>) -> Result<(), ContextError> {
        if hole == 0 || deps.contains(&0) {
            return Err(ContextError::ZeroIndex);
        }
        if deps.contains(&hole) {
            return Err(ContextError::SelfDependency { op, hole });
        }
        let per_op = self.entries.entry(op.clone()).or_default();
        if per_op.contains_key(&hole) {
            return Err(ContextError::Duplicate { op, hole });
        }
        per_op.insert(hole, deps);
        Ok(())
    }

    /// Removes one entry, dropping the operator once it has none left.
    /// Returns whether the entry existed.
    pub fn remove(&mut self, op: &str, hole: u32, deps: &BTreeSet<u32>) -> bool {
        let Some(per_op) = self.entries.get_mut(op) else {
            return false;
        };
        if per_op.get(&hole) != Some(deps) {
            return false;
        }
        per_op.remove(&hole);
        if per_op.is_empty() {
            self.entries.remove(op);
        }
        true
    }

    pub fn ops(&self) -> impl Iterator<Item = &Name> {
        self.entries.keys()
    }

    pub fn entries_of(&self, op: &str) -> Vec<Entry> {
        self.entries
            .get(op)
            .map(|m| {
                m.iter()
                    .map(|(h, d)| Entry {
                        hole: *h,
                        deps: d.clone(),
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// The contextual indices of `op` (the domain of `ctx(op)`).
    pub fn holes(&self, op: &str) -> BTreeSet<u32> {
        self.entries
            .get(op)
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default()
    }

    pub fn deps(&self, op: &str, hole: u32) -> Option<&BTreeSet<u32>> {
        self.entries.get(op).and_then(|m| m.get(&hole))
    }

    pub fn contains(&self, op: &str, hole: u32) -> bool {
        self.deps(op, hole).is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All entries as `(op, entry)` pairs in a canonical order.
    pub fn all(&self) -> Vec<(Name, Entry)> {
        self.entries
            .iter()
            .flat_map(|(op, m)| {
                m.iter().map(move |(h, d)| {
                    (
                        op.clone(),
                        Entry {
                            hole: *h,
                            deps: d.clone(),
                        },
                    )
                })
            })
            .collect()
    }

    /// Entries present in `self` but not in `other`.
    pub fn difference(&self, other: &ContextSummary) -> Vec<(Name, Entry)> {
        self.all()
            .into_iter()
            .filter(|(op, e)| other.deps(op, e.hole) != Some(&e.deps))
            .collect()
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let deps: Vec<String> = self.deps.iter().map(u32::to_string).collect();
        write!(f, "({}, {{{}}})", self.hole, deps.join(","))
    }
}

impl fmt::Display for ContextSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(op, m)| {
                let es: Vec<String> = m
                    .iter()
                    .map(|(h, d)| {
                        Entry {
                            hole: *h,
                            deps: d.clone(),
                        }
                        .to_string()
                    })
                    .collect();
                format!("{op} -> {{{}}}", es.join(", "))
            })
            .collect();
        write!(f, "{{{}}}", parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::term::name;

    fn set(xs: &[u32]) -> BTreeSet<u32> {
        xs.iter().copied().collect()
    }

    #[test]
    fn cons_summary_from_definition() {
        let mut c = ContextSummary::new();
        c.insert(name("cons"), 1, set(&[])).unwrap();
        c.insert(name("cons"), 2, set(&[1])).unwrap();
        assert_eq!(c.holes("cons"), set(&[1, 2]));
        assert_eq!(c.to_string(), "{cons -> {(1, {}), (2, {1})}}");
    }

    #[test]
    fn duplicate_and_self_dependency_rejected() {
        let mut c = ContextSummary::new();
        c.insert(name("app"), 1, set(&[])).unwrap();
        assert!(matches!(
            c.insert(name("app"), 1, set(&[])),
            Err(ContextError::Duplicate { .. })
        ));
        assert!(matches!(
            c.insert(name("app"), 2, set(&[2])),
            Err(ContextError::SelfDependency { .. })
        ));
    }

    #[test]
    fn removing_last_entry_drops_operator() {
        let mut c = ContextSummary::new();
        c.insert(name("try"), 1, set(&[])).unwrap();
        assert!(c.remove("try", 1, &set(&[])));
        assert!(c.is_empty());
        assert!(!c.remove("try", 1, &set(&[])));
    }
}
