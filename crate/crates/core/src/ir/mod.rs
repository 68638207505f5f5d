//! Shared intermediate representation.

pub mod context;
pub mod kind;
pub mod lang;
pub mod roles;
pub mod rule;
pub mod term;

pub use context::{ContextSummary, Entry};
pub use kind::{Base, Kind, KindError, Signature};
pub use lang::{partition_rules, ErrCtxDecl, Partition, TypedLanguage};
pub use roles::{DefRole, IndexSet, RedBinding, RoleEnv, TypRole};
pub use rule::{Flavor, Formula, Pred, Rule, Span, VarInfo};
pub use term::{name, substitute, Hint, Name, Printer, Term};
