//! Certifies type soundness of small-step language specifications.

pub mod certify;
pub mod classify;
pub mod diag;
pub mod driver;
pub mod engine;
pub mod ir;
pub mod oracle;
pub mod par;
pub mod preservation;
pub mod progress;
pub mod syntax;
