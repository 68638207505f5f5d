//! Surface syntax: lexing, parsing, printing and desugaring.

pub mod ast;
pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::SourceSpec;
pub use desugar::{computed_errctx, desugar, load, load_errctx, parse_closed_term, parse_closed_type};
pub use parser::{parse, parse_term};
pub use pretty::print_spec;
