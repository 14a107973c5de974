//! Source language: terms, clause programs, assertions, parsing, printing,
//! and validation. The accepted syntax is documented in `docs/grammar.md`.

pub mod builtins;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod program;
pub mod term;
pub mod validate;

pub use lexer::Pos;
pub use parser::{parse_goal, parse_program};
pub use pretty::{program_to_string, programs_equivalent, term_to_string};
pub use program::{
    has_errors, Clause, Diagnostic, Measure, Mode, PredDef, PredicateDecl, Program, Severity,
    SizeAssert,
};
pub use term::{PredSig, Sym, Term, Var};
pub use validate::validate_program;
