//! Frontend: parse and validate source programs into `Model` ASTs.

pub mod ast;
pub mod parse;
pub mod validate;

pub use ast::{BinOp, CmpOp, DistCall, Expr, Model, Side, Stmt, Ty, TyTree};
pub use parse::{parse_program, pretty_print, ParseError};
pub use validate::{validate, ValidateError, ValidatedProgram};
