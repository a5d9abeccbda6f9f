//! Compiler and verification harness for a small first-order probabilistic
//! programming language.
//!
//! Programs are translated into pure functions of a nested pair of
//! pre-sampled uniform inputs; the distribution a program denotes is the
//! pushforward of the input measure through that function. The crate also
//! generates compositional measurability certificates for every translated
//! function, renders the definitions as Lean-style text, and validates the
//! whole construction through coupled dual semantics (a forward sampler
//! against the pure evaluator), exact measure oracles in rational
//! arithmetic, and Monte Carlo estimation.

pub mod cases;
pub mod dist;
pub mod emit;
pub mod frontend;
pub mod proofgen;
pub mod reparam;
pub mod rng;
pub mod semantics;
pub mod value;

pub use frontend::{parse_program, validate, Model, ParseError, ValidateError, ValidatedProgram};
pub use reparam::{
    translate, translate_program, InputShape, MeasureExpr, PureExpr, PureFn, TableEntry,
    TranslateError, TranslationTable,
};
pub use value::{Rat, Value};

/// A fully processed source file: validated models plus their translations.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    pub program: ValidatedProgram,
    pub table: TranslationTable,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
}

/// Parse, validate, and translate a source file.
pub fn compile(text: &str) -> Result<CompiledProgram, CompileError> {
    let models = parse_program(text)?;
    let program = validate(models)?;
    let table = translate_program(&program.models)?;
    Ok(CompiledProgram { program, table })
}
