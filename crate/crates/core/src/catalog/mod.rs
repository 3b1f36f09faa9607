//! System definitions: the text format, its parser and the built-in catalog.

mod builtin;
mod error;
pub mod formal;
mod lexer;
mod parser;
mod system;

pub(crate) use system::PhaseEnv;

pub use builtin::{builtin_source, builtin_system, BUILTIN_NAMES};
pub use error::CatalogError;
pub use formal::{evaluate, Formal, FormalEnv, FormalError};
pub use parser::{parse_expression, parse_system, MAX_SOURCE_BYTES};
pub use system::{
    angular_momentum,
    Generator, NamedBracket, Relation, StructureClaim, StructureFunction,
    SystemDefinition, Variant,
};
