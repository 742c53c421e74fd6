//! The component/project specification language: model, parser, canonical
//! serializer and semantic validator.

mod error;
mod lexer;
mod model;
pub(crate) mod parser;
mod serialize;
mod validate;

pub use error::{ParseError, ParseErrorCode};
pub use model::*;
pub use parser::{
    decode_utf8, parse_component, parse_document, parse_literal, parse_operation, parse_project,
    parse_type,
};
pub use serialize::{
    serialize, serialize_component, serialize_interface, serialize_operation, serialize_project,
};
pub use validate::{validate, Violation, ViolationCode};
