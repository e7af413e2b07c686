//! Lexing and parsing infrastructure shared by the three surface
//! languages.

pub mod lexer;

pub use lexer::{lex, ParseError, Parser, Tok, Token};
