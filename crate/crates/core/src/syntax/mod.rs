//! Concrete surface syntax: lexer, recursive-descent parser and printer.
//!
//! Programs are a sequence of `type Name = T;` abbreviations followed by an
//! optional term. Abbreviations are expanded while parsing.

mod lexer;
mod parser;
mod printer;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ast::{Name, Term, Type};
pub use parser::is_keyword;
use parser::Parser;
pub use printer::{print_ground, print_term, print_type};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub decls: IndexMap<Name, Type>,
    pub term: Option<Term>,
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    Parser::new(src)?.program()
}

/// Parse `src` with the abbreviations of an earlier declarations file in scope.
pub fn parse_program_with(decls: &IndexMap<Name, Type>, src: &str) -> Result<Program, ParseError> {
    let mut prog = Parser::new(src)?.with_aliases(decls).program()?;
    let mut all = decls.clone();
    all.extend(prog.decls);
    prog.decls = all;
    Ok(prog)
}

/// Parse a term, optionally preceded by type abbreviations.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let prog = parse_program(src)?;
    prog.term.ok_or(ParseError { line: 1, col: 1, message: "expected a term".into() })
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    parse_type_with(&IndexMap::new(), src)
}

pub fn parse_type_with(aliases: &IndexMap<Name, Type>, src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?.with_aliases(aliases);
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

/// Print type abbreviations as a declarations file.
pub fn print_decls(decls: &IndexMap<Name, Type>) -> String {
    decls.iter().map(|(n, t)| format!("type {n} = {};\n", print_type(t))).collect()
}
