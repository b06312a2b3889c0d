//! A small ECMAScript parser for feature extraction.
//!
//! Covers ES2023 script syntax plus the Annex B web extensions that show up in
//! real pages (HTML-like comments, legacy octal literals, labelled functions).

pub mod ast;
pub mod lexer;
mod parser;
pub mod visit;

use std::fmt;

pub use ast::Program;

/// Stack for the parser thread. Deeply nested input is cut off by the
/// parser's own depth limit well before this runs out.
const PARSE_STACK_BYTES: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    /// Byte offset into the source.
    pub pos: usize,
}

impl ParseError {
    pub fn new(message: impl Into<String>, pos: usize) -> Self {
        ParseError { message: message.into(), pos }
    }

    /// 1-based line and column of the error within `src`.
    pub fn line_col(&self, src: &str) -> (usize, usize) {
        let end = self.pos.min(src.len());
        let before = &src[..floor_char_boundary(src, end)];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

fn floor_char_boundary(s: &str, mut i: usize) -> usize {
    while i > 0 && !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.message, self.pos)
    }
}

impl std::error::Error for ParseError {}

/// Parses `src` as a classic (non-module) script.
pub fn parse_script(src: &str) -> Result<Program, ParseError> {
    std::thread::scope(|s| {
        let handle = std::thread::Builder::new()
            .name("js-parse".into())
            .stack_size(PARSE_STACK_BYTES)
            .spawn_scoped(s, || parser::Parser::new(src)?.parse_program());
        match handle {
            Ok(h) => h.join().unwrap_or_else(|_| Err(ParseError::new("parser panicked", 0))),
            Err(_) => parser::Parser::new(src)?.parse_program(),
        }
    })
}

#[cfg(test)]
mod tests;
