//! Tokeniser and a cursor with the helpers every parser needs.

use crate::effect::{Atom, Row};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `$name`, an effect variable.
    EffVar(String),
    /// `%n`, a runtime label.
    RtLabel(String),
    Int(i64),
    Sym(&'static str),
    /// A `#key rest` line.
    Pragma(String, String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::EffVar(s) | Tok::RtLabel(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Pragma(k, _) => write!(f, "`#{k}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

const SYMS: [&str; 22] =
    ["=>>", "->", "=>", "::", ":", "(", ")", "[", "]", "{", "}", "<", ">", ",", ";", "=", "+", "@", ".", "*", "|", "^"];

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Tokenise a source text. `//` starts a comment; a line whose first
/// non-blank character is `#` is a pragma.
pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line_no = ln + 1;
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix('#') {
            let col = line.len() - trimmed.len() + 1;
            let rest = rest.split("//").next().unwrap_or("").trim();
            let (k, v) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            out.push(Token { tok: Tok::Pragma(k.to_string(), v.trim().to_string()), line: line_no, col });
            continue;
        }
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            }
            let err = |msg: String| ParseError { line: line_no, col, msg };
            if ident_start(c) {
                let s: String = chars[i..].iter().take_while(|c| ident_char(**c)).collect();
                i += s.chars().count();
                out.push(Token { tok: Tok::Ident(s), line: line_no, col });
                continue;
            }
            if c == '$' || c == '%' {
                let s: String = chars[i + 1..].iter().take_while(|c| ident_char(**c)).collect();
                if s.is_empty() {
                    return Err(err(format!("expected a name after `{c}`")));
                }
                i += 1 + s.chars().count();
                let name = format!("{c}{s}");
                let tok = if c == '$' { Tok::EffVar(name) } else { Tok::RtLabel(name) };
                out.push(Token { tok, line: line_no, col });
                continue;
            }
            if c.is_ascii_digit() {
                let s: String = chars[i..].iter().take_while(|c| c.is_ascii_digit()).collect();
                i += s.len();
                let n = s.parse::<i64>().map_err(|e| err(format!("bad integer literal: {e}")))?;
                out.push(Token { tok: Tok::Int(n), line: line_no, col });
                continue;
            }
            let rest: String = chars[i..].iter().take(3).collect();
            match SYMS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    i += s.len();
                    out.push(Token { tok: Tok::Sym(s), line: line_no, col });
                }
                None => return Err(err(format!("unexpected character `{c}`"))),
            }
        }
    }
    let line = src.lines().count().max(1);
    out.push(Token { tok: Tok::Eof, line, col: 1 });
    Ok(out)
}

/// A cursor over a token stream.
pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Whether identifiers may contain `'`.
    pub allow_primes: bool,
}

impl Parser {
    pub fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, allow_primes: true })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, col: t.col, msg: msg.into() }
    }

    pub fn unexpected(&self, what: &str) -> ParseError {
        self.error(format!("expected {what}, found {}", self.peek()))
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    pub fn expect_kw(&mut self, k: &str) -> Result<(), ParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{k}`")))
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    /// A non-reserved identifier.
    pub fn ident(&mut self, reserved: &[&str]) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !reserved.contains(&s.as_str()) => {
                if !self.allow_primes && s.contains('\'') {
                    return Err(self.error(format!("identifier `{s}` may not contain `'`")));
                }
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    /// A label: an identifier or a runtime label `%n`.
    pub fn label(&mut self, reserved: &[&str]) -> Result<String, ParseError> {
        if let Tok::RtLabel(s) = self.peek().clone() {
            self.bump();
            return Ok(s);
        }
        self.ident(reserved)
    }

    pub fn atom(&mut self, reserved: &[&str]) -> Result<Atom, ParseError> {
        match self.peek().clone() {
            Tok::EffVar(v) => {
                self.bump();
                Ok(Atom::Var(v))
            }
            _ => Ok(Atom::Label(self.label(reserved)?)),
        }
    }

    /// Comma-separated atoms up to (not including) `close`.
    pub fn row_until(&mut self, close: &str, reserved: &[&str]) -> Result<Row, ParseError> {
        let mut atoms = Vec::new();
        if self.is_sym(close) {
            return Ok(Row(atoms));
        }
        loop {
            atoms.push(self.atom(reserved)?);
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(Row(atoms))
    }

    /// A bare row as written after `#ambient` or `--effects`; `.` is empty.
    pub fn pragma_row(text: &str) -> Result<Row, ParseError> {
        let t = text.trim();
        if t.is_empty() || t == "." {
            return Ok(Row::empty());
        }
        let mut p = Parser::new(t)?;
        let r = p.row_until("\u{0}", &[])?;
        p.expect_eof()?;
        Ok(r)
    }

    /// Consume leading pragmas.
    pub fn pragmas(&mut self) -> Vec<(String, String, usize)> {
        let mut out = Vec::new();
        while let Tok::Pragma(k, v) = self.peek().clone() {
            let line = self.toks[self.pos].line;
            self.bump();
            out.push((k, v, line));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_symbols_longest_first() {
        let toks: Vec<Tok> = lex("a =>> b -> c => d :: e").unwrap().into_iter().map(|t| t.tok).collect();
        assert!(toks.contains(&Tok::Sym("=>>")));
        assert!(toks.contains(&Tok::Sym("->")));
        assert!(toks.contains(&Tok::Sym("=>")));
        assert!(toks.contains(&Tok::Sym("::")));
    }

    #[test]
    fn pragma_rows() {
        assert_eq!(Parser::pragma_row(".").unwrap(), Row::empty());
        assert_eq!(Parser::pragma_row("yield, $e").unwrap().len(), 2);
    }
}
