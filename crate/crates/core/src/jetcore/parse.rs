//! Text grammar for differential polynomials.
//!
//! ```text
//! polynomial ::= ['-'] term (('+' | '-') term)*
//! term       ::= item ('*' item)*
//! item       ::= rational | factor ['^' digits]
//! factor     ::= 'u' ['_' [xyz]+]            2D alias for P[1,2]
//!              | 'P[' i ',' j [';' digits] ']'
//!              | 'x' | 'y' | 'z' | 'x[' k ']'  coordinates
//!              | identifier                    named parameter
//! ```
//!
//! Whitespace is ignored. `0` parses to the zero polynomial.

use std::fmt;

use num::{BigInt, One};
use thiserror::Error;

use super::{DiffPoly, Factor, MultiIndex, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    /// Moves the error position into an enclosing document.
    pub fn offset(mut self, line: usize, column: usize) -> Self {
        if self.line == 1 {
            self.column += column;
        }
        self.line += line;
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

/// Character cursor with 1-based line/column tracking, shared by the text
/// grammars of the crate.
pub(crate) struct Cursor<'a> {
    chars: Vec<(usize, usize, char)>,
    pos: usize,
    end: (usize, usize),
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        let mut chars = Vec::new();
        let (mut line, mut col) = (1, 1);
        for c in src.chars() {
            chars.push((line, col, c));
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        Cursor {
            chars,
            pos: 0,
            end: (line, col),
            _src: src,
        }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].2.is_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.2)
    }

    /// Peek without skipping whitespace.
    pub(crate) fn peek_raw(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.2)
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).map(|c| c.2);
        self.pos += 1;
        c
    }

    pub(crate) fn here(&self) -> (usize, usize) {
        self.chars.get(self.pos).map(|c| (c.0, c.1)).unwrap_or(self.end)
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError::new(line, column, message)
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(d) if d == c => {
                self.pos += 1;
                Ok(())
            }
            Some(d) => Err(self.error(format!("expected '{c}', found '{d}'"))),
            None => Err(self.error(format!("expected '{c}', found end of input"))),
        }
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub(crate) fn digits(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let mut s = String::new();
        while let Some(c) = self.peek_raw() {
            if c.is_ascii_digit() {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if s.is_empty() {
            Err(self.error("expected digits"))
        } else {
            Ok(s)
        }
    }

    pub(crate) fn unsigned(&mut self) -> Result<u64, ParseError> {
        let at = self.here();
        let d = self.digits()?;
        d.parse()
            .map_err(|_| ParseError::new(at.0, at.1, format!("integer '{d}' out of range")))
    }

    /// Optionally signed integer.
    pub(crate) fn integer(&mut self) -> Result<i64, ParseError> {
        let negative = self.eat('-');
        let v = self.unsigned()? as i64;
        Ok(if negative { -v } else { v })
    }

    pub(crate) fn rational(&mut self) -> Result<Rational, ParseError> {
        let num: BigInt = self.digits()?.parse().expect("digits");
        if self.peek() == Some('/') {
            self.pos += 1;
            let at = self.here();
            let den: BigInt = self.digits()?.parse().expect("digits");
            if den == BigInt::from(0) {
                return Err(ParseError::new(at.0, at.1, "zero denominator"));
            }
            Ok(Rational::new(num, den))
        } else {
            Ok(Rational::from_integer(num))
        }
    }

    pub(crate) fn identifier(&mut self) -> Option<String> {
        self.skip_ws();
        let mut s = String::new();
        while let Some(c) = self.peek_raw() {
            let ok = if s.is_empty() {
                c.is_ascii_alphabetic()
            } else {
                c.is_ascii_alphanumeric() || c == '_'
            };
            if !ok {
                break;
            }
            s.push(c);
            self.pos += 1;
        }
        (!s.is_empty()).then_some(s)
    }
}

fn axis_index(c: char) -> Option<u8> {
    match c {
        'x' => Some(1),
        'y' => Some(2),
        'z' => Some(3),
        _ => None,
    }
}

/// Parses a polynomial in the given dimension.
pub fn parse_poly(text: &str, dim: usize) -> Result<DiffPoly, ParseError> {
    let mut cur = Cursor::new(text);
    let p = parse_poly_cursor(&mut cur, dim)?;
    if !cur.at_end() {
        let c = cur.peek().unwrap_or(' ');
        return Err(cur.error(format!("unexpected '{c}'")));
    }
    Ok(p)
}

pub(crate) fn parse_poly_cursor(cur: &mut Cursor<'_>, dim: usize) -> Result<DiffPoly, ParseError> {
    let mut out = DiffPoly::zero(dim);
    let mut negative = cur.eat('-');
    if !negative {
        cur.eat('+');
    }
    loop {
        let term = parse_term(cur, dim)?;
        if negative {
            out = &out - &term;
        } else {
            out = &out + &term;
        }
        match cur.peek() {
            Some('+') => {
                cur.bump();
                negative = false;
            }
            Some('-') => {
                cur.bump();
                negative = true;
            }
            _ => break,
        }
    }
    Ok(out)
}

fn parse_term(cur: &mut Cursor<'_>, dim: usize) -> Result<DiffPoly, ParseError> {
    let mut term = DiffPoly::one(dim);
    loop {
        let item = parse_item(cur, dim)?;
        term = &term * &item;
        if !cur.eat('*') {
            break;
        }
    }
    Ok(term)
}

fn parse_item(cur: &mut Cursor<'_>, dim: usize) -> Result<DiffPoly, ParseError> {
    match cur.peek() {
        Some(c) if c.is_ascii_digit() => {
            let r = cur.rational()?;
            Ok(DiffPoly::constant(dim, r))
        }
        Some(c) if c.is_ascii_alphabetic() => {
            let base = parse_factor(cur, dim)?;
            if cur.eat('^') {
                let e = cur.unsigned()?;
                Ok(base.pow(e as u32))
            } else {
                Ok(base)
            }
        }
        Some(c) => Err(cur.error(format!("unexpected '{c}'"))),
        None => Err(cur.error("unexpected end of input")),
    }
}

fn parse_factor(cur: &mut Cursor<'_>, dim: usize) -> Result<DiffPoly, ParseError> {
    let start = cur.here();
    let err = |msg: String| ParseError::new(start.0, start.1, msg);
    let ident = cur.identifier().ok_or_else(|| cur.error("expected a factor"))?;

    if ident == "u" || ident.starts_with("u_") {
        if dim != 2 {
            return Err(err(format!("'u' is only defined in dimension 2, not {dim}")));
        }
        let letters = ident.strip_prefix("u_").unwrap_or("");
        if ident.starts_with("u_") && letters.is_empty() {
            return Err(err("empty derivative suffix".into()));
        }
        let mut sigma = Vec::new();
        for c in letters.chars() {
            match axis_index(c) {
                Some(k) if (k as usize) <= dim => sigma.push(k),
                _ => return Err(err(format!("invalid derivative letter '{c}'"))),
            }
        }
        return Ok(DiffPoly::jet(dim, 1, 2, MultiIndex::new(sigma)));
    }

    if ident == "P" {
        cur.expect('[')?;
        let i = cur.unsigned()?;
        cur.expect(',')?;
        let j = cur.unsigned()?;
        let mut sigma = Vec::new();
        if cur.eat(';') {
            let at = cur.here();
            for c in cur.digits()?.chars() {
                let k = c.to_digit(10).unwrap() as usize;
                if k == 0 || k > dim {
                    return Err(ParseError::new(
                        at.0,
                        at.1,
                        format!("derivative index {k} out of range"),
                    ));
                }
                sigma.push(k as u8);
            }
        }
        cur.expect(']')?;
        for idx in [i, j] {
            if idx == 0 || idx as usize > dim {
                return Err(err(format!("index {idx} out of range for dimension {dim}")));
            }
        }
        return Ok(DiffPoly::jet(dim, i as u8, j as u8, MultiIndex::new(sigma)));
    }

    if ident == "x" && cur.peek_raw() == Some('[') {
        cur.bump();
        let k = cur.unsigned()?;
        cur.expect(']')?;
        if k == 0 || k as usize > dim {
            return Err(err(format!("coordinate x[{k}] out of range for dimension {dim}")));
        }
        return Ok(DiffPoly::coord(dim, k as u8));
    }

    let mut chars = ident.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if let Some(k) = axis_index(c) {
            if k as usize > dim {
                return Err(err(format!("coordinate '{c}' out of range for dimension {dim}")));
            }
            return Ok(DiffPoly::coord(dim, k));
        }
    }

    if ident.chars().next().is_some_and(|c| c.is_ascii_lowercase()) {
        return Ok(DiffPoly::from_monomial(
            dim,
            Rational::one(),
            vec![Factor::Param(ident)],
        ));
    }
    Err(err(format!("unknown factor '{ident}'")))
}
