//! Minimal single-line scanner shared by the text-format parsers.
//!
//! All grammars in this crate are ASCII and line oriented. The cursor tracks
//! a byte position so parse errors can point at a column; parsers that work
//! line by line re-map the line number afterwards via [`Error::at_line`].

use num::bigint::BigInt;
use num::rational::Ratio;
use num::pow::Pow;

use crate::error::Error;
use crate::rational::Rational;

pub(crate) struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src: src.as_bytes(), pos: 0 }
    }

    /// One-based column of the next unread byte.
    pub fn col(&self) -> usize {
        self.pos + 1
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: 1, col: self.col(), msg: msg.into() }
    }

    pub fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    pub fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    /// Consume `b` if it is next; report whether it was.
    pub fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, b: u8) -> Result<(), Error> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(format!("expected {:?}", b as char)))
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    /// Require end of input, ignoring trailing whitespace.
    pub fn finish(&mut self) -> Result<(), Error> {
        self.skip_ws();
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    /// Identifier: `[A-Za-z_][A-Za-z0-9_']*`. The prime is allowed so states
    /// like `p'` can be written directly.
    pub fn ident(&mut self) -> Result<String, Error> {
        let start = self.pos;
        match self.peek() {
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                self.pos += 1;
            }
            _ => return Err(self.err("expected an identifier")),
        }
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }

    fn digits(&mut self) -> Result<&'a [u8], Error> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            Err(self.err("expected digits"))
        } else {
            Ok(&self.src[start..self.pos])
        }
    }

    /// Rational literal: `digits`, `digits/digits`, or `digits.digits`, with
    /// an optional leading `-`. Decimals are converted exactly.
    pub fn rational(&mut self) -> Result<Rational, Error> {
        let negative = self.eat(b'-');
        let int_part = self.digits()?;
        let int_value = BigInt::parse_bytes(int_part, 10).unwrap();
        let magnitude = if self.eat(b'/') {
            let den_col = self.col();
            let den = BigInt::parse_bytes(self.digits()?, 10).unwrap();
            if den == BigInt::from(0) {
                return Err(Error::Parse {
                    line: 1,
                    col: den_col,
                    msg: "zero denominator".to_string(),
                });
            }
            Ratio::new(int_value, den)
        } else if self.eat(b'.') {
            let frac = self.digits()?;
            let scale = BigInt::from(10).pow(frac.len() as u32);
            let frac_value = BigInt::parse_bytes(frac, 10).unwrap();
            Ratio::new(int_value * &scale + frac_value, scale)
        } else {
            Ratio::from_integer(int_value)
        };
        Ok(if negative { -magnitude } else { magnitude })
    }
}
