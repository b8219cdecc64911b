//! Parser for the observable expression grammar.
//!
//! An expression is a signed sum of terms; each term is
//! `[coefficient ["*"]] ["x" ["^" uint]] ["*"] ["p" ["^" uint]]`,
//! whitespace ignored. Examples: `x`, `3*x^2*p - p^3`, `0.5*x + 2*p`.
//! Errors carry the byte offset and the tokens that would have been valid.

use crate::classical::Observable;
use crate::error::{Error, Result};
use crate::poly::Poly2;

/// Exponents past this point make the lift quadrature order explode.
pub const MAX_EXPONENT: u32 = 16;

struct Cursor<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn err(&self, expected: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            expected: expected.to_string(),
        }
    }

    /// Unsigned decimal float: digits, optional fraction, optional exponent.
    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.bytes.len() && (self.bytes[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // "e" belonged to something else; back off
                self.pos = mark;
            }
        }
        if self.pos == start {
            return Err(self.err("number"));
        }
        self.text[start..self.pos]
            .parse::<f64>()
            .map_err(|_| Error::Parse {
                offset: start,
                expected: "number".into(),
            })
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("unsigned integer exponent"));
        }
        self.text[start..self.pos].parse::<u32>().map_err(|_| Error::Parse {
            offset: start,
            expected: "unsigned integer exponent".into(),
        })
    }

    /// Optional `^ uint` suffix; defaults to exponent 1.
    fn exponent(&mut self) -> Result<u32> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let off = self.pos;
            let e = self.uint()?;
            if e > MAX_EXPONENT {
                return Err(Error::Parse {
                    offset: off,
                    expected: format!("exponent <= {MAX_EXPONENT}"),
                });
            }
            Ok(e)
        } else {
            Ok(1)
        }
    }

    /// One term after its sign has been consumed.
    fn term(&mut self) -> Result<(u32, u32, f64)> {
        let mut coeff = 1.0;
        let mut any = false;
        if matches!(self.peek(), Some(b) if b.is_ascii_digit() || b == b'.') {
            coeff = self.number()?;
            any = true;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            }
        }
        let mut xe = 0u32;
        let mut pe = 0u32;
        if self.peek() == Some(b'x') {
            self.pos += 1;
            xe = self.exponent()?;
            any = true;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            }
        }
        if self.peek() == Some(b'p') {
            self.pos += 1;
            pe = self.exponent()?;
            any = true;
        }
        if !any {
            return Err(self.err("coefficient, 'x', or 'p'"));
        }
        Ok((xe, pe, coeff))
    }
}

/// Parses the grammar into a polynomial coefficient table.
pub fn parse_polynomial(text: &str) -> Result<Poly2> {
    let mut cur = Cursor::new(text);
    let mut poly = Poly2::zero();
    let mut first = true;
    loop {
        let sign = match cur.peek() {
            Some(b'+') => {
                cur.bump();
                1.0
            }
            Some(b'-') => {
                cur.bump();
                -1.0
            }
            Some(_) if first => 1.0,
            None if first => return Err(cur.err("expression")),
            None => break,
            Some(_) => return Err(cur.err("'+' or '-' between terms")),
        };
        let (i, j, c) = cur.term()?;
        poly.add_term(i, j, sign * c);
        first = false;
        if cur.peek().is_none() {
            break;
        }
    }
    Ok(poly)
}

/// Parses an expression string into an observable.
pub fn parse_observable(text: &str) -> Result<Observable> {
    Ok(Observable::from_poly(parse_polynomial(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable() {
        let p = parse_polynomial("x").unwrap();
        assert_eq!(p, Poly2::from_terms(&[(1, 0, 1.0)]));
    }

    #[test]
    fn example_expression() {
        let p = parse_polynomial("3*x^2*p - p^3").unwrap();
        assert_eq!(p, Poly2::from_terms(&[(2, 1, 3.0), (0, 3, -1.0)]));
    }

    #[test]
    fn substitution_example() {
        let p = parse_polynomial("x^2 + 2*p").unwrap();
        let v = p.eval(0.7, -0.3);
        assert!((v - (-0.11)).abs() < 1e-15);
    }

    #[test]
    fn whitespace_and_implicit_products() {
        assert_eq!(
            parse_polynomial("  2 x p ^ 2 ").unwrap(),
            Poly2::from_terms(&[(1, 2, 2.0)])
        );
        assert_eq!(
            parse_polynomial("2*x*p^2").unwrap(),
            Poly2::from_terms(&[(1, 2, 2.0)])
        );
    }

    #[test]
    fn leading_sign_and_floats() {
        assert_eq!(
            parse_polynomial("-0.5*x + 1e-2*p").unwrap(),
            Poly2::from_terms(&[(1, 0, -0.5), (0, 1, 0.01)])
        );
    }

    #[test]
    fn error_carries_offset() {
        match parse_polynomial("3*x^2*q") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_polynomial("") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn exponent_guard() {
        assert!(parse_polynomial("x^16").is_ok());
        match parse_polynomial("x^17") {
            Err(Error::Parse { expected, .. }) => assert!(expected.contains("16")),
            other => panic!("expected exponent error, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        for text in ["3*x^2*p - p^3", "x", "0.5*x + 2*p", "1 - x*p"] {
            let p = parse_polynomial(text).unwrap();
            let printed = p.to_string();
            let reparsed = parse_polynomial(&printed).unwrap();
            assert_eq!(p, reparsed, "round trip failed for {text} -> {printed}");
        }
    }
}
