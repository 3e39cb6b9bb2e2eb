//! Text form of [`ZExpr`].
//!
//! ```text
//! expr    := sign? term (('+' | '-') term)*
//! term    := coeff? '*'? factor? ('/' denom+)?
//! coeff   := real | '(' complex ')'
//! factor  := 'z' ('^' real)? | '1'
//! denom   := '(' 'z' ('-' | '+') complex ')' ('^' int)? | 'z' ('^' int)?
//! complex := real | real ('+' | '-') real? 'i' | real? 'i'
//! ```
//!
//! A term needs a coefficient or a factor. `(z+c)` is the pole at `-c`.
//! Printing is canonical: coefficients and pole locations use 17
//! significant digits, terms appear in canonical order.

use std::fmt;

use num_complex::Complex64;

use super::{Pole, PowerTerm, ZExpr};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn starts_number(&mut self) -> bool {
        matches!(self.peek(), Some(b'0'..=b'9' | b'.'))
    }

    /// Unsigned decimal with optional exponent.
    fn unsigned(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut p = self.pos;
        while p < s.len() && (s[p].is_ascii_digit() || s[p] == b'.') {
            p += 1;
        }
        if p == start {
            return self.err("expected a number");
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                while q < s.len() && s[q].is_ascii_digit() {
                    q += 1;
                }
                p = q;
            }
        }
        let text = std::str::from_utf8(&s[start..p]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = p;
                Ok(v)
            }
            Err(_) => self.err(format!("malformed number '{text}'")),
        }
    }

    fn signed(&mut self) -> Result<f64> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let v = self.unsigned()?;
        Ok(if neg { -v } else { v })
    }

    /// A complex literal; `neg` applies to the leading component.
    fn complex_body(&mut self, neg: bool) -> Result<Complex64> {
        let sign = if neg { -1.0 } else { 1.0 };
        if self.eat(b'i') {
            return Ok(Complex64::new(0.0, sign));
        }
        let first = sign * self.unsigned()?;
        if self.eat(b'i') {
            return Ok(Complex64::new(0.0, first));
        }
        let save = self.pos;
        let im_sign = match self.peek() {
            Some(b'+') => 1.0,
            Some(b'-') => -1.0,
            _ => return Ok(Complex64::new(first, 0.0)),
        };
        self.pos += 1;
        if self.eat(b'i') {
            return Ok(Complex64::new(first, im_sign));
        }
        if self.starts_number() {
            let im = self.unsigned()?;
            if self.eat(b'i') {
                return Ok(Complex64::new(first, im_sign * im));
            }
        }
        self.pos = save;
        Ok(Complex64::new(first, 0.0))
    }

    fn complex(&mut self) -> Result<Complex64> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.complex_body(neg)
    }

    fn int_power(&mut self) -> Result<u32> {
        if !self.eat(b'^') {
            return Ok(1);
        }
        let paren = self.eat(b'(');
        let at = self.pos;
        let v = self.unsigned()?;
        if paren {
            self.expect(b')')?;
        }
        if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
            return Err(Error::Parse { pos: at, msg: format!("pole order must be a positive integer, got {v}") });
        }
        Ok(v as u32)
    }

    fn denom(&mut self, poles: &mut Vec<Pole>) -> Result<()> {
        if self.eat(b'z') {
            let order = self.int_power()?;
            poles.push(Pole { location: Complex64::new(0.0, 0.0), order });
            return Ok(());
        }
        self.expect(b'(')?;
        self.expect(b'z')?;
        let loc = if self.eat(b'-') {
            self.complex()?
        } else if self.eat(b'+') {
            -self.complex()?
        } else if self.peek() == Some(b')') {
            Complex64::new(0.0, 0.0)
        } else {
            return self.err("expected '-' or '+' after 'z' in a pole factor");
        };
        self.expect(b')')?;
        let order = self.int_power()?;
        poles.push(Pole { location: loc, order });
        Ok(())
    }

    fn term(&mut self, mut negative: bool) -> Result<PowerTerm> {
        // printed forms join signed coefficients with " + "
        if self.eat(b'-') {
            negative = !negative;
        } else {
            self.eat(b'+');
        }
        let start = self.pos;
        let mut coeff = None;
        if self.starts_number() {
            coeff = Some(Complex64::new(self.unsigned()?, 0.0));
        } else if self.peek() == Some(b'(') {
            self.pos += 1;
            let c = self.complex()?;
            self.expect(b')')?;
            coeff = Some(c);
        }
        let star = self.eat(b'*');
        let mut exponent = 0.0;
        let mut factor = false;
        if self.eat(b'z') {
            factor = true;
            if self.eat(b'^') {
                if self.eat(b'(') {
                    exponent = self.signed()?;
                    self.expect(b')')?;
                } else {
                    exponent = self.signed()?;
                }
            } else {
                exponent = 1.0;
            }
        } else if star {
            if self.starts_number() && self.unsigned()? == 1.0 {
                factor = true;
            } else {
                return self.err("expected 'z' or '1' after '*'");
            }
        }
        if coeff.is_none() && !factor {
            return Err(Error::Parse { pos: start, msg: "expected a term".into() });
        }
        let mut poles = Vec::new();
        if self.eat(b'/') {
            self.denom(&mut poles)?;
            while matches!(self.peek(), Some(b'(' | b'z')) {
                self.denom(&mut poles)?;
            }
        }
        let mut c = coeff.unwrap_or(Complex64::new(1.0, 0.0));
        if negative {
            c = -c;
        }
        Ok(PowerTerm::new(c, exponent, poles))
    }
}

/// Parses the text form into a canonical expression.
pub fn parse(text: &str) -> Result<ZExpr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let mut terms = Vec::new();
    let mut negative = if p.eat(b'-') {
        true
    } else {
        p.eat(b'+');
        false
    };
    loop {
        terms.push(p.term(negative)?);
        match p.peek() {
            None => break,
            Some(b'+') => {
                p.pos += 1;
                negative = false;
            }
            Some(b'-') => {
                p.pos += 1;
                negative = true;
            }
            Some(c) => return p.err(format!("unexpected '{}'", c as char)),
        }
    }
    Ok(ZExpr::from_terms(terms))
}

impl std::str::FromStr for ZExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

fn real(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn signed_real(x: f64) -> String {
    let x = x + 0.0;
    if x.is_sign_negative() {
        real(x)
    } else {
        format!("+{}", real(x))
    }
}

fn complex(c: Complex64) -> String {
    if c.im == 0.0 {
        real(c.re)
    } else {
        format!("{}{}i", real(c.re), signed_real(c.im))
    }
}

impl fmt::Display for PowerTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff.im == 0.0 {
            write!(f, "{}", real(self.coeff.re))?;
        } else {
            write!(f, "({})", complex(self.coeff))?;
        }
        if self.exponent == 0.0 {
            write!(f, "*1")?;
        } else if self.exponent == 1.0 {
            write!(f, "*z")?;
        } else {
            write!(f, "*z^{}", self.exponent)?;
        }
        if !self.poles.is_empty() {
            write!(f, "/")?;
            for p in &self.poles {
                if p.location == Complex64::new(0.0, 0.0) {
                    write!(f, "z^{}", p.order)?;
                } else {
                    write!(f, "(z-{})", complex(p.location))?;
                    if p.order > 1 {
                        write!(f, "^{}", p.order)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ZExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
