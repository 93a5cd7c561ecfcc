//! Parser for the potential expression language.
//!
//! ```text
//! poly    := ws [sign] term { sign term } ws
//! sign    := '+' | '-'
//! term    := factor { '*' factor }
//! factor  := atom [ '^' digits ]
//! atom    := complex | real | 'z' digits | 'conj(' 'z' digits ')'
//! complex := '(' real ',' real ')'
//! real    := [sign] digits [ '.' digits ] [ ('e'|'E') [sign] digits ]
//! ```
//!
//! Whitespace is insignificant between tokens. Component indices are 1-based.
//! Decimal literals are converted to exact rationals.

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Pow, Zero};

use super::poly::{coeff_real, ComplexPolynomial, Rat};
use crate::Error;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    l: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, expected: &str) -> Error {
        Error::Syntax { position: self.pos, expected: expected.to_string() }
    }

    fn expect(&mut self, c: u8) -> Result<(), Error> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("'{}'", c as char)))
        }
    }

    fn digits(&mut self) -> Result<String, Error> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("digits"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn real(&mut self) -> Result<Rat, Error> {
        let mut neg = false;
        match self.peek() {
            Some(b'-') => {
                neg = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        let int_part = self.digits()?;
        let mut frac = String::new();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        }
        let mut exp: i64 = 0;
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            self.pos += 1;
            let mut eneg = false;
            match self.src.get(self.pos) {
                Some(b'-') => {
                    eneg = true;
                    self.pos += 1;
                }
                Some(b'+') => self.pos += 1,
                _ => {}
            }
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("exponent digits"));
            }
            let e: i64 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("exponent within range"))?;
            exp = if eneg { -e } else { e };
        }
        let mantissa: BigInt = format!("{}{}", int_part, frac).parse().unwrap();
        let scale = exp - frac.len() as i64;
        let ten = Rat::from_integer(BigInt::from(10));
        let mut v = Rat::from_integer(mantissa);
        if scale != 0 {
            if scale.unsigned_abs() > 400 {
                return Err(self.err("exponent magnitude at most 400"));
            }
            v = v * Pow::pow(ten, scale as i32);
        }
        Ok(if neg { -v } else { v })
    }

    fn component(&mut self) -> Result<usize, Error> {
        let at = self.pos;
        let d = self.digits()?;
        let idx: usize = d.parse().map_err(|_| self.err("component index"))?;
        if idx == 0 || idx > self.l {
            return Err(Error::Index { position: at, index: idx, l: self.l });
        }
        Ok(idx - 1)
    }

    fn atom(&mut self) -> Result<ComplexPolynomial, Error> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let re = self.real()?;
                self.expect(b',')?;
                let im = self.real()?;
                self.expect(b')')?;
                Ok(ComplexPolynomial::constant(self.l, Complex::new(re, im)))
            }
            Some(b'z') => {
                self.pos += 1;
                let k = self.component()?;
                Ok(ComplexPolynomial::var(self.l, k))
            }
            Some(b'c') => {
                if !self.src[self.pos..].starts_with(b"conj") {
                    return Err(self.err("factor"));
                }
                self.pos += 4;
                self.expect(b'(')?;
                self.expect(b'z')?;
                let k = self.component()?;
                self.expect(b')')?;
                Ok(ComplexPolynomial::var_conj(self.l, k))
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.real()?;
                Ok(ComplexPolynomial::constant(self.l, Complex::new(v, Rat::zero())))
            }
            _ => Err(self.err("factor")),
        }
    }

    fn factor(&mut self) -> Result<ComplexPolynomial, Error> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let d = self.digits()?;
            let e: u32 = d.parse().map_err(|_| self.err("small exponent"))?;
            if e > 64 {
                return Err(self.err("exponent at most 64"));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn term(&mut self) -> Result<ComplexPolynomial, Error> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn poly(&mut self) -> Result<ComplexPolynomial, Error> {
        let mut acc = ComplexPolynomial::zero(self.l);
        let mut sign = 1;
        match self.peek() {
            Some(b'-') => {
                sign = -1;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            None => return Err(self.err("term")),
            _ => {}
        }
        loop {
            let t = self.term()?;
            acc = acc.add(&t.scale(&coeff_real(sign)));
            match self.peek() {
                Some(b'+') => {
                    sign = 1;
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = -1;
                    self.pos += 1;
                }
                None => return Ok(acc),
                Some(_) => return Err(self.err("'+', '-', '*' or end of input")),
            }
        }
    }
}

/// Parse a potential in `l` components.
pub fn parse_potential(text: &str, l: usize) -> Result<ComplexPolynomial, Error> {
    if l == 0 {
        return Err(Error::Precondition("component count must be positive".into()));
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0, l };
    let out = p.poly()?;
    debug_assert!(out.terms().all(|(_, c)| !c.is_zero()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::poly::{rat_from_i64, MonoKey};

    #[test]
    fn canonical_potential() {
        let p = parse_potential("conj(z1)^2 * z2", 2).unwrap();
        assert_eq!(p.len(), 1);
        let key = MonoKey { z: vec![0, 1], zbar: vec![2, 0] };
        assert_eq!(p.coeff(&key), coeff_real(1));
    }

    #[test]
    fn zero_coefficient_pruned() {
        assert!(parse_potential("0 * z1^3", 1).unwrap().is_empty());
    }

    #[test]
    fn duplicates_merge() {
        let p = parse_potential("z1*z2*z3 + z1*z2*z3", 3).unwrap();
        assert_eq!(p.len(), 1);
        let key = MonoKey { z: vec![1, 1, 1], zbar: vec![0, 0, 0] };
        assert_eq!(p.coeff(&key), coeff_real(2));
    }

    #[test]
    fn decimal_literals_are_exact() {
        let p = parse_potential("0.1*z1^3 + 0.2*z1^3 - 0.3*z1^3", 1).unwrap();
        assert!(p.is_empty());
        let q = parse_potential("(1.5e1,-2)*z1", 1).unwrap();
        let key = MonoKey { z: vec![1], zbar: vec![0] };
        assert_eq!(q.coeff(&key), Complex::new(rat_from_i64(15), rat_from_i64(-2)));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_potential("z1 * * z2", 2) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {:?}", other),
        }
        assert!(matches!(parse_potential("", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_potential("z1 z2", 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse_potential("conj(z1", 1), Err(Error::Syntax { .. })));
    }

    #[test]
    fn index_error() {
        assert!(matches!(parse_potential("z3", 2), Err(Error::Index { index: 3, .. })));
        assert!(matches!(parse_potential("conj(z0)", 2), Err(Error::Index { .. })));
    }

    #[test]
    fn leading_minus() {
        let p = parse_potential("-z1^3", 1).unwrap();
        let key = MonoKey { z: vec![3], zbar: vec![0] };
        assert_eq!(p.coeff(&key), coeff_real(-1));
    }
}
