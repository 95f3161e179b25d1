//! Textual polynomial format.
//!
//! A polynomial is a signed sum of terms `c * x1^a1 * x3^a3`, variables are
//! 1-based, rational coefficients are written `p/q`. The printer emits terms
//! in descending graded-lex order, always writes the coefficient, omits `^1`
//! and absent variables, and prints the zero polynomial as `0`:
//!
//! ```text
//! input:   x2*x1^2*1.5 - x3
//! printed: 3/2 * x1^2 * x2 - 1 * x3
//! ```
//!
//! The parser is more lenient (implicit coefficient 1, decimal literals,
//! repeated factors, arbitrary whitespace) and [`parse_exact`] inverts
//! [`format_exact`] exactly. Vector maps join components with `;`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::coefficient::{Coefficient, Rational};
use super::multi_index::MultiIndex;
use super::poly::{ExactPoly, FloatPoly, MultiPoly};
use super::vector::VectorPoly;
use crate::error::{Error, Result};

pub fn format_exact(p: &ExactPoly) -> String {
    format_with(p, |c| if c.is_integer() { c.numer().to_string() } else { format!("{}/{}", c.numer(), c.denom()) })
}

/// Floats are printed in shortest round-trip form.
pub fn format_float(p: &FloatPoly) -> String {
    format_with(p, |c| format!("{c:?}"))
}

fn format_with<C: Coefficient>(p: &MultiPoly<C>, fmt_abs: impl Fn(&C) -> String) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (idx, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&fmt_abs(&c.abs()));
        for (axis, &e) in idx.exponents().iter().enumerate() {
            match e {
                0 => {}
                1 => {
                    let _ = write!(out, " * x{}", axis + 1);
                }
                _ => {
                    let _ = write!(out, " * x{}^{}", axis + 1, e);
                }
            }
        }
    }
    out
}

pub fn format_exact_map(u: &VectorPoly<Rational>) -> String {
    u.components().iter().map(format_exact).collect::<Vec<_>>().join("; ")
}

/// Parse in dimension `n`; referencing `x_k` with `k > n` is an error.
pub fn parse_exact(text: &str, n: usize) -> Result<ExactPoly> {
    Parser::new(text, n).parse_poly()
}

/// Parse with the dimension taken from the highest variable index (at least 1).
pub fn parse_exact_infer(text: &str) -> Result<ExactPoly> {
    let n = max_variable_index(text).max(1);
    parse_exact(text, n)
}

/// Components separated by `;`, all in dimension `n`.
pub fn parse_exact_map(text: &str, n: usize) -> Result<VectorPoly<Rational>> {
    let comps = text.split(';').map(|part| parse_exact(part, n)).collect::<Result<Vec<_>>>()?;
    VectorPoly::new(n, comps)
}

fn max_variable_index(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(v) = text[start..j].parse::<usize>() {
                best = best.max(v);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, n: usize) -> Self {
        Self { src, pos: 0, n }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_poly(&mut self) -> Result<ExactPoly> {
        let mut terms = Vec::new();
        self.skip_ws();
        if self.peek().is_none() {
            return self.err("empty polynomial");
        }
        let mut sign = if self.eat(b'-') {
            -1
        } else {
            self.eat(b'+');
            1
        };
        loop {
            let (idx, mut c) = self.parse_term()?;
            if sign < 0 {
                c = -c;
            }
            terms.push((idx, c));
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                Some(other) => return self.err(format!("unexpected character '{}'", other as char)),
            }
        }
        ExactPoly::from_terms(self.n, terms)
    }

    fn parse_term(&mut self) -> Result<(MultiIndex, Rational)> {
        let mut coeff = Rational::one();
        let mut exps = vec![0u32; self.n];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'x') => {
                    self.pos += 1;
                    let var = self.parse_uint()? as usize;
                    if var == 0 || var > self.n {
                        return self.err(format!("variable x{var} outside dimension {}", self.n));
                    }
                    let e = if self.eat(b'^') { self.parse_uint()? } else { 1 };
                    let e = u32::try_from(e).or_else(|_| self.err("exponent too large"))?;
                    exps[var - 1] += e;
                }
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    coeff *= self.parse_number()?;
                }
                _ => return self.err("expected a number or a variable"),
            }
            if !self.eat(b'*') {
                break;
            }
        }
        Ok((MultiIndex::new(exps), coeff))
    }

    fn parse_uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        self.src[start..self.pos].parse().or_else(|_| self.err("integer overflow"))
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    /// `digits[.digits][e[+-]digits][/digits]`, converted exactly.
    fn parse_number(&mut self) -> Result<Rational> {
        let int_part = self.digits();
        let frac_part = if self.peek() == Some(b'.') {
            self.pos += 1;
            self.digits()
        } else {
            ""
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return self.err("malformed number");
        }
        let mantissa: BigInt = format!("{int_part}{frac_part}").parse().expect("digits only");
        let mut exp10 = -(frac_part.len() as i64);
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            let neg = match self.peek() {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let e = self.digits();
            let e: i64 = e.parse().or_else(|_| self.err("malformed exponent"))?;
            exp10 += if neg { -e } else { e };
        }
        let ten = BigInt::from(10);
        let mut value = Rational::from_integer(mantissa);
        let scale = Rational::from_integer(num_traits::pow(ten, exp10.unsigned_abs() as usize));
        if exp10 >= 0 {
            value *= scale;
        } else {
            value /= scale;
        }
        // '/' directly after a number is a rational denominator
        let save = self.pos;
        if self.eat(b'/') {
            self.skip_ws();
            let den = self.digits();
            if den.is_empty() {
                self.pos = save;
                return self.err("expected denominator");
            }
            let den: BigInt = den.parse().expect("digits only");
            if den.is_zero() {
                return self.err("zero denominator");
            }
            value /= Rational::from_integer(den);
        }
        Ok(value)
    }
}
