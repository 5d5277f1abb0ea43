//! Recursive descent parser for polynomial expressions.
//!
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'x' integer | '(' expr ')'

use super::{MultiPoly, PolyError};
use crate::exact::Q;
use num_bigint::BigInt;
use num_traits::Zero;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

pub fn parse(text: &str, nvars: usize) -> Result<MultiPoly, PolyError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, nvars };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Syntax { pos: self.pos, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            if c == b'*' {
                acc = acc.mul(&rhs);
            } else {
                if !rhs.is_constant() {
                    return Err(PolyError::Syntax {
                        pos: at,
                        msg: "division by a non-constant".into(),
                    });
                }
                let d = rhs.constant_term();
                if d.is_zero() {
                    return Err(PolyError::Syntax { pos: at, msg: "division by zero".into() });
                }
                acc = acc.scale(&d.recip());
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            if self.peek() == Some(b'-') {
                return Err(PolyError::NegativeExponent { pos: self.pos });
            }
            let e = self.integer()?;
            let e: u32 = e
                .try_into()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| PolyError::Syntax { pos: start, msg: "integer too large".into() })
    }

    fn atom(&mut self) -> Result<MultiPoly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                let at = self.pos;
                self.pos += 1;
                if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    return Err(self.err("expected variable index"));
                }
                let idx = self.integer()? as usize;
                if idx == 0 || idx > self.nvars {
                    return Err(PolyError::VariableOutOfRange { index: idx, pos: at, nvars: self.nvars });
                }
                Ok(MultiPoly::var(self.nvars, idx))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<MultiPoly, PolyError> {
        let start = self.pos;
        let mut int = String::new();
        let mut frac = String::new();
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            int.push(self.src[self.pos] as char);
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                frac.push(self.src[self.pos] as char);
                self.pos += 1;
            }
        }
        if int.is_empty() && frac.is_empty() {
            return Err(PolyError::Syntax { pos: start, msg: "malformed number".into() });
        }
        let digits = format!("{int}{frac}");
        let num: BigInt = digits.parse().unwrap_or_else(|_| BigInt::zero());
        let den = num_traits::pow(BigInt::from(10), frac.len());
        Ok(MultiPoly::constant(self.nvars, Q::new(num, den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qr};
    use crate::poly::Mono;

    #[test]
    fn spec_examples() {
        let p = parse("x1^2 - x2", 2).unwrap();
        assert_eq!(p.coeff(&Mono(vec![2, 0])), q(1));
        assert_eq!(p.coeff(&Mono(vec![0, 1])), q(-1));
        assert_eq!(p.num_terms(), 2);
        assert!(parse("0", 1).unwrap().is_zero());
        let r = parse("x1^3/3 - x1*x2", 2).unwrap();
        assert_eq!(r.coeff(&Mono(vec![3, 0])), qr(1, 3));
        assert_eq!(r.coeff(&Mono(vec![1, 1])), q(-1));
    }

    #[test]
    fn decimals_and_parens() {
        let p = parse("0.25*(x1 + 2)^2", 1).unwrap();
        assert_eq!(p, parse("1/4*x1^2 + x1 + 1", 1).unwrap());
        assert_eq!(parse("-(-x1)", 1).unwrap(), parse("x1", 1).unwrap());
        assert_eq!(parse("3/4", 1).unwrap(), MultiPoly::constant(1, qr(3, 4)));
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse("x3", 2), Err(PolyError::VariableOutOfRange { index: 3, pos: 0, .. })));
        assert!(matches!(parse("x1^-2", 1), Err(PolyError::NegativeExponent { pos: 3 })));
        assert!(matches!(parse("x1 + * 2", 1), Err(PolyError::Syntax { pos: 5, .. })));
        assert!(matches!(parse("x1/x1", 1), Err(PolyError::Syntax { .. })));
        assert!(matches!(parse("(x1", 1), Err(PolyError::Syntax { .. })));
        assert!(matches!(parse("x0", 1), Err(PolyError::VariableOutOfRange { .. })));
    }
}
