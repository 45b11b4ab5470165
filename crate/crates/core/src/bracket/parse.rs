//! Recursive-descent parser for the bracket-polynomial DSL.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := "-" factor | atom ("^" uint)?
//! atom   := number | "pi" | "e" | "sqrt(" uint ")" | "n"
//!         | "floor(" expr ")" | "frac(" expr ")" | "(" expr ")"
//! ```
//!
//! `a - b` becomes `a + (-1)*b`, unary minus becomes `(-1)*x`, and `x^k`
//! becomes a chain of `k - 1` multiplications.

use super::{BracketExpr, Constant, Node};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::sync::Arc;

const MAX_LEN: usize = 64 * 1024;
const MAX_DEPTH: usize = 200;
const MAX_POWER: u64 = 4096;

pub fn parse_bracket(text: &str) -> Result<BracketExpr> {
    if text.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    if text.len() > MAX_LEN {
        return Err(Error::Syntax {
            offset: MAX_LEN,
            message: "expression longer than 64 KiB".into(),
        });
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(BracketExpr::from_node(root, text.trim().to_string()))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
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
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                acc = Node::Add(Arc::new(acc), Arc::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                let neg = Node::Mul(Arc::new(Node::int(-1)), Arc::new(rhs));
                acc = Node::Add(Arc::new(acc), Arc::new(neg));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Node> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let rhs = self.factor()?;
            acc = Node::Mul(Arc::new(acc), Arc::new(rhs));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            self.enter()?;
            let inner = self.factor()?;
            self.depth -= 1;
            return Ok(Node::Mul(Arc::new(Node::int(-1)), Arc::new(inner)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let at = self.pos;
            let k = self.uint()?;
            if k == 0 {
                self.pos = at;
                return Err(self.error("power exponent must be at least 1"));
            }
            if k > MAX_POWER {
                self.pos = at;
                return Err(self.error("power exponent too large"));
            }
            let base = Arc::new(base);
            let mut acc = (*base).clone();
            for _ in 1..k {
                acc = Node::Mul(Arc::new(acc), base.clone());
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an unsigned integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<u64>()
            .map_err(|_| Error::Syntax {
                offset: start,
                message: "integer out of range".into(),
            })
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len = 0u32;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            digits.push(self.src[self.pos] as char);
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                digits.push(self.src[self.pos] as char);
                frac_len += 1;
                self.pos += 1;
            }
        }
        if digits.is_empty() {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        let numer: BigInt = digits.parse().unwrap();
        let denom = num_traits::pow(BigInt::from(10), frac_len as usize);
        let value = if denom.is_one() {
            BigRational::from_integer(numer)
        } else if numer.is_zero() {
            BigRational::zero()
        } else {
            BigRational::new(numer, denom)
        };
        Ok(Node::Const(Constant::Rational(value)))
    }

    fn ident(&mut self) -> (usize, &str) {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        (start, std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(b')')?;
            return Ok(inner);
        }
        if c.is_ascii_alphabetic() {
            let (start, name) = self.ident();
            let name = name.to_string();
            return match name.as_str() {
                "n" => Ok(Node::Var),
                "pi" => Ok(Node::Const(Constant::Pi)),
                "e" => Ok(Node::Const(Constant::E)),
                "sqrt" => {
                    self.expect(b'(')?;
                    let k = self.uint()?;
                    self.expect(b')')?;
                    Ok(Node::Const(Constant::Sqrt(k)))
                }
                "floor" | "frac" => {
                    self.expect(b'(')?;
                    let inner = Arc::new(self.expr()?);
                    self.expect(b')')?;
                    Ok(if name == "floor" {
                        Node::Floor(inner)
                    } else {
                        Node::Frac(inner)
                    })
                }
                _ => Err(Error::UnknownIdentifier {
                    name,
                    offset: start,
                }),
            };
        }
        Err(self.error(&format!("unexpected character `{}`", c as char)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offset_of(err: Error) -> usize {
        match err {
            Error::Syntax { offset, .. } => offset,
            Error::UnknownIdentifier { offset, .. } => offset,
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn accepts_examples() {
        for text in [
            "frac(n^3*sqrt(7)+floor(pi*n))",
            "n",
            "-floor(0.5*n+0.25)",
            "n*sqrt(3)*floor(n*sqrt(5))*frac(e*n^11)",
            "  ( n + 1 ) * ( n - 1 )  ",
            ".5*n",
        ] {
            parse_bracket(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        }
    }

    #[test]
    fn reports_offsets() {
        assert_eq!(offset_of(parse_bracket("n + * 2").unwrap_err()), 4);
        assert_eq!(offset_of(parse_bracket("n + foo").unwrap_err()), 4);
        assert_eq!(offset_of(parse_bracket("n^0").unwrap_err()), 2);
        assert_eq!(offset_of(parse_bracket("floor(n").unwrap_err()), 7);
        assert_eq!(offset_of(parse_bracket("n)").unwrap_err()), 1);
        assert!(matches!(
            parse_bracket("x + 1"),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(parse_bracket("").is_err());
        assert!(parse_bracket("sqrt(-2)").is_err());
    }

    #[test]
    fn rejects_oversized_input() {
        let long = "n+".repeat(40_000) + "n";
        assert!(parse_bracket(&long).is_err());
        let deep = "(".repeat(500) + "n" + &")".repeat(500);
        assert!(parse_bracket(&deep).is_err());
    }

    #[test]
    fn power_desugars_to_mul_chain() {
        let e = parse_bracket("n^4").unwrap();
        assert_eq!(e.complexity(), 3);
    }
}
