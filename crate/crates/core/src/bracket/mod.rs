//! Bracket polynomials: expressions over the reals built from constants and
//! the indeterminate `n` with `+`, `*`, `floor(.)` and `frac(.)`.
//!
//! The complexity of an expression is the number of add, mul, floor and frac
//! nodes once powers and subtraction are desugared. It is a syntactic count
//! and therefore an upper bound for the least possible count.

mod bigfloat;
mod eval;
mod parse;

pub use eval::{eval_bracket, eval_i64, eval_phase, BracketValue, EvalGuardConfig, Evaluator};
pub use parse::parse_bracket;

use crate::error::{arg, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::fmt;
use std::sync::Arc;

/// Named or literal constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constant {
    Rational(BigRational),
    Pi,
    E,
    Sqrt(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Const(Constant),
    Var,
    Add(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Floor(Arc<Node>),
    Frac(Arc<Node>),
}

impl Node {
    pub fn complexity(&self) -> u32 {
        match self {
            Node::Const(_) | Node::Var => 0,
            Node::Add(a, b) | Node::Mul(a, b) => 1 + a.complexity() + b.complexity(),
            Node::Floor(a) | Node::Frac(a) => 1 + a.complexity(),
        }
    }

    fn has_brackets(&self) -> bool {
        match self {
            Node::Const(_) | Node::Var => false,
            Node::Add(a, b) | Node::Mul(a, b) => a.has_brackets() || b.has_brackets(),
            Node::Floor(_) | Node::Frac(_) => true,
        }
    }

    /// True when every constant is an integer and no floor/frac occurs.
    fn is_integer_polynomial(&self) -> bool {
        match self {
            Node::Const(Constant::Rational(r)) => r.is_integer(),
            Node::Const(_) => false,
            Node::Var => true,
            Node::Add(a, b) | Node::Mul(a, b) => {
                a.is_integer_polynomial() && b.is_integer_polynomial()
            }
            Node::Floor(_) | Node::Frac(_) => false,
        }
    }

    fn mentions_var(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var => true,
            Node::Add(a, b) | Node::Mul(a, b) => a.mentions_var() || b.mentions_var(),
            Node::Floor(a) | Node::Frac(a) => a.mentions_var(),
        }
    }

    pub(crate) fn int(v: i64) -> Node {
        Node::Const(Constant::Rational(BigRational::from_integer(BigInt::from(v))))
    }
}

/// Parsed bracket polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketExpr {
    root: Arc<Node>,
    integer_valued: bool,
    label: String,
}

impl BracketExpr {
    pub fn parse(text: &str) -> Result<Self> {
        parse_bracket(text)
    }

    pub(crate) fn from_node(root: Node, label: String) -> Self {
        Self {
            root: Arc::new(root),
            integer_valued: false,
            label,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn complexity(&self) -> u32 {
        self.root.complexity()
    }

    pub fn is_integer_valued(&self) -> bool {
        self.integer_valued
    }

    /// Marks the expression as mapping integers to integers. Evaluation then
    /// fails with `IntegralityViolation` if a value is not an integer.
    pub fn declare_integer_valued(mut self) -> Self {
        self.integer_valued = true;
        self
    }

    /// True if the expression contains floor or frac nodes.
    pub fn has_brackets(&self) -> bool {
        self.root.has_brackets()
    }

    pub fn is_integer_polynomial(&self) -> bool {
        self.root.is_integer_polynomial()
    }

    /// True if `n` does not occur.
    pub fn is_constant(&self) -> bool {
        !self.root.mentions_var()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `-1 * self`.
    pub fn negated(&self) -> Self {
        Self {
            root: Arc::new(Node::Mul(Arc::new(Node::int(-1)), self.root.clone())),
            integer_valued: self.integer_valued,
            label: format!("-({})", self.label),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            root: Arc::new(Node::Add(self.root.clone(), other.root.clone())),
            integer_valued: self.integer_valued && other.integer_valued,
            label: format!("({})+({})", self.label, other.label),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            root: Arc::new(Node::Mul(self.root.clone(), other.root.clone())),
            integer_valued: self.integer_valued && other.integer_valued,
            label: format!("({})*({})", self.label, other.label),
        }
    }
}

impl fmt::Display for BracketExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Remainder of `inner` modulo `m`, built as `m * frac(inner * (1/m))`.
///
/// Adds three operations to the complexity of `inner`.
pub fn rem_bracket(inner: &BracketExpr, m: u64) -> Result<BracketExpr> {
    if m == 0 {
        return arg("rem_bracket modulus must be at least 1");
    }
    let m_int = BigInt::from(m);
    let inv = Node::Const(Constant::Rational(BigRational::new(BigInt::from(1), m_int.clone())));
    let scaled = Node::Mul(inner.root.clone(), Arc::new(inv));
    let root = Node::Mul(
        Arc::new(Node::Const(Constant::Rational(BigRational::from_integer(m_int)))),
        Arc::new(Node::Frac(Arc::new(scaled))),
    );
    Ok(BracketExpr {
        root: Arc::new(root),
        integer_valued: inner.integer_valued,
        label: format!("rem({}, {m})", inner.label),
    })
}
