//! Closed-form scalar functions of time.
//!
//! Coefficients such as `0.5*t^2` or `1/(2*t^2)` are parsed into an immutable
//! [`Expression`] tree that can be evaluated and differentiated symbolically.
//! Subtrees are reference counted, so cloning and differentiation share
//! structure instead of copying it.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' integer)?
//! base   := number | 't' | '(' expr ')' | func '(' expr ')'
//! func   := 'sqrt' | 'sin' | 'cos' | 'exp'
//! ```
//!
//! Numbers use `.` as the decimal separator and may carry an exponent
//! (`1e-3`). Exponents of `^` are integers, optionally negative.

mod diff;
mod parse;

use alloc::sync::Arc;
use core::fmt;

use crate::math;

pub use parse::{ParseError, ParseErrorKind};

/// One node of an expression tree. Subtraction is represented as a sum with
/// a negated right operand.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Time,
    Neg(Expression),
    Add(Expression, Expression),
    Mul(Expression, Expression),
    Div(Expression, Expression),
    Pow(Expression, i32),
    Sqrt(Expression),
    Sin(Expression),
    Cos(Expression),
    Exp(Expression),
}

/// Immutable expression tree in the single variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression(Arc<Node>);

/// Why an expression could not be evaluated at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalErrorKind {
    DivisionByZero,
    NegativeSqrt,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub t: f64,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::NegativeSqrt => "square root of a negative number",
            EvalErrorKind::NonFinite => "non-finite value",
        };
        write!(f, "domain error at t = {}: {what}", self.t)
    }
}

impl core::error::Error for EvalError {}

// constructors named after the operators they build, not operator overloads
#[allow(clippy::should_implement_trait)]
impl Expression {
    pub fn new(node: Node) -> Self {
        Expression(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Node::Const(c))
    }

    pub fn time() -> Self {
        Self::new(Node::Time)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse(text)
    }

    /// The value of a constant node, if this is one.
    pub fn as_constant(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// True when `t` does not occur anywhere in the tree.
    pub fn is_time_independent(&self) -> bool {
        match self.node() {
            Node::Const(_) => true,
            Node::Time => false,
            Node::Neg(a) | Node::Pow(a, _) | Node::Sqrt(a) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) => {
                a.is_time_independent()
            }
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.is_time_independent() && b.is_time_independent()
            }
        }
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Time => 0,
            Node::Neg(a) | Node::Pow(a, _) | Node::Sqrt(a) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) => {
                a.size()
            }
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.size() + b.size(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let v = self.eval_raw(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError { kind: EvalErrorKind::NonFinite, t })
        }
    }

    fn eval_raw(&self, t: f64) -> Result<f64, EvalError> {
        let err = |kind| EvalError { kind, t };
        Ok(match self.node() {
            Node::Const(c) => *c,
            Node::Time => t,
            Node::Neg(a) => -a.eval_raw(t)?,
            Node::Add(a, b) => a.eval_raw(t)? + b.eval_raw(t)?,
            Node::Mul(a, b) => a.eval_raw(t)? * b.eval_raw(t)?,
            Node::Div(a, b) => {
                let num = a.eval_raw(t)?;
                let den = b.eval_raw(t)?;
                if den == 0.0 {
                    return Err(err(EvalErrorKind::DivisionByZero));
                }
                num / den
            }
            Node::Pow(a, n) => {
                let base = a.eval_raw(t)?;
                if *n < 0 && base == 0.0 {
                    return Err(err(EvalErrorKind::DivisionByZero));
                }
                math::powi(base, *n)
            }
            Node::Sqrt(a) => {
                let x = a.eval_raw(t)?;
                if x < 0.0 {
                    return Err(err(EvalErrorKind::NegativeSqrt));
                }
                math::sqrt(x)
            }
            Node::Sin(a) => math::sin(a.eval_raw(t)?),
            Node::Cos(a) => math::cos(a.eval_raw(t)?),
            Node::Exp(a) => math::exp(a.eval_raw(t)?),
        })
    }

    /// Evaluates the `order`-th symbolic derivative at `t`.
    pub fn eval_derivative(&self, order: usize, t: f64) -> Result<f64, EvalError> {
        self.nth_derivative(order).eval(t)
    }

    pub fn nth_derivative(&self, order: usize) -> Expression {
        let mut e = self.clone();
        for _ in 0..order {
            e = e.derivative();
        }
        e
    }

    // Folding constructors. They keep trees small during differentiation
    // and synthesis; the parser builds raw nodes instead.

    pub fn neg(a: Expression) -> Expression {
        match a.node() {
            Node::Const(c) => Expression::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expression::new(Node::Neg(a)),
        }
    }

    pub fn add(a: Expression, b: Expression) -> Expression {
        match (a.as_constant(), b.as_constant()) {
            (Some(x), Some(y)) => Expression::constant(x + y),
            (Some(0.0), _) => b,
            (_, Some(0.0)) => a,
            _ => Expression::new(Node::Add(a, b)),
        }
    }

    pub fn sub(a: Expression, b: Expression) -> Expression {
        Expression::add(a, Expression::neg(b))
    }

    pub fn mul(a: Expression, b: Expression) -> Expression {
        match (a.as_constant(), b.as_constant()) {
            (Some(x), Some(y)) => Expression::constant(x * y),
            (Some(0.0), _) | (_, Some(0.0)) => Expression::constant(0.0),
            (Some(1.0), _) => b,
            (_, Some(1.0)) => a,
            (Some(-1.0), _) => Expression::neg(b),
            (_, Some(-1.0)) => Expression::neg(a),
            _ => Expression::new(Node::Mul(a, b)),
        }
    }

    pub fn div(a: Expression, b: Expression) -> Expression {
        match (a.as_constant(), b.as_constant()) {
            (Some(x), Some(y)) if y != 0.0 => Expression::constant(x / y),
            (Some(0.0), _) => Expression::constant(0.0),
            (_, Some(1.0)) => a,
            _ => Expression::new(Node::Div(a, b)),
        }
    }

    pub fn powi(a: Expression, n: i32) -> Expression {
        match (n, a.as_constant()) {
            (0, _) => Expression::constant(1.0),
            (1, _) => a,
            (_, Some(c)) if n > 0 => Expression::constant(math::powi(c, n)),
            _ => Expression::new(Node::Pow(a, n)),
        }
    }

    pub fn sqrt(a: Expression) -> Expression {
        match a.as_constant() {
            Some(c) if c >= 0.0 => Expression::constant(math::sqrt(c)),
            _ => Expression::new(Node::Sqrt(a)),
        }
    }

    pub fn sin(a: Expression) -> Expression {
        match a.as_constant() {
            Some(c) => Expression::constant(math::sin(c)),
            None => Expression::new(Node::Sin(a)),
        }
    }

    pub fn cos(a: Expression) -> Expression {
        match a.as_constant() {
            Some(c) => Expression::constant(math::cos(c)),
            None => Expression::new(Node::Cos(a)),
        }
    }

    pub fn exp(a: Expression) -> Expression {
        match a.as_constant() {
            Some(c) => Expression::constant(math::exp(c)),
            None => Expression::new(Node::Exp(a)),
        }
    }
}

impl From<f64> for Expression {
    fn from(c: f64) -> Self {
        Expression::constant(c)
    }
}

/// Prints a fully parenthesized form that parses back to an equivalent tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) if c.is_sign_negative() => write!(f, "(-{:?})", -c),
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Time => f.write_str("t"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, n) => write!(f, "({a})^{n}"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

impl core::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse(s)
    }
}
