use alloc::string::String;
use core::fmt;

use super::{Expression, Node};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnknownIdentifier(String),
    InvalidNumber,
    ExpectedInteger,
    ExpectedOpenParen,
    ExpectedCloseParen,
}

/// Syntax error with the byte offset into the parsed text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected '{c}'")?,
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input")?,
            ParseErrorKind::UnknownIdentifier(id) => write!(f, "unknown identifier '{id}'")?,
            ParseErrorKind::InvalidNumber => f.write_str("invalid number")?,
            ParseErrorKind::ExpectedInteger => f.write_str("expected an integer exponent")?,
            ParseErrorKind::ExpectedOpenParen => f.write_str("expected '('")?,
            ParseErrorKind::ExpectedCloseParen => f.write_str("expected ')'")?,
        }
        write!(f, " at position {}", self.position)
    }
}

impl core::error::Error for ParseError {}

pub(super) fn parse(text: &str) -> Result<Expression, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    match p.peek() {
        None => Ok(e),
        Some(_) => Err(p.unexpected()),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, position: self.pos }
    }

    fn unexpected(&self) -> ParseError {
        match self.current_char() {
            Some(c) => self.error(ParseErrorKind::UnexpectedChar(c)),
            None => self.error(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn current_char(&self) -> Option<char> {
        core::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .or_else(|| self.peek().map(char::from))
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

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Expression::new(Node::Add(lhs, rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Expression::new(Node::Add(lhs, Expression::new(Node::Neg(rhs))));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                lhs = Expression::new(Node::Mul(lhs, rhs));
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                lhs = Expression::new(Node::Div(lhs, rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expression, ParseError> {
        if self.eat(b'-') {
            let inner = self.factor()?;
            return Ok(Expression::new(Node::Neg(inner)));
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let n = self.integer()?;
            return Ok(Expression::new(Node::Pow(base, n)));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits || matches!(self.peek(), Some(b'.') | Some(b'e') | Some(b'E')) {
            self.pos = start;
            return Err(self.error(ParseErrorKind::ExpectedInteger));
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<i32>().map_err(|_| ParseError {
            kind: ParseErrorKind::ExpectedInteger,
            position: start,
        })
    }

    fn base(&mut self) -> Result<Expression, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.close_paren_error());
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.unexpected()),
        }
    }

    fn close_paren_error(&self) -> ParseError {
        match self.peek() {
            None => self.error(ParseErrorKind::UnexpectedEnd),
            Some(_) => self.error(ParseErrorKind::ExpectedCloseParen),
        }
    }

    fn number(&mut self) -> Result<Expression, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError { kind: ParseErrorKind::InvalidNumber, position: start });
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(ParseError { kind: ParseErrorKind::InvalidNumber, position: start });
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expression::constant(v)),
            _ => Err(ParseError { kind: ParseErrorKind::InvalidNumber, position: start }),
        }
    }

    fn identifier(&mut self) -> Result<Expression, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let func: fn(Expression) -> Node = match name {
            "t" => return Ok(Expression::time()),
            "sqrt" => Node::Sqrt,
            "sin" => Node::Sin,
            "cos" => Node::Cos,
            "exp" => Node::Exp,
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name.into()),
                    position: start,
                })
            }
        };
        if !self.eat(b'(') {
            return Err(self.error(ParseErrorKind::ExpectedOpenParen));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.close_paren_error());
        }
        Ok(Expression::new(func(arg)))
    }
}
